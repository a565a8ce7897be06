#include "kacrice/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <map>
#include <mutex>
#include <stdexcept>

namespace kacrice::quad {

namespace {

// Reference rule on [-1, 1], built once per order.
const Rule& reference_rule(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    Rule r;
    const auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative half
    for (double x : zeros) {
        const double dp = boost::math::legendre_p_prime(n, x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes.push_back(x);
        r.weights.push_back(w);
        if (x != 0.0) {
            r.nodes.push_back(-x);
            r.weights.push_back(w);
        }
    }
    return cache.emplace(n, std::move(r)).first->second;
}

}  // namespace

Rule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    const Rule& ref = reference_rule(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    Rule r;
    r.nodes.reserve(ref.nodes.size());
    r.weights.reserve(ref.nodes.size());
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
        r.nodes.push_back(mid + half * ref.nodes[i]);
        r.weights.push_back(half * ref.weights[i]);
    }
    return r;
}

Rule composite_gauss_legendre(int panels, int order, double a, double b) {
    if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels must be positive");
    Rule r;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double hi = (p + 1 == panels) ? b : lo + h;
        Rule piece = gauss_legendre(order, lo, hi);
        r.nodes.insert(r.nodes.end(), piece.nodes.begin(), piece.nodes.end());
        r.weights.insert(r.weights.end(), piece.weights.begin(), piece.weights.end());
    }
    return r;
}

Rule periodic_trapezoid(int n, double a, double period) {
    if (n < 1) throw std::invalid_argument("periodic_trapezoid: n must be positive");
    Rule r;
    r.nodes.reserve(n);
    r.weights.assign(n, period / n);
    for (int i = 0; i < n; ++i) r.nodes.push_back(a + period * i / n);
    return r;
}

}  // namespace kacrice::quad
