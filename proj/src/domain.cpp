#include "kacrice/domain.hpp"
#include "kacrice/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace kacrice {

Domain Domain::cube(int m) {
    if (m < 1) throw DomainError("Domain::cube: dimension must be positive");
    return Domain(Kind::Cube, m);
}

std::string Domain::name() const {
    switch (kind_) {
        case Kind::Circle: return "circle";
        case Kind::Sphere: return "sphere";
        case Kind::Cube: return "cube";
    }
    return "unknown";
}

Mat Domain::tangent_frame(const Vec& p) const {
    if (p.size() != ambient_dim()) throw DomainError("Domain::tangent_frame: point has wrong dimension");
    switch (kind_) {
        case Kind::Circle: {
            Mat t(2, 1);
            t << -p(1), p(0);
            return t / t.norm();
        }
        case Kind::Sphere: {
            const Eigen::Vector3d x = p.normalized();
            Eigen::Vector3d e1;
            if (std::abs(x(2)) > 1.0 - 1e-8) {
                e1 = Eigen::Vector3d::UnitX();
            } else {
                e1 = Eigen::Vector3d(-x(1), x(0), 0.0);
            }
            e1 = (e1 - e1.dot(x) * x).normalized();
            const Eigen::Vector3d e2 = x.cross(e1);
            Mat t(3, 2);
            t.col(0) = e1;
            t.col(1) = e2;
            return t;
        }
        case Kind::Cube: return Mat::Identity(dim_, dim_);
    }
    return {};
}

double Domain::volume() const {
    switch (kind_) {
        case Kind::Circle: return 2.0 * std::numbers::pi;
        case Kind::Sphere: return 4.0 * std::numbers::pi;
        case Kind::Cube: return 1.0;
    }
    return 0.0;
}

Vec circle_point(double theta) {
    Vec p(2);
    p << std::cos(theta), std::sin(theta);
    return p;
}

Region Region::points(std::vector<Vec> pts) {
    Region r;
    r.dim = 0;
    r.weights.assign(pts.size(), 1.0);
    r.nodes = std::move(pts);
    return r;
}

Region Region::circle(int n) {
    Region r;
    r.dim = 1;
    const auto rule = quad::periodic_trapezoid(n, 0.0, 2.0 * std::numbers::pi);
    for (double t : rule.nodes) r.nodes.push_back(circle_point(t));
    r.weights = rule.weights;
    return r;
}

Region Region::arc(double theta0, double theta1, int n) {
    Region r;
    r.dim = 1;
    const auto rule = quad::gauss_legendre(n, theta0, theta1);
    for (double t : rule.nodes) r.nodes.push_back(circle_point(t));
    r.weights = rule.weights;
    return r;
}

Region Region::sphere(int n_polar, int n_azimuth) {
    Region r;
    r.dim = 2;
    const auto zr = quad::gauss_legendre(n_polar, -1.0, 1.0);
    const auto ar = quad::periodic_trapezoid(n_azimuth, 0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < zr.nodes.size(); ++i) {
        const double z = zr.nodes[i], s = std::sqrt(1.0 - z * z);
        for (std::size_t j = 0; j < ar.nodes.size(); ++j) {
            Vec p(3);
            p << s * std::cos(ar.nodes[j]), s * std::sin(ar.nodes[j]), z;
            r.nodes.push_back(p);
            r.weights.push_back(zr.weights[i] * ar.weights[j]);
        }
    }
    return r;
}

Region Region::cube(int m, int order) {
    if (m < 1) throw DomainError("Region::cube: dimension must be positive");
    Region r;
    r.dim = m;
    const auto rule = quad::gauss_legendre(order, 0.0, 1.0);
    const std::size_t k = rule.nodes.size();
    std::size_t total = 1;
    for (int d = 0; d < m; ++d) total *= k;
    for (std::size_t idx = 0; idx < total; ++idx) {
        Vec p(m);
        double w = 1.0;
        std::size_t rem = idx;
        for (int d = 0; d < m; ++d) {
            p(d) = rule.nodes[rem % k];
            w *= rule.weights[rem % k];
            rem /= k;
        }
        r.nodes.push_back(p);
        r.weights.push_back(w);
    }
    return r;
}

double Region::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

}  // namespace kacrice
