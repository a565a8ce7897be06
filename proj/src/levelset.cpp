#include "kacrice/levelset.hpp"
#include "kacrice/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kacrice {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int s) { return std::pow(kPi, 0.5 * s) / std::tgamma(0.5 * s + 1.0); }

}  // namespace

LevelSetW LevelSetW::point(const Vec& y0) {
    LevelSetW w;
    const auto k = static_cast<int>(y0.size());
    if (k < 1) throw DomainError("LevelSetW::point: empty point");
    w.ambient_dim = k;
    w.codim = k;
    w.phi = [y0](const Vec& y) -> Vec { return y - y0; };
    w.phi_jacobian = [k](const Vec&) -> Mat { return Mat::Identity(k, k); };
    w.normal_framing = [k](const Vec&) -> Mat { return Mat::Identity(k, k); };
    w.fiber_sampler = [y0](const FiberRequest&) { return std::vector<FiberNode>{{y0, 1.0}}; };
    w.compact = true;
    w.is_point = true;
    w.name = "point";
    return w;
}

LevelSetW LevelSetW::sphere(double r, int k) {
    if (!(r > 0.0)) throw DomainError("LevelSetW::sphere: radius must be positive");
    if (k != 2 && k != 3) throw DomainError("LevelSetW::sphere: ambient dimension must be 2 or 3");
    LevelSetW w;
    w.ambient_dim = k;
    w.codim = 1;
    w.phi = [r](const Vec& y) -> Vec { return Vec::Constant(1, y.squaredNorm() - r * r); };
    w.phi_jacobian = [](const Vec& y) -> Mat { return 2.0 * y.transpose(); };
    w.normal_framing = [](const Vec& y) -> Mat {
        const double n = y.norm();
        if (n == 0.0) return {};
        return y / n;
    };
    w.fiber_sampler = [r, k](const FiberRequest& req) {
        std::vector<FiberNode> out;
        if (req.radius > 0.0 && req.radius < r) return out;
        if (k == 2) {
            const auto rule = quad::periodic_trapezoid(req.n_nodes, 0.0, 2.0 * kPi);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                Vec y(2);
                y << r * std::cos(rule.nodes[i]), r * std::sin(rule.nodes[i]);
                out.push_back({y, r * rule.weights[i]});
            }
        } else {
            const int nz = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(req.n_nodes) / 2.0)));
            const auto zr = quad::gauss_legendre(nz, -1.0, 1.0);
            const auto ar = quad::periodic_trapezoid(2 * nz, 0.0, 2.0 * kPi);
            for (std::size_t i = 0; i < zr.nodes.size(); ++i) {
                const double z = zr.nodes[i], s = std::sqrt(1.0 - z * z);
                for (std::size_t j = 0; j < ar.nodes.size(); ++j) {
                    Vec y(3);
                    y << r * s * std::cos(ar.nodes[j]), r * s * std::sin(ar.nodes[j]), r * z;
                    out.push_back({y, r * r * zr.weights[i] * ar.weights[j]});
                }
            }
        }
        return out;
    };
    w.compact = true;
    w.name = "sphere";
    return w;
}

LevelSetW LevelSetW::linear(const Mat& normals, const Vec& offset) {
    const auto k = static_cast<int>(offset.size());
    if (normals.rows() != k) throw DomainError("LevelSetW::linear: normals and offset disagree in dimension");
    const Mat nu = geom::orthonormalize(normals);
    if (nu.cols() != normals.cols()) throw DomainError("LevelSetW::linear: normals are linearly dependent");
    const auto m = static_cast<int>(nu.cols());
    if (m == k) return point(nu * (nu.transpose() * offset));
    const Mat tangent = geom::Subspace::span(nu).orthogonal_complement().basis();
    const Vec center = nu * (nu.transpose() * offset);
    const int s = k - m;

    LevelSetW w;
    w.ambient_dim = k;
    w.codim = m;
    w.phi = [nu, offset](const Vec& y) -> Vec { return nu.transpose() * (y - offset); };
    w.phi_jacobian = [nu](const Vec&) -> Mat { return nu.transpose(); };
    w.normal_framing = [nu](const Vec&) -> Mat { return nu; };
    w.fiber_sampler = [tangent, center, s](const FiberRequest& req) {
        std::vector<FiberNode> out;
        // W ∩ B_R is a ball of radius rho around the foot point.
        const double r2 = req.radius * req.radius - center.squaredNorm();
        if (r2 <= 0.0) return out;
        const double rho = std::sqrt(r2);
        if (s == 1) {
            const auto rule = quad::gauss_legendre(req.n_nodes, -rho, rho);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                out.push_back({center + tangent.col(0) * rule.nodes[i], rule.weights[i]});
            }
        } else if (s == 2) {
            const int nr = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(req.n_nodes))));
            const auto rr = quad::gauss_legendre(nr, 0.0, rho);
            const auto ar = quad::periodic_trapezoid(2 * nr, 0.0, 2.0 * kPi);
            for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
                for (std::size_t j = 0; j < ar.nodes.size(); ++j) {
                    const Vec y = center + rr.nodes[i] * (std::cos(ar.nodes[j]) * tangent.col(0) +
                                                          std::sin(ar.nodes[j]) * tangent.col(1));
                    out.push_back({y, rr.nodes[i] * rr.weights[i] * ar.weights[j]});
                }
            }
        } else {
            std::mt19937_64 rng(req.seed);
            std::normal_distribution<double> normal;
            std::uniform_real_distribution<double> unif;
            const double weight = unit_ball_volume(s) * std::pow(rho, s) / req.n_nodes;
            for (int i = 0; i < req.n_nodes; ++i) {
                Vec g(s);
                for (int j = 0; j < s; ++j) g(j) = normal(rng);
                const double radius = rho * std::pow(unif(rng), 1.0 / s);
                out.push_back({center + tangent * (g.normalized() * radius), weight});
            }
        }
        return out;
    };
    w.compact = false;
    w.name = "linear";
    return w;
}

LevelSetW LevelSetW::half_line() {
    LevelSetW w;
    w.ambient_dim = 1;
    w.codim = 0;
    w.phi = [](const Vec&) -> Vec { return Vec(0); };
    w.phi_jacobian = [](const Vec&) -> Mat { return Mat(0, 1); };
    w.normal_framing = [](const Vec&) -> Mat { return Mat(1, 0); };
    w.fiber_sampler = [](const FiberRequest& req) {
        std::vector<FiberNode> out;
        const auto rule = quad::gauss_legendre(req.n_nodes, 0.0, req.radius);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) out.push_back({Vec::Constant(1, rule.nodes[i]), rule.weights[i]});
        return out;
    };
    w.compact = false;
    w.name = "half_line";
    return w;
}

LevelSetW LevelSetW::cross() {
    LevelSetW w;
    w.ambient_dim = 2;
    w.codim = 1;
    w.phi = [](const Vec& y) -> Vec { return Vec::Constant(1, y(0) * y(1)); };
    w.phi_jacobian = [](const Vec& y) -> Mat {
        Mat j(1, 2);
        j << y(1), y(0);
        return j;
    };
    w.normal_framing = [](const Vec& y) -> Mat {
        const bool on_x = y(1) == 0.0, on_y = y(0) == 0.0;
        if (on_x == on_y) return {};  // origin or off W
        Mat n = Mat::Zero(2, 1);
        n(on_x ? 1 : 0, 0) = 1.0;
        return n;
    };
    w.fiber_sampler = [](const FiberRequest& req) {
        std::vector<FiberNode> out;
        // n_nodes per axis; an odd count puts a node on the origin, where it is skipped.
        const auto rule = quad::gauss_legendre(req.n_nodes, -req.radius, req.radius);
        for (int axis = 0; axis < 2; ++axis) {
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                Vec y = Vec::Zero(2);
                y(axis) = rule.nodes[i];
                out.push_back({y, rule.weights[i]});
            }
        }
        return out;
    };
    w.compact = false;
    w.name = "cross";
    return w;
}

}  // namespace kacrice
