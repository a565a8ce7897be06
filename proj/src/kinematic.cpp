#include "kacrice/kinematic.hpp"
#include "kacrice/domain.hpp"
#include "kacrice/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace kacrice {

namespace {

constexpr double kPi = std::numbers::pi;

struct CurveNode {
    Eigen::Vector2d normal;  // unit normal line of the curve, pulled back to T_{e3} S^2
    double weight;           // quadrature weight times speed
};

std::vector<CurveNode> pulled_back_normals(const SphereCurve& c, int n) {
    const Domain sphere = Domain::sphere();
    const auto rule = quad::gauss_legendre(n, c.t0, c.t1);
    std::vector<CurveNode> out;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const Eigen::Vector3d x = c.point(rule.nodes[i]);
        const Eigen::Vector3d v = c.velocity(rule.nodes[i]);
        const double speed = v.norm();
        if (!(speed > 1e-12) || !x.allFinite()) throw DomainError("kinematic_rhs_sphere: degenerate curve parametrization");
        // g_x = (e1, e2, x) is a rotation with g_x e3 = x; g_x^T maps T_x S^2 onto T_{e3} S^2.
        const Mat frame = sphere.tangent_frame(Vec(x));
        const Eigen::Vector3d normal = x.cross(v) / speed;
        Eigen::Vector2d pulled(frame.col(0).dot(normal), frame.col(1).dot(normal));
        out.push_back({pulled.normalized(), rule.weights[i] * speed});
    }
    return out;
}

double double_integral(const SphereCurve& c1, const SphereCurve& c2, const KinematicOptions& opts) {
    const auto n1 = pulled_back_normals(c1, opts.nodes1);
    const auto n2 = pulled_back_normals(c2, opts.nodes2);
    // Rotations of the isotropy group K = SO(2) of e3, offset to avoid aligning nodes with kinks of |sin|.
    const auto angles = quad::periodic_trapezoid(opts.n_angles, 0.5 * kPi / opts.n_angles + 0.1234, 2.0 * kPi);
    double total = 0.0;
    for (const auto& a : n1) {
        const geom::Subspace va = geom::Subspace::span(Mat(a.normal));
        for (const auto& b : n2) {
            double avg = 0.0;
            for (std::size_t j = 0; j < angles.nodes.size(); ++j) {
                const Eigen::Rotation2Dd rot(angles.nodes[j]);
                const Mat rotated = rot * b.normal;
                avg += angles.weights[j] * geom::principal_angle(va, geom::Subspace::span(rotated));
            }
            total += a.weight * b.weight * avg / (2.0 * kPi);
        }
    }
    return total / (4.0 * kPi);
}

}  // namespace

SphereCurve SphereCurve::great_circle(const Eigen::Vector3d& normal) {
    const Eigen::Vector3d n = normal.normalized();
    const Eigen::Vector3d seed = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d u = (seed - seed.dot(n) * n).normalized();
    const Eigen::Vector3d w = n.cross(u);
    SphereCurve c;
    c.point = [u, w](double t) -> Eigen::Vector3d { return std::cos(t) * u + std::sin(t) * w; };
    c.velocity = [u, w](double t) -> Eigen::Vector3d { return -std::sin(t) * u + std::cos(t) * w; };
    c.t0 = 0.0;
    c.t1 = 2.0 * kPi;
    return c;
}

SphereCurve SphereCurve::latitude(double rho) {
    if (!(rho > 0.0 && rho < kPi)) throw DomainError("SphereCurve::latitude: polar radius must lie in (0, pi)");
    const double s = std::sin(rho), z = std::cos(rho);
    SphereCurve c;
    c.point = [s, z](double t) -> Eigen::Vector3d { return {s * std::cos(t), s * std::sin(t), z}; };
    c.velocity = [s](double t) -> Eigen::Vector3d { return {-s * std::sin(t), s * std::cos(t), 0.0}; };
    c.t0 = 0.0;
    c.t1 = 2.0 * kPi;
    return c;
}

double SphereCurve::length(int nodes) const {
    const auto rule = quad::gauss_legendre(nodes, t0, t1);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) total += rule.weights[i] * velocity(rule.nodes[i]).norm();
    return total;
}

Estimate kinematic_rhs_sphere(const SphereCurve& c1, const SphereCurve& c2, const KinematicOptions& opts) {
    if (opts.nodes1 < 2 || opts.nodes2 < 2 || opts.n_angles < 4) throw DomainError("kinematic_rhs_sphere: rules too small");
    const double fine = double_integral(c1, c2, opts);
    const KinematicOptions half{std::max(2, opts.nodes1 / 2), std::max(2, opts.nodes2 / 2), std::max(4, opts.n_angles / 2)};
    const double coarse = double_integral(c1, c2, half);
    Estimate e;
    e.value = fine;
    e.std_error = std::abs(fine - coarse);
    e.n = static_cast<long long>(opts.nodes1) * opts.nodes2 * opts.n_angles;
    e.method = "kinematic_integral";
    return e;
}

}  // namespace kacrice
