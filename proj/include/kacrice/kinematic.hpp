#pragma once

#include "kacrice/estimate.hpp"
#include "kacrice/geomcore.hpp"

#include <functional>

namespace kacrice {

/// Regular C^1 closed or open curve t ∈ [t0, t1] on the unit sphere S^2.
struct SphereCurve {
    std::function<Eigen::Vector3d(double)> point;
    std::function<Eigen::Vector3d(double)> velocity;
    double t0 = 0.0;
    double t1 = 1.0;

    /// Unit-speed great circle orthogonal to `normal`.
    static SphereCurve great_circle(const Eigen::Vector3d& normal);
    /// Circle of points at polar angle rho from the north pole.
    static SphereCurve latitude(double rho);

    /// Length computed by Gauss-Legendre quadrature of the speed.
    [[nodiscard]] double length(int nodes = 256) const;
};

struct KinematicOptions {
    int nodes1 = 48;     // Gauss-Legendre nodes on curve 1
    int nodes2 = 48;     // Gauss-Legendre nodes on curve 2
    int n_angles = 128;  // trapezoid nodes for the average over the isotropy group SO(2)
};

/// (1 / vol G) ∫_M ∫_W σ̄_K(T_xM^⊥, T_yW^⊥) dM dW for G = SO(3) acting on S^2 with
/// probability-normalized Haar measure, so the value is the mean of #(gM ∩ W).
/// std_error is the change when every rule is halved.
[[nodiscard]] Estimate kinematic_rhs_sphere(const SphereCurve& c1, const SphereCurve& c2,
                                            const KinematicOptions& opts = {});

}  // namespace kacrice
