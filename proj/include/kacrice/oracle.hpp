#pragma once

#include "kacrice/estimate.hpp"
#include "kacrice/grf.hpp"
#include "kacrice/kinematic.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace kacrice::oracle {

/// Exact count of the roots found on one realization.
struct CountSample {
    long long count = 0;
    std::uint64_t seed = 0;
    long long n_bisection_steps = 0;
    double min_separation = 0.0;  // smallest distance between two roots (infinity if fewer than two)
    bool flagged = false;
    std::string reason;
};

struct CircleGrid {
    int grid_n = 512;
    double tol = 1e-12;
};

/// Zeros of a scalar realization on S^1 by grid sign changes and bisection.
[[nodiscard]] CountSample count_zeros_circle(const grf::Realization& r, const CircleGrid& grid = {});
[[nodiscard]] CountSample count_zeros_circle(const std::function<double(double)>& f, const CircleGrid& grid = {});

/// Σ sign(f'(θ)) over the zeros; exactly 0 for a transverse field on S^1.
[[nodiscard]] CountSample count_signed_zeros_circle(const grf::Realization& r, const CircleGrid& grid = {});

struct SphereGrid {
    int grid_n = 16;          // cells per cube-face edge
    int max_iter = 60;
    double tol = 1e-12;
    double dedup_radius = 1e-6;
};

/// A map S^2 -> R^2 with its 2 x 3 ambient Jacobian.
struct SphereMap {
    std::function<Eigen::Vector2d(const Eigen::Vector3d&)> value;
    std::function<Eigen::Matrix<double, 2, 3>(const Eigen::Vector3d&)> jacobian;
};

/// Projective count (sphere count / 2) of the common zeros of two scalar fields on S^2.
[[nodiscard]] CountSample count_common_zeros_sphere(const SphereMap& f, const SphereGrid& grid = {});
[[nodiscard]] CountSample count_common_zeros_sphere(const grf::Realization& r1, const grf::Realization& r2,
                                                    const SphereGrid& grid = {});
/// Same for a single realization with two components.
[[nodiscard]] CountSample count_common_zeros_sphere(const grf::Realization& r, const SphereGrid& grid = {});

using CountOp = std::function<CountSample(const grf::Realization&)>;

/// Mean and standard error of exact per-realization counts over n_samples draws.
[[nodiscard]] Estimate mc_expected_count(const std::shared_ptr<const grf::FieldModel>& model, const CountOp& op,
                                         int n_samples, std::uint64_t seed);

struct KinematicMcOptions {
    int n_rotations = 1000;
    double max_segment = 9e-4;
};

/// Mean of #(g c1 ∩ c2) over Haar-uniform rotations g ∈ SO(3).
[[nodiscard]] Estimate kinematic_mc(const SphereCurve& c1, const SphereCurve& c2, const KinematicMcOptions& opts,
                                    std::uint64_t seed);

/// Uniform rotation from a uniform unit quaternion.
[[nodiscard]] Eigen::Matrix3d random_rotation(std::uint64_t seed);

}  // namespace kacrice::oracle
