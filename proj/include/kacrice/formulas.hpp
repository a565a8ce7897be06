#pragma once

#include "kacrice/domain.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/grf.hpp"
#include "kacrice/levelset.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace kacrice {

/// What a weight function sees: the point, the value y = X(p) ∈ W, the
/// differential D = d_pX (k x m) and the normal framing ν(y) (k x codim).
struct JetSample {
    const Vec& p;
    const Vec& y;
    const Mat& differential;
    const Mat& normal;
};

struct WeightFn {
    std::function<double(const JetSample&)> eval;
    bool bounded = true;
    std::string name;

    /// α ≡ 1.
    static WeightFn unit();
    /// sign det(ν^T D); 0 when the determinant vanishes.
    static WeightFn orientation_sign();
};

/// Monte Carlo and cubature sizes of the nested estimator.
struct MonteCarlo {
    int n_samples = 2000;    // inner samples per fiber node (rounded up to antithetic pairs)
    int fiber_nodes = 64;    // cubature nodes on W
    std::uint64_t seed = 1;
    double radius = 0.0;     // truncation radius for non-compact W; 0 selects it automatically
};

/// Kac-Rice density of E#{X ∈ W} at p, in the tangent frame of the domain at p
/// (or in `frame` when given; a k x 0 frame evaluates P{X(p) ∈ W}).
[[nodiscard]] Estimate density_point(const grf::FieldModel& model, const LevelSetW& w, const Vec& p, const MonteCarlo& mc,
                                     const WeightFn& weight = WeightFn::unit());
[[nodiscard]] Estimate density_point(const grf::FieldModel& model, const LevelSetW& w, const Vec& p, const Mat& frame,
                                     const MonteCarlo& mc, const WeightFn& weight = WeightFn::unit());

/// ∫_region δ_{X∈W}. Zero-dimensional regions return Σ_p P{X(p) ∈ W}.
[[nodiscard]] Estimate expected_count(const grf::FieldModel& model, const LevelSetW& w, const Region& region,
                                      const MonteCarlo& mc, const WeightFn& weight = WeightFn::unit());

/// Truncation radius for non-compact W: the Gaussian-weighted volume of W stops growing
/// by more than 1e-4 of itself. Second member is false when it never settles.
[[nodiscard]] std::pair<double, bool> truncation_radius(const LevelSetW& w, const Mat& k0, int fiber_nodes,
                                                        std::uint64_t seed);

/// E#{X ∈ W} on S^m for an isotropic field with Σ0, Σ1, by cubature on W.
/// std_error is the change between n and 2n fiber nodes.
[[nodiscard]] Estimate isotropic_sphere_count(const Mat& sigma0, const Mat& sigma1, const LevelSetW& w, int m,
                                              int fiber_nodes = 128, std::uint64_t seed = 1);
[[nodiscard]] Estimate isotropic_sphere_count(const grf::IsotropicModel& iso, const LevelSetW& w, int m,
                                              int fiber_nodes = 128, std::uint64_t seed = 1);

/// 2 sqrt(det Σ1 / det Σ0) exp(-y^T Σ0^{-1} y / 2).
[[nodiscard]] double isotropic_point_count(const Mat& sigma0, const Mat& sigma1, const Vec& y);

/// Expected number of projective solutions of independent Kostlan equations: sqrt(Π d_i).
[[nodiscard]] double shub_smale(const std::vector<int>& degrees);

/// 2 sqrt(det Σ1 / det Σ0) with Σ0 = Σ A_l A_l^T and Σ1 = Σ l A_l A_l^T.
[[nodiscard]] double mixed_kostlan_count(const std::vector<Mat>& coeff_mats);

/// (vol(S^m) vol(B^m) m!, 2 (2π)^m).
[[nodiscard]] std::pair<double, double> gamma_identity_check(int m);

struct SubGaussianFit {
    double epsilon = 0.0;
    std::vector<double> radii;
    std::vector<double> volumes;
};

/// Slope of log Vol(W ∩ B_R) against R^2 over the largest half of `radii` (at least 3).
[[nodiscard]] SubGaussianFit subgaussian_diagnostic(const LevelSetW& w, const std::vector<double>& radii,
                                                    int n_nodes = 4096, std::uint64_t seed = 1);

}  // namespace kacrice
