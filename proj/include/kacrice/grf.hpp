#pragma once

#include "kacrice/domain.hpp"
#include "kacrice/geomcore.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace kacrice::grf {

/// Smallest eigenvalue below which a covariance block counts as degenerate.
inline constexpr double kDegeneracyTol = 1e-12;

/// One basis function of a finite-rank field: direction * x^exponent.
struct Term {
    std::vector<int> exponent;  // one entry per ambient coordinate
    Vec direction;              // R^k
};

/// Finite-rank centered Gaussian random field X(x) = Σ_i c_i φ_i(x), c ~ N(0, coeff_cov).
class FieldModel {
public:
    FieldModel(Domain domain, std::vector<Term> terms, Mat coeff_cov, bool isotropic = false);

    [[nodiscard]] const Domain& domain() const { return domain_; }
    [[nodiscard]] int output_dim() const { return static_cast<int>(directions_.rows()); }
    [[nodiscard]] Eigen::Index size() const { return directions_.cols(); }
    [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
    [[nodiscard]] const Mat& coeff_cov() const { return coeff_cov_; }
    /// S with S S^T = coeff_cov (pivoted LDL^T with negative pivots clamped to zero).
    [[nodiscard]] const Mat& sampling_factor() const { return factor_; }
    [[nodiscard]] bool isotropic() const { return isotropic_; }

    /// Monomial values x^exponent for every term.
    [[nodiscard]] Vec monomials(const Vec& x) const;
    /// d/dx_j of every monomial; row j is the partial along ambient coordinate j.
    [[nodiscard]] Mat monomial_gradients(const Vec& x) const;

    /// k x N matrix whose column i is φ_i(x).
    [[nodiscard]] Mat basis_values(const Vec& x) const;
    /// (k * m) x N matrix: block i holds the derivative of the basis along tangent vector i of `frame`.
    [[nodiscard]] Mat basis_derivatives(const Vec& x, const Mat& frame) const;

    /// K(x, y) = E{X(x) X(y)^T}.
    [[nodiscard]] Mat kernel(const Vec& x, const Vec& y) const;

private:
    Domain domain_;
    std::vector<Term> terms_;
    Mat directions_;  // k x N
    Mat coeff_cov_;
    Mat factor_;
    bool isotropic_;
    int max_exponent_ = 0;
};

/// Covariance of the first jet (X(p), d_pX) in an orthonormal tangent frame.
/// Derivative blocks are ordered by tangent direction: rows [k*i, k*(i+1)) of K1 belong to ∂_i X.
struct JetCovariance {
    Mat K0;   // k x k
    Mat K01;  // k x (m k)
    Mat K1;   // (m k) x (m k)
    bool degenerate_value = false;
    bool degenerate_derivative = false;

    [[nodiscard]] Mat full() const;
};

/// Coefficient matrices A_0..A_d of an isotropic kernel K(t) = Σ A_l A_l^T t^l.
struct IsotropicModel {
    std::vector<Mat> coeff_mats;

    [[nodiscard]] int output_dim() const;
    [[nodiscard]] int degree() const { return static_cast<int>(coeff_mats.size()) - 1; }
    [[nodiscard]] Mat kernel(double t) const;
    [[nodiscard]] Mat kernel_derivative(double t) const;
    /// Σ_0 = K(1).
    [[nodiscard]] Mat sigma0() const { return kernel(1.0); }
    /// Σ_1 = K'(1).
    [[nodiscard]] Mat sigma1() const { return kernel_derivative(1.0); }
    void validate() const;
};

/// A single sample path; evaluation is deterministic given the coefficient draw.
class Realization {
public:
    Realization(std::shared_ptr<const FieldModel> model, Vec coeffs, std::uint64_t seed);

    [[nodiscard]] const FieldModel& model() const { return *model_; }
    [[nodiscard]] const std::shared_ptr<const FieldModel>& model_ptr() const { return model_; }
    [[nodiscard]] const Vec& coeffs() const { return coeffs_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    [[nodiscard]] Vec value(const Vec& x) const;
    /// k x ambient_dim matrix of partial derivatives.
    [[nodiscard]] Mat ambient_gradient(const Vec& x) const;
    /// d_xX in the domain's tangent frame at x (k x m).
    [[nodiscard]] Mat differential(const Vec& x) const;

private:
    std::shared_ptr<const FieldModel> model_;
    Vec coeffs_;
    Mat weighted_;  // directions * diag(coeffs)
    std::uint64_t seed_;
};

struct GaussianLaw {
    Vec mean;
    Mat covariance;
};

/// Restriction to S^m of k independent Kostlan polynomials of degree d.
[[nodiscard]] std::shared_ptr<const FieldModel> kostlan_model(int m, int d, int k = 1);
/// Independent Kostlan polynomials, component i of degree degrees[i].
[[nodiscard]] std::shared_ptr<const FieldModel> kostlan_system(int m, const std::vector<int>& degrees);
/// Mixed Kostlan field Σ_l A_l (ψ_l^1, ..., ψ_l^k)^T on S^m.
[[nodiscard]] std::shared_ptr<const FieldModel> isotropic_model(const IsotropicModel& iso, int m = 1);
/// Scalar-or-vector monomial field with an arbitrary coefficient covariance.
[[nodiscard]] std::shared_ptr<const FieldModel> custom_model(Domain domain, std::vector<Term> terms, Mat coeff_cov);

[[nodiscard]] JetCovariance jet_covariance(const FieldModel& model, const Vec& p);
[[nodiscard]] JetCovariance jet_covariance(const FieldModel& model, const Vec& p, const Mat& frame);

[[nodiscard]] Realization sample(const std::shared_ptr<const FieldModel>& model, std::uint64_t seed);

/// A(u, p) = K(u, p) K(p, p)^{-1}.
[[nodiscard]] Mat regression_matrix(const FieldModel& model, const Vec& u, const Vec& p);

/// Law of the vertical derivative made independent of X(p): covariance K1 - K01^T K0^{-1} K01.
[[nodiscard]] GaussianLaw nabla_derivative_law(const FieldModel& model, const Vec& p);
[[nodiscard]] GaussianLaw nabla_derivative_law(const FieldModel& model, const Vec& p, const Mat& frame);

/// Sampler for Z(u) = Y(u) + A(u, p) q, where Y(u) = X(u) - A(u, p) X(p).
class ConditionedField {
public:
    ConditionedField(std::shared_ptr<const FieldModel> model, Vec p, Vec q);

    [[nodiscard]] Realization sample(std::uint64_t seed) const;
    /// E{X(u) | X(p) = q}.
    [[nodiscard]] Vec mean(const Vec& u) const;
    /// Residual Y(u) of an unconditioned realization.
    [[nodiscard]] Vec residual(const Realization& r, const Vec& u) const;

    [[nodiscard]] const Vec& point() const { return p_; }
    [[nodiscard]] const Vec& value() const { return q_; }

private:
    std::shared_ptr<const FieldModel> model_;
    Vec p_, q_;
    Mat gain_;   // N x k: coeff_cov Φ(p)^T K(p,p)^{-1}
    Mat kpp_inv_;
};

[[nodiscard]] ConditionedField condition(std::shared_ptr<const FieldModel> model, const Vec& p, const Vec& q);

/// Smallest eigenvalue of a symmetric matrix (0 for empty matrices).
[[nodiscard]] double min_eigenvalue(const Mat& sym);

}  // namespace kacrice::grf
