#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace kacrice {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when an input lies outside the domain of an operation
/// (dimension mismatch, empty frame, violated precondition).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a numeric evaluation produced a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a covariance needed for conditioning or a Gaussian density is singular.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace geom {

/// Rank threshold relative to the largest singular value.
inline constexpr double kRankTol = 1e-10;
/// Maximum deviation of an orthonormal basis' Gram matrix from the identity.
inline constexpr double kOrthTol = 1e-12;

/// Ordered tuple of k vectors in R^n, stored as the columns of an n x k matrix.
class Frame {
public:
    Frame() = default;
    explicit Frame(Mat vectors);

    [[nodiscard]] Eigen::Index size() const { return vectors_.cols(); }
    [[nodiscard]] Eigen::Index ambient_dim() const { return vectors_.rows(); }
    [[nodiscard]] const Mat& vectors() const { return vectors_; }
    [[nodiscard]] Mat gram() const { return vectors_.transpose() * vectors_; }

    /// Concatenation (v w) of two frames in the same ambient space.
    [[nodiscard]] Frame joined(const Frame& other) const;

private:
    Mat vectors_;
};

/// Linear subspace stored through an orthonormal basis.
class Subspace {
public:
    /// Span of the given vectors; rank is decided at kRankTol.
    static Subspace span(const Mat& vectors);
    static Subspace span(const Frame& f) { return span(f.vectors()); }
    static Subspace zero(Eigen::Index ambient_dim);
    static Subspace whole(Eigen::Index ambient_dim);

    [[nodiscard]] Eigen::Index dim() const { return basis_.cols(); }
    [[nodiscard]] Eigen::Index ambient_dim() const { return basis_.rows(); }
    [[nodiscard]] const Mat& basis() const { return basis_; }
    [[nodiscard]] Frame frame() const { return Frame(basis_); }

    [[nodiscard]] Subspace orthogonal_complement() const;
    /// V ∩ W via singular-value thresholding of the stacked bases.
    [[nodiscard]] Subspace intersection(const Subspace& other) const;
    /// V ∩ other^⊥.
    [[nodiscard]] Subspace minus(const Subspace& other) const;
    [[nodiscard]] bool contains(const Subspace& other) const;

private:
    explicit Subspace(Mat basis) : basis_(std::move(basis)) {}
    Mat basis_;
};

/// Linear map between R^m (metric g1) and R^n (metric g2), given as an n x m matrix.
struct LinearMapMetric {
    Mat matrix;
    Mat domain_metric;
    Mat codomain_metric;

    static LinearMapMetric euclidean(Mat a);
};

/// sqrt(det <f^T, f>); zero when the vectors are dependent at kRankTol.
[[nodiscard]] double frame_volume(const Frame& f);

/// Angle sigma(V, W) in (0, 1]: product of the sines of the nontrivial principal angles.
[[nodiscard]] double principal_angle(const Subspace& v, const Subspace& w);

/// vol(Pi_{V^⊥} w) / vol(w) with w a basis of W ∩ (V ∩ W)^⊥. Requires W ⊄ V.
[[nodiscard]] double angle_via_projection(const Subspace& v, const Subspace& w);

/// Normal Jacobian of a linear map between metric vector spaces; 0 if rank is not maximal.
[[nodiscard]] double jacobian(const LinearMapMetric& map);

[[nodiscard]] Vec orthogonal_projection(const Subspace& v, const Vec& x);

/// Orthonormalize the columns of `vectors` by modified Gram-Schmidt with one
/// reorthogonalization pass, dropping columns whose residual norm falls below
/// kRankTol times the largest column norm.
[[nodiscard]] Mat orthonormalize(const Mat& vectors);

//------------------------------------------------------------------------------
// Area and coarea checkers
//------------------------------------------------------------------------------

struct FormulaCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    /// Set when the Jacobian vanishes on a sizeable fraction of quadrature nodes.
    bool flagged = false;
};

struct Map1D {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    double a = 0.0;
    double b = 1.0;
};

struct AreaOptions {
    int cells = 4096;
    double bisection_tol = 1e-12;
    int q_panels = 64;
};

/// lhs = ∫ g |f'| dx, rhs = ∫ Σ_{p ∈ f^{-1}(q)} g(p) dq with preimages found on a
/// uniform grid by sign-change bisection.
[[nodiscard]] FormulaCheck area_formula_check(const Map1D& f, const std::function<double(double)>& g,
                                              const AreaOptions& opts = {});

/// Parametrization of a planar region by a rectangle [u0,u1] x [v0,v1].
struct PlanarDomain {
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> map;
    std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> jacobian;
    double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;

    static PlanarDomain rectangle(double x0, double x1, double y0, double y1);
    static PlanarDomain annulus(double r0, double r1);
};

struct Map2D {
    std::function<double(const Eigen::Vector2d&)> value;
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> gradient;
};

struct CoareaOptions {
    int lhs_panels = 64;
    int seed_grid = 48;
    int q_panels = 24;
    double step = 2e-3;
};

/// lhs = ∫ g |∇f| over the domain, rhs = ∫ (∫_{f^{-1}(q)} g ds) dq where each level
/// set is traced by arc-length marching.
[[nodiscard]] FormulaCheck coarea_formula_check(const Map2D& f, const std::function<double(const Eigen::Vector2d&)>& g,
                                                const PlanarDomain& domain, const CoareaOptions& opts = {});

}  // namespace geom
}  // namespace kacrice
