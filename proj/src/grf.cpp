#include "kacrice/grf.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace kacrice::grf {

namespace {

double multinomial(int d, const std::vector<int>& alpha) {
    double out = 1.0;
    int remaining = d;
    for (int a : alpha) {
        // binomial(remaining, a)
        double b = 1.0;
        for (int i = 1; i <= a; ++i) b = b * (remaining - a + i) / i;
        out *= b;
        remaining -= a;
    }
    return out;
}

// All exponent vectors of total degree d in n variables, in lexicographic order.
std::vector<std::vector<int>> exponents_of_degree(int d, int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == n - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int a = left; a >= 0; --a) {
            cur[pos] = a;
            self(self, pos + 1, left - a);
        }
    };
    rec(rec, 0, d);
    return out;
}

void append_kostlan_terms(std::vector<Term>& terms, int n, int d, const Vec& direction) {
    for (const auto& alpha : exponents_of_degree(d, n)) {
        terms.push_back({alpha, std::sqrt(multinomial(d, alpha)) * direction});
    }
}

Domain sphere_domain(int m) {
    if (m == 1) return Domain::circle();
    if (m == 2) return Domain::sphere();
    throw DomainError("Kostlan fields are supported on S^1 and S^2 only (m = " + std::to_string(m) + ")");
}

Mat inverse_spd(const Mat& k, const char* what) {
    if (min_eigenvalue(k) <= kDegeneracyTol) {
        throw DegeneracyError(std::string(what) + ": covariance of X(p) is degenerate");
    }
    return k.llt().solve(Mat::Identity(k.rows(), k.cols()));
}

}  // namespace

double min_eigenvalue(const Mat& sym) {
    if (sym.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

FieldModel::FieldModel(Domain domain, std::vector<Term> terms, Mat coeff_cov, bool isotropic)
    : domain_(domain), terms_(std::move(terms)), coeff_cov_(std::move(coeff_cov)), isotropic_(isotropic) {
    if (terms_.empty()) throw DomainError("FieldModel: no basis functions");
    const Eigen::Index k = terms_.front().direction.size();
    const auto n = static_cast<std::size_t>(domain_.ambient_dim());
    directions_.resize(k, static_cast<Eigen::Index>(terms_.size()));
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].direction.size() != k) throw DomainError("FieldModel: basis directions have mixed output sizes");
        if (terms_[i].exponent.size() != n) throw DomainError("FieldModel: exponent length must equal the ambient dimension");
        for (int e : terms_[i].exponent) {
            if (e < 0) throw DomainError("FieldModel: negative exponent");
            max_exponent_ = std::max(max_exponent_, e);
        }
        directions_.col(static_cast<Eigen::Index>(i)) = terms_[i].direction;
    }
    const Eigen::Index nb = size();
    if (coeff_cov_.rows() != nb || coeff_cov_.cols() != nb) {
        throw DomainError("FieldModel: coefficient covariance must be " + std::to_string(nb) + " x " + std::to_string(nb));
    }
    if ((coeff_cov_ - coeff_cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, coeff_cov_.cwiseAbs().maxCoeff())) {
        throw DomainError("FieldModel: coefficient covariance is not symmetric");
    }
    if (coeff_cov_.isIdentity(0.0)) {
        factor_ = Mat::Identity(nb, nb);
    } else {
        Eigen::LDLT<Mat> ldlt(coeff_cov_);
        const Vec d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
        const Mat l = ldlt.matrixL();
        factor_ = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
    }
}

Vec FieldModel::monomials(const Vec& x) const {
    const Eigen::Index n = x.size();
    Mat powers(n, max_exponent_ + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        powers(j, 0) = 1.0;
        for (int e = 1; e <= max_exponent_; ++e) powers(j, e) = powers(j, e - 1) * x(j);
    }
    Vec out(size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        double v = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) v *= powers(j, terms_[i].exponent[j]);
        out(static_cast<Eigen::Index>(i)) = v;
    }
    return out;
}

Mat FieldModel::monomial_gradients(const Vec& x) const {
    const Eigen::Index n = x.size();
    Mat powers(n, max_exponent_ + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        powers(j, 0) = 1.0;
        for (int e = 1; e <= max_exponent_; ++e) powers(j, e) = powers(j, e - 1) * x(j);
    }
    Mat out(n, size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& ex = terms_[i].exponent;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ex[j] == 0) {
                out(j, static_cast<Eigen::Index>(i)) = 0.0;
                continue;
            }
            double v = ex[j] * powers(j, ex[j] - 1);
            for (Eigen::Index l = 0; l < n; ++l) {
                if (l != j) v *= powers(l, ex[l]);
            }
            out(j, static_cast<Eigen::Index>(i)) = v;
        }
    }
    return out;
}

Mat FieldModel::basis_values(const Vec& x) const {
    if (x.size() != domain_.ambient_dim()) throw DomainError("FieldModel: point has wrong dimension");
    return directions_ * monomials(x).asDiagonal();
}

Mat FieldModel::basis_derivatives(const Vec& x, const Mat& frame) const {
    if (x.size() != domain_.ambient_dim()) throw DomainError("FieldModel: point has wrong dimension");
    const Mat grads = monomial_gradients(x);  // n x N
    const Mat tangential = frame.transpose() * grads;  // m x N
    const Eigen::Index k = output_dim(), m = frame.cols();
    Mat out(k * m, size());
    for (Eigen::Index i = 0; i < m; ++i) {
        out.middleRows(i * k, k) = directions_ * tangential.row(i).asDiagonal();
    }
    return out;
}

Mat FieldModel::kernel(const Vec& x, const Vec& y) const {
    return basis_values(x) * coeff_cov_ * basis_values(y).transpose();
}

Mat JetCovariance::full() const {
    const Eigen::Index k = K0.rows(), mk = K1.rows();
    Mat out(k + mk, k + mk);
    out.topLeftCorner(k, k) = K0;
    out.topRightCorner(k, mk) = K01;
    out.bottomLeftCorner(mk, k) = K01.transpose();
    out.bottomRightCorner(mk, mk) = K1;
    return out;
}

int IsotropicModel::output_dim() const {
    return coeff_mats.empty() ? 0 : static_cast<int>(coeff_mats.front().rows());
}

void IsotropicModel::validate() const {
    if (coeff_mats.empty()) throw DomainError("IsotropicModel: no coefficient matrices");
    const auto k = coeff_mats.front().rows();
    for (const auto& a : coeff_mats) {
        if (a.rows() != k || a.cols() != k) {
            throw DomainError("IsotropicModel: every coefficient matrix must be " + std::to_string(k) + " x " +
                              std::to_string(k));
        }
    }
}

Mat IsotropicModel::kernel(double t) const {
    validate();
    Mat out = Mat::Zero(output_dim(), output_dim());
    double tp = 1.0;
    for (const auto& a : coeff_mats) {
        out += a * a.transpose() * tp;
        tp *= t;
    }
    return out;
}

Mat IsotropicModel::kernel_derivative(double t) const {
    validate();
    Mat out = Mat::Zero(output_dim(), output_dim());
    double tp = 1.0;
    for (std::size_t l = 1; l < coeff_mats.size(); ++l) {
        out += static_cast<double>(l) * coeff_mats[l] * coeff_mats[l].transpose() * tp;
        tp *= t;
    }
    return out;
}

Realization::Realization(std::shared_ptr<const FieldModel> model, Vec coeffs, std::uint64_t seed)
    : model_(std::move(model)), coeffs_(std::move(coeffs)), seed_(seed) {
    if (coeffs_.size() != model_->size()) throw DomainError("Realization: coefficient vector has wrong size");
    weighted_ = Mat(model_->output_dim(), model_->size());
    for (std::size_t i = 0; i < model_->terms().size(); ++i) {
        weighted_.col(static_cast<Eigen::Index>(i)) = coeffs_(static_cast<Eigen::Index>(i)) * model_->terms()[i].direction;
    }
}

Vec Realization::value(const Vec& x) const { return weighted_ * model_->monomials(x); }

Mat Realization::ambient_gradient(const Vec& x) const {
    return weighted_ * model_->monomial_gradients(x).transpose();
}

Mat Realization::differential(const Vec& x) const {
    return ambient_gradient(x) * model_->domain().tangent_frame(x);
}

std::shared_ptr<const FieldModel> kostlan_model(int m, int d, int k) {
    if (d < 0) throw DomainError("kostlan_model: degree must be nonnegative");
    if (k < 1) throw DomainError("kostlan_model: output dimension must be positive");
    return kostlan_system(m, std::vector<int>(static_cast<std::size_t>(k), d));
}

std::shared_ptr<const FieldModel> kostlan_system(int m, const std::vector<int>& degrees) {
    const Domain dom = sphere_domain(m);
    if (degrees.empty()) throw DomainError("kostlan_system: no components");
    const auto k = static_cast<Eigen::Index>(degrees.size());
    std::vector<Term> terms;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (degrees[i] < 0) throw DomainError("kostlan_system: degree must be nonnegative");
        append_kostlan_terms(terms, m + 1, degrees[i], Vec::Unit(k, i));
    }
    const auto n = static_cast<Eigen::Index>(terms.size());
    return std::make_shared<FieldModel>(dom, std::move(terms), Mat::Identity(n, n), true);
}

std::shared_ptr<const FieldModel> isotropic_model(const IsotropicModel& iso, int m) {
    iso.validate();
    const Domain dom = sphere_domain(m);
    std::vector<Term> terms;
    for (std::size_t l = 0; l < iso.coeff_mats.size(); ++l) {
        const Mat& a = iso.coeff_mats[l];
        for (Eigen::Index i = 0; i < a.cols(); ++i) {
            if (a.col(i).isZero(0.0)) continue;
            append_kostlan_terms(terms, m + 1, static_cast<int>(l), a.col(i));
        }
    }
    if (terms.empty()) throw DomainError("isotropic_model: all coefficient matrices vanish");
    const auto n = static_cast<Eigen::Index>(terms.size());
    return std::make_shared<FieldModel>(dom, std::move(terms), Mat::Identity(n, n), true);
}

std::shared_ptr<const FieldModel> custom_model(Domain domain, std::vector<Term> terms, Mat coeff_cov) {
    return std::make_shared<FieldModel>(domain, std::move(terms), std::move(coeff_cov), false);
}

JetCovariance jet_covariance(const FieldModel& model, const Vec& p) {
    return jet_covariance(model, p, model.domain().tangent_frame(p));
}

JetCovariance jet_covariance(const FieldModel& model, const Vec& p, const Mat& frame) {
    const Eigen::Index k = model.output_dim(), mk = k * frame.cols();
    Mat j(k + mk, model.size());
    j.topRows(k) = model.basis_values(p);
    if (mk > 0) j.bottomRows(mk) = model.basis_derivatives(p, frame);
    const Mat full = j * model.coeff_cov() * j.transpose();
    JetCovariance out;
    out.K0 = full.topLeftCorner(k, k);
    out.K01 = full.topRightCorner(k, mk);
    out.K1 = full.bottomRightCorner(mk, mk);
    out.degenerate_value = min_eigenvalue(out.K0) <= kDegeneracyTol;
    out.degenerate_derivative = mk > 0 && min_eigenvalue(out.K1) <= kDegeneracyTol;
    return out;
}

Realization sample(const std::shared_ptr<const FieldModel>& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vec z(model->size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return Realization(model, model->sampling_factor() * z, seed);
}

Mat regression_matrix(const FieldModel& model, const Vec& u, const Vec& p) {
    const Mat kpp_inv = inverse_spd(model.kernel(p, p), "regression_matrix");
    return model.kernel(u, p) * kpp_inv;
}

GaussianLaw nabla_derivative_law(const FieldModel& model, const Vec& p) {
    return nabla_derivative_law(model, p, model.domain().tangent_frame(p));
}

GaussianLaw nabla_derivative_law(const FieldModel& model, const Vec& p, const Mat& frame) {
    const JetCovariance jet = jet_covariance(model, p, frame);
    if (jet.degenerate_value) throw DegeneracyError("nabla_derivative_law: covariance of X(p) is degenerate");
    GaussianLaw law;
    law.mean = Vec::Zero(jet.K1.rows());
    if (model.isotropic()) {
        law.covariance = jet.K1;
    } else {
        const Mat k0_inv = inverse_spd(jet.K0, "nabla_derivative_law");
        law.covariance = jet.K1 - jet.K01.transpose() * k0_inv * jet.K01;
        law.covariance = 0.5 * (law.covariance + law.covariance.transpose());
    }
    return law;
}

ConditionedField::ConditionedField(std::shared_ptr<const FieldModel> model, Vec p, Vec q)
    : model_(std::move(model)), p_(std::move(p)), q_(std::move(q)) {
    if (q_.size() != model_->output_dim()) throw DomainError("condition: value has wrong dimension");
    const Mat phi_p = model_->basis_values(p_);
    kpp_inv_ = inverse_spd(phi_p * model_->coeff_cov() * phi_p.transpose(), "condition");
    gain_ = model_->coeff_cov() * phi_p.transpose() * kpp_inv_;
}

Realization ConditionedField::sample(std::uint64_t seed) const {
    const Realization free = grf::sample(model_, seed);
    const Vec residual_at_p = q_ - model_->basis_values(p_) * free.coeffs();
    return Realization(model_, free.coeffs() + gain_ * residual_at_p, seed);
}

Vec ConditionedField::mean(const Vec& u) const { return model_->kernel(u, p_) * kpp_inv_ * q_; }

Vec ConditionedField::residual(const Realization& r, const Vec& u) const {
    return r.value(u) - model_->kernel(u, p_) * kpp_inv_ * r.value(p_);
}

ConditionedField condition(std::shared_ptr<const FieldModel> model, const Vec& p, const Vec& q) {
    return ConditionedField(std::move(model), p, q);
}

}  // namespace kacrice::grf
