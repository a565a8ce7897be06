#include "kacrice/formulas.hpp"
#include "kacrice/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace kacrice {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTailFraction = 1e-4;
constexpr int kMaxRadiusSteps = 12;

struct GaussianFactor {
    Mat inverse;
    double log_norm = 0.0;  // log((2π)^{k/2} sqrt(det K0))

    explicit GaussianFactor(const Mat& k0) {
        Eigen::LLT<Mat> llt(k0);
        if (llt.info() != Eigen::Success || grf::min_eigenvalue(k0) <= grf::kDegeneracyTol) {
            throw DegeneracyError("covariance of X(p) is degenerate");
        }
        inverse = llt.solve(Mat::Identity(k0.rows(), k0.cols()));
        const Mat l = llt.matrixL();
        log_norm = 0.5 * static_cast<double>(k0.rows()) * std::log(kTwoPi) + l.diagonal().array().log().sum();
    }

    [[nodiscard]] double density(const Vec& y) const {
        return std::exp(-0.5 * y.dot(inverse * y) - log_norm);
    }
};

Mat psd_factor(const Mat& cov) {
    if (cov.size() == 0) return cov;
    Eigen::LDLT<Mat> ldlt(cov);
    const Vec d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    const Mat l = ldlt.matrixL();
    return ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
}

// |det(ν^T D)| for square ν^T D, the normal Jacobian sqrt(det(A A^T)) when the
// codimension is smaller than dim M, and 0 when it is larger.
double normal_jacobian(const Mat& a) {
    if (a.rows() == 0) return 1.0;
    if (a.rows() == a.cols()) return std::abs(a.determinant());
    if (a.rows() > a.cols()) return 0.0;
    return std::sqrt(std::max(0.0, (a * a.transpose()).determinant()));
}

std::vector<FiberNode> fiber_nodes_for(const LevelSetW& w, const Mat& k0, const MonteCarlo& mc, bool& diverged) {
    if (w.is_point) return w.fiber_sampler(FiberRequest{0.0, 1, mc.seed});
    if (!w.fiber_sampler) throw DomainError("density_point: W has no fiber sampler");
    FiberRequest req{mc.radius, mc.fiber_nodes, mc.seed};
    if (!w.compact && req.radius <= 0.0) {
        const auto [r, settled] = truncation_radius(w, k0, mc.fiber_nodes, mc.seed);
        req.radius = r;
        diverged = !settled;
    }
    return w.fiber_sampler(req);
}

struct Accumulator {
    double value = 0.0;
    double variance = 0.0;
    long long n = 0;
    bool diverged = false;
};

Accumulator density_impl(const grf::FieldModel& model, const LevelSetW& w, const Vec& p, const Mat& frame,
                         const MonteCarlo& mc, const WeightFn& weight) {
    const int k = model.output_dim();
    if (w.ambient_dim != k) {
        throw DomainError("density_point: W lives in R^" + std::to_string(w.ambient_dim) + " but the field has " +
                          std::to_string(k) + " components");
    }
    const grf::JetCovariance jet = grf::jet_covariance(model, p, frame);
    if (jet.degenerate_value) throw DegeneracyError("density_point: covariance of X(p) is degenerate");
    const GaussianFactor gauss(jet.K0);
    const auto dim_m = static_cast<int>(frame.cols());
    const Eigen::Index mk = static_cast<Eigen::Index>(k) * dim_m;

    Mat lambda_factor(mk, mk), regression(mk, k);
    if (mk > 0) {
        const grf::GaussianLaw law = grf::nabla_derivative_law(model, p, frame);
        lambda_factor = psd_factor(law.covariance);
        regression = model.isotropic() ? Mat::Zero(mk, k) : Mat(jet.K01.transpose() * gauss.inverse);
    }

    Accumulator acc;
    const std::vector<FiberNode> nodes = fiber_nodes_for(w, jet.K0, mc, acc.diverged);
    const int pairs = std::max(2, (mc.n_samples + 1) / 2);
    Mat d(k, dim_m);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const Vec& y = nodes[j].y;
        const Mat nu = w.normal_framing(y);
        if (nu.rows() != k || nu.cols() != w.codim || !nu.allFinite()) continue;  // no framing: null stratum
        const double outer = nodes[j].weight * gauss.density(y);
        if (outer == 0.0) continue;
        const Vec mean = mk > 0 ? Vec(regression * y) : Vec(0);
        std::mt19937_64 rng(derive_seed(mc.seed, j));
        std::normal_distribution<double> normal;
        Vec z(mk);
        double sum = 0.0, sum_sq = 0.0;
        for (int s = 0; s < pairs; ++s) {
            for (Eigen::Index i = 0; i < mk; ++i) z(i) = normal(rng);
            const Vec xi = lambda_factor * z;
            double pair_value = 0.0;
            for (double sgn : {1.0, -1.0}) {
                const Vec flat = mean + sgn * xi;
                for (int c = 0; c < dim_m; ++c) d.col(c) = flat.segment(static_cast<Eigen::Index>(c) * k, k);
                const double jac = normal_jacobian(nu.transpose() * d);
                const double alpha = weight.eval(JetSample{p, y, d, nu});
                pair_value += 0.5 * alpha * jac;
            }
            sum += pair_value;
            sum_sq += pair_value * pair_value;
        }
        const double inner_mean = sum / pairs;
        const double inner_var = std::max(0.0, (sum_sq - pairs * inner_mean * inner_mean) / (pairs - 1));
        acc.value += outer * inner_mean;
        acc.variance += outer * outer * inner_var / pairs;
        acc.n += 2LL * pairs;
    }
    return acc;
}

}  // namespace

WeightFn WeightFn::unit() {
    return {[](const JetSample&) { return 1.0; }, true, "unit"};
}

WeightFn WeightFn::orientation_sign() {
    return {[](const JetSample& s) {
                const Mat a = s.normal.transpose() * s.differential;
                if (a.rows() != a.cols()) throw DomainError("orientation_sign: codim(W) must equal dim M");
                const double det = a.rows() == 0 ? 1.0 : a.determinant();
                return det > 0.0 ? 1.0 : (det < 0.0 ? -1.0 : 0.0);
            },
            true, "orientation_sign"};
}

Estimate density_point(const grf::FieldModel& model, const LevelSetW& w, const Vec& p, const MonteCarlo& mc,
                       const WeightFn& weight) {
    return density_point(model, w, p, model.domain().tangent_frame(p), mc, weight);
}

Estimate density_point(const grf::FieldModel& model, const LevelSetW& w, const Vec& p, const Mat& frame,
                       const MonteCarlo& mc, const WeightFn& weight) {
    const Accumulator acc = density_impl(model, w, p, frame, mc, weight);
    Estimate e;
    e.value = acc.value;
    e.std_error = std::sqrt(acc.variance);
    e.n = acc.n;
    e.seed = mc.seed;
    e.method = "kac_rice_density";
    e.diverged = acc.diverged;
    e.flagged = acc.diverged;
    return e;
}

Estimate expected_count(const grf::FieldModel& model, const LevelSetW& w, const Region& region, const MonteCarlo& mc,
                        const WeightFn& weight) {
    const int dom_dim = model.domain().dim();
    if (region.dim != 0 && region.dim != dom_dim) throw DomainError("expected_count: region dimension does not match the domain");
    if (region.nodes.size() != region.weights.size()) throw DomainError("expected_count: region nodes and weights differ in length");
    const auto results = parallel_map<Accumulator>(region.nodes.size(), [&](std::size_t i) {
        MonteCarlo node_mc = mc;
        node_mc.seed = derive_seed(mc.seed, i);
        const Vec& p = region.nodes[i];
        const Mat frame = region.dim == 0 ? Mat(model.domain().ambient_dim(), 0) : model.domain().tangent_frame(p);
        return density_impl(model, w, p, frame, node_mc, weight);
    });
    Estimate e;
    double variance = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        e.value += region.weights[i] * results[i].value;
        variance += region.weights[i] * region.weights[i] * results[i].variance;
        e.n += results[i].n;
        e.diverged = e.diverged || results[i].diverged;
    }
    e.std_error = std::sqrt(variance);
    e.seed = mc.seed;
    e.method = "kac_rice_integral";
    e.flagged = e.diverged;
    return e;
}

std::pair<double, double> gamma_identity_check(int m) {
    if (m < 1) throw DomainError("gamma_identity_check: m must be at least 1");
    const double pi = std::numbers::pi;
    const double sphere = 2.0 * std::pow(pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
    const double ball = std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
    const double lhs = sphere * ball * std::tgamma(m + 1.0);
    return {lhs, 2.0 * std::pow(kTwoPi, m)};
}

std::pair<double, bool> truncation_radius(const LevelSetW& w, const Mat& k0, int fiber_nodes, std::uint64_t seed) {
    const GaussianFactor gauss(k0);
    const double scale = std::sqrt(Eigen::SelfAdjointEigenSolver<Mat>(k0, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff());
    auto mass = [&](double r) {
        double total = 0.0;
        for (const auto& node : w.fiber_sampler(FiberRequest{r, fiber_nodes, seed})) total += node.weight * gauss.density(node.y);
        return total;
    };
    double r = 4.0 * scale;
    double prev = mass(r);
    for (int step = 0; step < kMaxRadiusSteps; ++step) {
        const double next_r = r + 2.0 * scale;
        const double next = mass(next_r);
        if (!std::isfinite(next)) return {r, false};
        if (std::abs(next - prev) <= kTailFraction * std::abs(next) || (next == 0.0 && prev == 0.0)) return {next_r, true};
        r = next_r;
        prev = next;
    }
    return {r, false};
}

double isotropic_point_count(const Mat& sigma0, const Mat& sigma1, const Vec& y) {
    if (sigma0.rows() != sigma0.cols() || sigma1.rows() != sigma0.rows() || sigma1.cols() != sigma0.cols() ||
        y.size() != sigma0.rows()) {
        throw DomainError("isotropic_point_count: Σ0, Σ1 and y must have matching dimensions");
    }
    Eigen::LLT<Mat> llt(sigma0);
    if (llt.info() != Eigen::Success || grf::min_eigenvalue(sigma0) <= 0.0) {
        throw DomainError("isotropic_point_count: Σ0 is not positive definite");
    }
    const double ratio = sigma1.determinant() / sigma0.determinant();
    return 2.0 * std::sqrt(std::max(ratio, 0.0)) * std::exp(-0.5 * y.dot(llt.solve(y)));
}

namespace {

double isotropic_cubature(const Mat& sigma1, const GaussianFactor& g, const LevelSetW& w, int m, const FiberRequest& req) {
    const double fiber_norm = std::pow(kTwoPi, 0.5 * m);  // (2π)^{(k-m)/2} = (2π)^{k/2} / (2π)^{m/2}
    double total = 0.0;
    for (const auto& node : w.fiber_sampler(req)) {
        const Mat nu = w.normal_framing(node.y);
        if (nu.rows() != w.ambient_dim || nu.cols() != w.codim || !nu.allFinite()) continue;
        const double det = (nu.transpose() * sigma1 * nu).determinant();
        total += node.weight * std::sqrt(std::max(det, 0.0)) * g.density(node.y) * fiber_norm;
    }
    return 2.0 * total;
}

}  // namespace

Estimate isotropic_sphere_count(const Mat& sigma0, const Mat& sigma1, const LevelSetW& w, int m, int fiber_nodes,
                                std::uint64_t seed) {
    if (sigma0.rows() != w.ambient_dim || sigma0.cols() != w.ambient_dim || sigma1.rows() != w.ambient_dim ||
        sigma1.cols() != w.ambient_dim) {
        throw DomainError("isotropic_sphere_count: Σ0 and Σ1 must be k x k with k = ambient dimension of W");
    }
    if (w.codim != m) throw DomainError("isotropic_sphere_count: codim(W) must equal the sphere dimension");
    if (grf::min_eigenvalue(sigma0) <= 0.0) throw DomainError("isotropic_sphere_count: Σ0 is not positive definite");
    const GaussianFactor g(sigma0);
    Estimate e;
    e.seed = seed;
    e.method = "isotropic_cubature";
    if (w.is_point) {
        e.value = isotropic_cubature(sigma1, g, w, m, FiberRequest{0.0, 1, seed});
        e.n = 1;
        return e;
    }
    if (!w.fiber_sampler) throw DomainError("isotropic_sphere_count: W has no fiber sampler");
    double radius = 0.0;
    if (!w.compact) {
        const auto [r, settled] = truncation_radius(w, sigma0, fiber_nodes, seed);
        radius = r;
        e.diverged = !settled;
        e.flagged = !settled;
    }
    const double coarse = isotropic_cubature(sigma1, g, w, m, FiberRequest{radius, fiber_nodes, seed});
    const double fine = isotropic_cubature(sigma1, g, w, m, FiberRequest{radius, 2 * fiber_nodes, seed});
    e.value = fine;
    e.std_error = std::abs(fine - coarse);
    e.n = 2LL * fiber_nodes;
    return e;
}

Estimate isotropic_sphere_count(const grf::IsotropicModel& iso, const LevelSetW& w, int m, int fiber_nodes,
                                std::uint64_t seed) {
    return isotropic_sphere_count(iso.sigma0(), iso.sigma1(), w, m, fiber_nodes, seed);
}

double shub_smale(const std::vector<int>& degrees) {
    if (degrees.empty()) throw DomainError("shub_smale: no degrees given");
    double prod = 1.0;
    for (int d : degrees) {
        if (d <= 0) throw DomainError("shub_smale: degrees must be positive");
        prod *= d;
    }
    return std::sqrt(prod);
}

double mixed_kostlan_count(const std::vector<Mat>& coeff_mats) {
    const grf::IsotropicModel iso{coeff_mats};
    const Mat s0 = iso.sigma0(), s1 = iso.sigma1();
    if (grf::min_eigenvalue(s0) <= grf::kDegeneracyTol) throw DegeneracyError("mixed_kostlan_count: Σ0 is singular");
    return 2.0 * std::sqrt(std::max(s1.determinant() / s0.determinant(), 0.0));
}

SubGaussianFit subgaussian_diagnostic(const LevelSetW& w, const std::vector<double>& radii, int n_nodes,
                                      std::uint64_t seed) {
    if (radii.size() < 3) throw DomainError("subgaussian_diagnostic: at least 3 radii are required");
    if (!w.fiber_sampler) throw DomainError("subgaussian_diagnostic: W has no fiber sampler");
    SubGaussianFit fit;
    fit.radii = radii;
    std::sort(fit.radii.begin(), fit.radii.end());
    for (double r : fit.radii) {
        double vol = 0.0;
        for (const auto& node : w.fiber_sampler(FiberRequest{r, n_nodes, seed})) vol += node.weight;
        fit.volumes.push_back(vol);
    }
    const std::size_t n = fit.radii.size();
    const std::size_t used = std::max<std::size_t>(3, (n + 1) / 2);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = n - used; i < n; ++i) {
        if (!(fit.volumes[i] > 0.0)) throw DomainError("subgaussian_diagnostic: W ∩ B_R is empty at R = " + std::to_string(fit.radii[i]));
        const double x = fit.radii[i] * fit.radii[i], y = std::log(fit.volumes[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = used * sxx - sx * sx;
    fit.epsilon = denom > 0.0 ? (used * sxy - sx * sy) / denom : 0.0;
    return fit;
}

}  // namespace kacrice
