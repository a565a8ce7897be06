#include "kacrice/geomcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kacrice::geom {

namespace {

// Product of singular values, i.e. sqrt(det(F^T F)), with the rank threshold applied.
double volume_of(const Mat& f) {
    if (f.cols() == 0) return 1.0;
    if (f.cols() > f.rows()) return 0.0;
    Eigen::JacobiSVD<Mat> svd(f);
    const auto& s = svd.singularValues();
    const double smax = s.maxCoeff();
    if (smax == 0.0 || s.minCoeff() < kRankTol * smax) return 0.0;
    return s.prod();
}

// Leading `rank` left singular vectors of m.
Mat leading_left_vectors(const Mat& m, Eigen::Index rank) {
    if (rank == 0 || m.cols() == 0) return Mat(m.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(rank);
}

void require_same_ambient(const Subspace& v, const Subspace& w, const char* what) {
    if (v.ambient_dim() != w.ambient_dim()) {
        throw DomainError(std::string(what) + ": subspaces live in different ambient spaces (" +
                          std::to_string(v.ambient_dim()) + " vs " + std::to_string(w.ambient_dim()) + ")");
    }
}

bool is_spd(const Mat& g) {
    if (g.rows() != g.cols()) return false;
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
    Eigen::LLT<Mat> llt(g);
    return llt.info() == Eigen::Success;
}

}  // namespace

Frame::Frame(Mat vectors) : vectors_(std::move(vectors)) {
    if (vectors_.cols() > vectors_.rows()) {
        throw DomainError("Frame: more vectors (" + std::to_string(vectors_.cols()) + ") than the ambient dimension (" +
                          std::to_string(vectors_.rows()) + ")");
    }
}

Frame Frame::joined(const Frame& other) const {
    if (other.ambient_dim() != ambient_dim()) throw DomainError("Frame::joined: ambient dimension mismatch");
    Mat m(ambient_dim(), size() + other.size());
    m << vectors_, other.vectors_;
    return Frame(std::move(m));
}

Mat orthonormalize(const Mat& vectors) {
    const Eigen::Index n = vectors.rows();
    double scale = 0.0;
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) scale = std::max(scale, vectors.col(j).norm());
    Mat q(n, 0);
    if (scale == 0.0) return q;
    std::vector<Vec> kept;
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Vec v = vectors.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec& b : kept) v -= b.dot(v) * b;
        }
        const double norm = v.norm();
        if (norm > kRankTol * scale) kept.push_back(v / norm);
        if (static_cast<Eigen::Index>(kept.size()) == n) break;
    }
    q.resize(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = kept[j];
    return q;
}

Subspace Subspace::span(const Mat& vectors) { return Subspace(orthonormalize(vectors)); }

Subspace Subspace::zero(Eigen::Index ambient_dim) { return Subspace(Mat(ambient_dim, 0)); }

Subspace Subspace::whole(Eigen::Index ambient_dim) { return Subspace(Mat::Identity(ambient_dim, ambient_dim)); }

Subspace Subspace::orthogonal_complement() const {
    const Eigen::Index n = ambient_dim();
    if (dim() == 0) return whole(n);
    if (dim() == n) return zero(n);
    Eigen::JacobiSVD<Mat> svd(basis_, Eigen::ComputeFullU);
    return Subspace(Mat(svd.matrixU().rightCols(n - dim())));
}

Subspace Subspace::intersection(const Subspace& other) const {
    require_same_ambient(*this, other, "Subspace::intersection");
    const Eigen::Index a = dim(), b = other.dim();
    if (a == 0 || b == 0) return zero(ambient_dim());
    Mat stacked(ambient_dim(), a + b);
    stacked << basis_, -other.basis_;
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.maxCoeff();
    // Right singular vectors with (near) zero singular value, plus those beyond the
    // row count, parametrize pairs (x, y) with V x = W y.
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index i = 0; i < a + b; ++i) {
        const double si = i < s.size() ? s(i) : 0.0;
        if (si <= kRankTol * smax) null_cols.push_back(i);
    }
    Mat common(ambient_dim(), static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t j = 0; j < null_cols.size(); ++j) {
        const Vec x = svd.matrixV().col(null_cols[j]).head(a);
        common.col(static_cast<Eigen::Index>(j)) = basis_ * x;
    }
    const Eigen::Index rank = std::min<Eigen::Index>({common.cols(), a, b});
    return Subspace(leading_left_vectors(common, rank));
}

Subspace Subspace::minus(const Subspace& other) const {
    require_same_ambient(*this, other, "Subspace::minus");
    if (other.dim() == 0) return *this;
    const Mat residual = basis_ - other.basis_ * (other.basis_.transpose() * basis_);
    const Eigen::Index rank = std::max<Eigen::Index>(0, dim() - other.dim());
    return Subspace(leading_left_vectors(residual, rank));
}

bool Subspace::contains(const Subspace& other) const {
    require_same_ambient(*this, other, "Subspace::contains");
    return intersection(other).dim() == other.dim();
}

LinearMapMetric LinearMapMetric::euclidean(Mat a) {
    const auto n = a.rows(), m = a.cols();
    return {std::move(a), Mat::Identity(m, m), Mat::Identity(n, n)};
}

double frame_volume(const Frame& f) {
    if (f.size() == 0) throw DomainError("frame_volume: empty frame");
    return volume_of(f.vectors());
}

double principal_angle(const Subspace& v, const Subspace& w) {
    require_same_ambient(v, w, "principal_angle");
    const Subspace common = v.intersection(w);
    if (common.dim() == v.dim() || common.dim() == w.dim()) return 1.0;

    const Mat vc = v.minus(common).basis();
    const Mat wc = w.minus(common).basis();
    const double vol_v = volume_of(vc), vol_w = volume_of(wc);
    // Near-inclusion: the thresholded complement frame collapsed.
    if (vol_v < kRankTol || vol_w < kRankTol) return 1.0;

    Mat joint(v.ambient_dim(), vc.cols() + wc.cols());
    joint << vc, wc;
    const double sigma = volume_of(joint) / (vol_v * vol_w);
    return std::min(sigma, 1.0);
}

double angle_via_projection(const Subspace& v, const Subspace& w) {
    require_same_ambient(v, w, "angle_via_projection");
    if (v.contains(w)) throw DomainError("angle_via_projection: requires W not contained in V");
    const Subspace common = v.intersection(w);
    const Mat wc = w.minus(common).basis();
    const Mat projected = wc - v.basis() * (v.basis().transpose() * wc);
    return std::min(volume_of(projected) / volume_of(wc), 1.0);
}

double jacobian(const LinearMapMetric& map) {
    const Mat& a = map.matrix;
    const Eigen::Index n = a.rows(), m = a.cols();
    if (map.domain_metric.rows() != m || map.codomain_metric.rows() != n) {
        throw DomainError("jacobian: metric dimensions do not match the map");
    }
    if (!is_spd(map.domain_metric) || !is_spd(map.codomain_metric)) {
        throw DomainError("jacobian: metrics must be symmetric positive definite");
    }
    if (n == 0 || m == 0) return 1.0;

    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    const double smax = s.maxCoeff();
    if (smax == 0.0 || s.minCoeff() <= kRankTol * smax) return 0.0;

    if (m <= n) {
        const Mat inner = a.transpose() * map.codomain_metric * a;
        return std::sqrt(inner.determinant() / map.domain_metric.determinant());
    }
    const Mat inner = a * map.domain_metric.inverse() * a.transpose();
    return std::sqrt(inner.determinant() * map.codomain_metric.determinant());
}

Vec orthogonal_projection(const Subspace& v, const Vec& x) {
    if (x.size() != v.ambient_dim()) throw DomainError("orthogonal_projection: dimension mismatch");
    return v.basis() * (v.basis().transpose() * x);
}

}  // namespace kacrice::geom
