#include "doctest.h"

#include "kacrice/geomcore.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace kacrice;
using namespace kacrice::geom;

namespace {

Mat gaussian(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal;
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
    return m;
}

Mat cols(std::initializer_list<std::initializer_list<double>> vectors) {
    const auto k = static_cast<Eigen::Index>(vectors.size());
    const auto n = static_cast<Eigen::Index>(vectors.begin()->size());
    Mat m(n, k);
    Eigen::Index c = 0;
    for (const auto& v : vectors) {
        Eigen::Index r = 0;
        for (double x : v) m(r++, c) = x;
        ++c;
    }
    return m;
}

// Product of the sines of the principal angles, from the singular values of Bv^T Bw.
double svd_sine_product(const Subspace& v, const Subspace& w) {
    const Eigen::JacobiSVD<Mat> svd(v.basis().transpose() * w.basis());
    double out = 1.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double c = std::min(1.0, svd.singularValues()(i));
        out *= std::sqrt(1.0 - c * c);
    }
    return out;
}

}  // namespace

TEST_CASE("frame volume of simple frames") {
    CHECK(frame_volume(Frame(cols({{1, 0, 0}, {0, 1, 0}}))) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(frame_volume(Frame(cols({{3, 4}}))) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(frame_volume(Frame(cols({{1, 0}, {1, 1}}))) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(frame_volume(Frame(cols({{1, 2, 3}, {2, 4, 6}}))) == 0.0);
    CHECK_THROWS_AS((void)frame_volume(Frame()), DomainError);
    CHECK_THROWS_AS(Frame(Mat::Ones(2, 3)), DomainError);
}

TEST_CASE("gram matrix is symmetric positive semidefinite") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Frame f(gaussian(rng, 6, 1 + t % 6));
        const Mat g = f.gram();
        CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("subspace bases are orthonormal") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
        const auto v = Subspace::span(gaussian(rng, 7, 1 + t % 7));
        CHECK((v.basis().transpose() * v.basis() - Mat::Identity(v.dim(), v.dim())).cwiseAbs().maxCoeff() < kOrthTol);
        const auto vc = v.orthogonal_complement();
        CHECK(vc.dim() + v.dim() == 7);
        if (vc.dim() > 0) CHECK((v.basis().transpose() * vc.basis()).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(Subspace::span(cols({{1, 1, 0}, {2, 2, 0}})).dim() == 1);
}

TEST_CASE("intersection and containment") {
    const auto v = Subspace::span(cols({{1, 0, 0}, {0, 1, 0}}));
    const auto w = Subspace::span(cols({{0, 1, 0}, {0, 0, 1}}));
    const auto i = v.intersection(w);
    REQUIRE(i.dim() == 1);
    CHECK(std::abs(i.basis()(1, 0)) == doctest::Approx(1.0));
    CHECK(v.contains(Subspace::span(cols({{1, 1, 0}}))));
    CHECK_FALSE(v.contains(w));
    CHECK(v.minus(i).dim() == 1);
}

TEST_CASE("principal angle of two lines") {
    const auto e1 = Subspace::span(cols({{1, 0}}));
    CHECK(principal_angle(e1, Subspace::span(cols({{0, 1}}))) == doctest::Approx(1.0).epsilon(1e-14));
    const double t = std::numbers::pi / 6;
    CHECK(principal_angle(e1, Subspace::span(cols({{std::cos(t), std::sin(t)}}))) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS((void)principal_angle(e1, Subspace::span(cols({{1, 0, 0}}))), DomainError);
}

TEST_CASE("principal angle matches the singular value oracle") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        const auto v = Subspace::span(gaussian(rng, 5, 2));
        const auto w = Subspace::span(gaussian(rng, 5, 3));
        CHECK(std::abs(principal_angle(v, w) - svd_sine_product(v, w)) < 1e-9);
    }
}

TEST_CASE("principal angle is symmetric, in (0,1] and invariant under complements") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 2000; ++t) {
        const int n = 5 + t % 4;
        std::uniform_int_distribution<int> dim(1, n - 1);
        const auto v = Subspace::span(gaussian(rng, n, dim(rng)));
        const auto w = Subspace::span(gaussian(rng, n, dim(rng)));
        const double s = principal_angle(v, w);
        CHECK(s > 0.0);
        CHECK(s <= 1.0);
        CHECK(std::abs(s - principal_angle(w, v)) < 1e-12);
        CHECK(std::abs(s - principal_angle(v.orthogonal_complement(), w.orthogonal_complement())) < 1e-9);
        if (!v.contains(w)) CHECK(std::abs(s - angle_via_projection(v, w)) < 1e-9);
    }
}

TEST_CASE("principal angle is one for orthogonal splittings") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        // A, B, C mutually orthogonal pieces of a random orthonormal basis of R^7.
        const Mat q = Eigen::HouseholderQR<Mat>(gaussian(rng, 7, 7)).householderQ();
        const int a = 1 + t % 2, b = 1 + t % 3, c = 1 + (t / 3) % 3;
        Mat vb(7, a + b), wb(7, a + c);
        vb << q.leftCols(a), q.middleCols(a, b);
        wb << q.leftCols(a), q.middleCols(a + b, c);
        CHECK(principal_angle(Subspace::span(vb), Subspace::span(wb)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("principal angle is one under inclusion") {
    const auto v = Subspace::span(cols({{1, 0, 0}}));
    const auto w = Subspace::span(cols({{1, 0, 0}, {0, 1, 1}}));
    CHECK(principal_angle(v, w) == 1.0);
    CHECK(principal_angle(w, v) == 1.0);
    CHECK_THROWS_AS((void)angle_via_projection(w, v), DomainError);
}

TEST_CASE("angle via projection of lines at 45 degrees") {
    const auto v = Subspace::span(cols({{1, 0}}));
    const auto w = Subspace::span(cols({{1, 1}}));
    CHECK(angle_via_projection(v, w) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(angle_via_projection(v, Subspace::span(cols({{0, 1}}))) == doctest::Approx(1.0));
}

TEST_CASE("hadamard bound for block orthonormal frames") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 100; ++t) {
        const Mat v = Subspace::span(gaussian(rng, 6, 2)).basis();
        const Mat w = Subspace::span(gaussian(rng, 6, 3)).basis();
        Mat vw(6, 5);
        vw << v, w;
        CHECK(frame_volume(Frame(vw)) / (frame_volume(Frame(v)) * frame_volume(Frame(w))) <= 1.0 + 1e-12);
    }
}

TEST_CASE("normal jacobian examples") {
    CHECK(jacobian(LinearMapMetric::euclidean(Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix())) ==
          doctest::Approx(6.0).epsilon(1e-14));
    CHECK(jacobian(LinearMapMetric::euclidean(cols({{3, 4}}))) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(jacobian(LinearMapMetric::euclidean(cols({{3}, {4}}))) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(jacobian(LinearMapMetric::euclidean(cols({{1, 2}, {2, 4}}))) == 0.0);
}

TEST_CASE("normal jacobian of square maps is the absolute determinant") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const Mat a = gaussian(rng, 4, 4);
        CHECK(std::abs(jacobian(LinearMapMetric::euclidean(a)) - std::abs(a.determinant())) < 1e-12 * std::max(1.0, std::abs(a.determinant())));
    }
}

TEST_CASE("normal jacobian with metrics") {
    // Scaling the codomain metric by 4 doubles lengths in R^1.
    LinearMapMetric l{cols({{3}, {4}}), Mat::Identity(2, 2), 4.0 * Mat::Identity(1, 1)};
    CHECK(jacobian(l) == doctest::Approx(10.0).epsilon(1e-14));
    LinearMapMetric up{cols({{3, 4}}), 4.0 * Mat::Identity(1, 1), Mat::Identity(2, 2)};
    CHECK(jacobian(up) == doctest::Approx(2.5).epsilon(1e-14));
    LinearMapMetric bad{cols({{1}}), -Mat::Identity(1, 1), Mat::Identity(1, 1)};
    CHECK_THROWS_AS((void)jacobian(bad), DomainError);
}

TEST_CASE("orthogonal projection") {
    const Vec x = Eigen::Vector2d(3, 4);
    CHECK(orthogonal_projection(Subspace::span(cols({{1, 0}})), x).isApprox(Vec(Eigen::Vector2d(3, 0))));
    CHECK(orthogonal_projection(Subspace::whole(2), x).isApprox(x));
    std::mt19937_64 rng(12);
    for (int t = 0; t < 50; ++t) {
        const auto v = Subspace::span(gaussian(rng, 6, 1 + t % 5));
        const Vec y = gaussian(rng, 6, 1);
        const Vec p = orthogonal_projection(v, y);
        CHECK((v.basis().transpose() * (y - p)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((orthogonal_projection(v, p) - p).norm() < 1e-12);
    }
}
