#include "doctest.h"

#include "kacrice/oracle.hpp"
#include "kacrice/parallel.hpp"

#include <cmath>
#include <numbers>

using namespace kacrice;
using namespace kacrice::oracle;
using std::numbers::pi;

namespace {

// Realization of a fixed homogeneous polynomial on S^1 given by its monomials.
grf::Realization fixed_circle_poly(const std::vector<std::pair<std::vector<int>, double>>& monomials) {
    std::vector<grf::Term> terms;
    Vec coeffs(static_cast<Eigen::Index>(monomials.size()));
    for (std::size_t i = 0; i < monomials.size(); ++i) {
        terms.push_back({monomials[i].first, Vec::Ones(1)});
        coeffs(static_cast<Eigen::Index>(i)) = monomials[i].second;
    }
    const auto n = static_cast<Eigen::Index>(terms.size());
    return {grf::custom_model(Domain::circle(), terms, Mat::Identity(n, n)), coeffs, 0};
}

SphereMap linear_map(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    SphereMap f;
    f.value = [a, b](const Eigen::Vector3d& x) { return Eigen::Vector2d(a.dot(x), b.dot(x)); };
    f.jacobian = [a, b](const Eigen::Vector3d&) {
        Eigen::Matrix<double, 2, 3> j;
        j.row(0) = a.transpose();
        j.row(1) = b.transpose();
        return j;
    };
    return f;
}

}  // namespace

TEST_CASE("circle zeros of explicit functions") {
    const auto s = count_zeros_circle([](double t) { return std::sin(5.0 * t); });
    CHECK(s.count == 10);
    CHECK_FALSE(s.flagged);
    CHECK(s.min_separation == doctest::Approx(pi / 5).epsilon(1e-9));
    CHECK(count_zeros_circle([](double) { return 1.0; }).count == 0);
    CHECK(count_zeros_circle([](double t) { return std::cos(t) - 0.3; }).count == 2);
}

TEST_CASE("signed zeros of sin 5θ cancel") {
    // Im (x + i y)^5 = 5 x^4 y - 10 x^2 y^3 + y^5 = sin 5θ on the circle.
    const auto r = fixed_circle_poly({{{4, 1}, 5.0}, {{2, 3}, -10.0}, {{0, 5}, 1.0}});
    CHECK(count_zeros_circle(r).count == 10);
    const auto signed_count = count_signed_zeros_circle(r);
    CHECK(signed_count.count == 0);
    CHECK_FALSE(signed_count.flagged);
}

TEST_CASE("non-transverse zeros are flagged") {
    const auto cube = fixed_circle_poly({{{3, 0}, 1.0}});
    CHECK(count_signed_zeros_circle(cube).flagged);
}

TEST_CASE("kostlan zero counts are even and resolution stable") {
    const auto model = grf::kostlan_model(1, 25);
    for (int i = 0; i < 50; ++i) {
        const auto r = grf::sample(model, derive_seed(1, i));
        const auto coarse = count_zeros_circle(r, CircleGrid{512, 1e-12});
        const auto fine = count_zeros_circle(r, CircleGrid{1024, 1e-12});
        CHECK(coarse.count == fine.count);
        CHECK(coarse.count % 2 == 0);
        CHECK(count_signed_zeros_circle(r).count == 0);
    }
}

TEST_CASE("kostlan d = 4 mean count") {
    const auto model = grf::kostlan_model(1, 4);
    const CountOp op = [](const grf::Realization& r) { return count_zeros_circle(r); };
    const auto e = mc_expected_count(model, op, 4000, 2);
    CHECK(e.std_error > 0.0);
    CHECK(std::abs(e.value - 4.0) < 3.0 * e.std_error);
    const auto again = mc_expected_count(model, op, 4000, 2);
    CHECK(again.value == e.value);
    CHECK(again.std_error == e.std_error);
}

TEST_CASE("constant field has no zeros") {
    const auto model = grf::kostlan_model(1, 0);
    const CountOp op = [](const grf::Realization& r) { return count_zeros_circle(r); };
    const auto e = mc_expected_count(model, op, 100, 3);
    CHECK(e.value == 0.0);
    CHECK(e.std_error == 0.0);
}

TEST_CASE("common zeros of linear forms") {
    const auto one = count_common_zeros_sphere(linear_map(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY()));
    CHECK(one.count == 1);
    CHECK_FALSE(one.flagged);
    const auto tilted = count_common_zeros_sphere(linear_map(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(-1, 0.5, 2)));
    CHECK(tilted.count == 1);
    CHECK(count_common_zeros_sphere(linear_map(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX())).flagged);
}

TEST_CASE("sphere counts of a kostlan system are resolution stable") {
    const auto model = grf::kostlan_system(2, {2, 3});
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
        const auto r = grf::sample(model, derive_seed(4, i));
        const auto a = count_common_zeros_sphere(r, SphereGrid{16});
        const auto b = count_common_zeros_sphere(r, SphereGrid{32});
        if (a.flagged || b.flagged) continue;
        ++checked;
        CHECK(a.count == b.count);
        CHECK(a.count <= 6);  // Bezout
    }
    CHECK(checked >= 18);
}

TEST_CASE("sphere counts are invariant under rotating the domain") {
    const auto model = grf::kostlan_system(2, {2, 2});
    const Eigen::Matrix3d q = random_rotation(5);
    const int n = 400;
    auto batch = [&](bool rotate, std::uint64_t seed) {
        const auto counts = parallel_map<CountSample>(n, [&](std::size_t i) {
            const auto r = grf::sample(model, derive_seed(seed, i));
            if (!rotate) return count_common_zeros_sphere(r);
            SphereMap f;
            f.value = [&r, &q](const Eigen::Vector3d& x) -> Eigen::Vector2d { return r.value(q * x); };
            f.jacobian = [&r, &q](const Eigen::Vector3d& x) -> Eigen::Matrix<double, 2, 3> { return r.ambient_gradient(q * x) * q; };
            return count_common_zeros_sphere(f);
        });
        double s = 0, s2 = 0;
        int used = 0;
        for (const auto& c : counts) {
            if (c.flagged) continue;
            s += static_cast<double>(c.count);
            s2 += static_cast<double>(c.count * c.count);
            ++used;
        }
        const double mean = s / used;
        return std::pair{mean, std::sqrt((s2 / used - mean * mean) / used)};
    };
    const auto [m0, se0] = batch(false, 6);
    const auto [m1, se1] = batch(true, 7);
    CHECK(std::abs(m0 - m1) < 3.0 * std::hypot(se0, se1));
}

TEST_CASE("random rotations are orthogonal and uniform") {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const Eigen::Matrix3d q = random_rotation(derive_seed(8, i));
        if (i < 100) {
            CHECK((q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(q.determinant() == doctest::Approx(1.0));
        }
        mean += q.col(2);
    }
    mean /= n;
    // Each coordinate of a uniform point on S^2 has variance 1/3.
    CHECK(mean.cwiseAbs().maxCoeff() < 3.0 * std::sqrt(1.0 / 3.0 / n) * 1.5);
}

TEST_CASE("kinematic monte carlo for great circles") {
    const auto c1 = SphereCurve::great_circle(Eigen::Vector3d::UnitZ());
    const auto c2 = SphereCurve::great_circle(Eigen::Vector3d(0.3, -0.4, 1.0).normalized());
    const auto e = kinematic_mc(c1, c2, KinematicMcOptions{200}, 9);
    CHECK(e.value == 2.0);
    CHECK(e.std_error == 0.0);
    const auto antipodal = kinematic_mc(c1, SphereCurve::great_circle(-Eigen::Vector3d::UnitZ()), KinematicMcOptions{200}, 10);
    CHECK(antipodal.value == 2.0);
}

TEST_CASE("kinematic monte carlo matches the kinematic formula for a latitude") {
    const auto lat = SphereCurve::latitude(0.7);
    const auto gc = SphereCurve::great_circle(Eigen::Vector3d::UnitX());
    const auto mc = kinematic_mc(lat, gc, KinematicMcOptions{10000}, 11);
    const auto rhs = kinematic_rhs_sphere(lat, gc);
    CHECK(std::abs(mc.value - rhs.value) < 3.0 * mc.std_error);
    // Length-product form of the Poincaré formula on S^2 with probability-normalized Haar measure.
    CHECK(rhs.value == doctest::Approx(lat.length() * gc.length() / (2.0 * pi * pi)).epsilon(1e-4));
}
