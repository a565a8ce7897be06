#include "doctest.h"

#include "kacrice/geomcore.hpp"

#include <cmath>
#include <numbers>

using namespace kacrice;
using namespace kacrice::geom;

namespace {
constexpr double kPi = std::numbers::pi;
const auto one1 = [](double) { return 1.0; };
const auto one2 = [](const Eigen::Vector2d&) { return 1.0; };
}  // namespace

TEST_CASE("area formula for a linear map") {
    const auto r = area_formula_check({[](double x) { return 2 * x; }, [](double) { return 2.0; }, 0.0, 1.0}, one1);
    CHECK(std::abs(r.lhs - 2.0) < 1e-6);
    CHECK(std::abs(r.rhs - 2.0) < 1e-6);
}

TEST_CASE("area formula for a folded parabola") {
    const auto r = area_formula_check({[](double x) { return x * x; }, [](double x) { return 2 * x; }, -1.0, 1.0}, one1);
    CHECK(std::abs(r.lhs - 2.0) < 1e-6);
    CHECK(std::abs(r.rhs - 2.0) < 1e-6);
}

TEST_CASE("area formula for an oscillating map") {
    const auto r = area_formula_check({[](double x) { return std::sin(3 * x); }, [](double x) { return 3 * std::cos(3 * x); }, 0.0, 2 * kPi}, one1);
    CHECK(std::abs(r.lhs - 12.0) < 1e-6);
    CHECK(std::abs(r.rhs - 12.0) < 1e-6);
}

TEST_CASE("area formula with a nonconstant weight") {
    // ∫_0^2 e^x |2x| dx with f = x^2 monotone.
    const double exact = 2.0 * (std::exp(2.0) * (2.0 - 1.0) + 1.0);
    const auto r = area_formula_check({[](double x) { return x * x; }, [](double x) { return 2 * x; }, 0.0, 2.0},
                                      [](double x) { return std::exp(x); });
    CHECK(std::abs(r.lhs - exact) < 1e-6);
    CHECK(std::abs(r.rhs - exact) < 1e-6);
}

TEST_CASE("area formula rejects non-finite samples") {
    CHECK_THROWS_AS((void)area_formula_check({[](double x) { return 1.0 / x; }, [](double x) { return -1.0 / (x * x); }, 0.0, 1.0}, one1),
                    NumericError);
}

TEST_CASE("coarea formula for a coordinate projection") {
    const auto r = coarea_formula_check({[](const Eigen::Vector2d& p) { return p.x(); },
                                         [](const Eigen::Vector2d&) { return Eigen::Vector2d(1, 0); }},
                                        one2, PlanarDomain::rectangle(0, 1, 0, 1));
    CHECK(std::abs(r.lhs - 1.0) < 1e-6);
    CHECK(std::abs(r.rhs - 1.0) < 1e-6);
    CHECK_FALSE(r.flagged);
}

TEST_CASE("coarea formula for a diagonal linear map") {
    const auto r = coarea_formula_check({[](const Eigen::Vector2d& p) { return p.x() + p.y(); },
                                         [](const Eigen::Vector2d&) { return Eigen::Vector2d(1, 1); }},
                                        one2, PlanarDomain::rectangle(0, 1, 0, 1));
    CHECK(std::abs(r.lhs - std::sqrt(2.0)) < 1e-6);
    CHECK(std::abs(r.rhs - std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("coarea formula for the squared radius on an annulus") {
    const double exact = 2 * kPi * 2.0 * (8.0 - 1.0) / 3.0;  // ∫ 2r · r dr dθ
    const auto r = coarea_formula_check({[](const Eigen::Vector2d& p) { return p.squaredNorm(); },
                                         [](const Eigen::Vector2d& p) -> Eigen::Vector2d { return 2 * p; }},
                                        one2, PlanarDomain::annulus(1, 2));
    CHECK(std::abs(r.lhs - exact) < 1e-6);
    CHECK(std::abs(r.rhs - exact) < 1e-6);
}

TEST_CASE("coarea formula flags a map with vanishing gradient") {
    const auto r = coarea_formula_check({[](const Eigen::Vector2d& p) { return p.x() < 0.5 ? 0.0 : (p.x() - 0.5) * (p.x() - 0.5); },
                                         [](const Eigen::Vector2d& p) {
                                             return Eigen::Vector2d(p.x() < 0.5 ? 0.0 : 2 * (p.x() - 0.5), 0);
                                         }},
                                        one2, PlanarDomain::rectangle(0, 1, 0, 1));
    CHECK(r.flagged);
}
