#pragma once

#include <vector>

namespace kacrice::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre: `panels` equal panels of `order` points each.
Rule composite_gauss_legendre(int panels, int order, double a, double b);

/// Equispaced periodic trapezoid rule on [a, a + period).
Rule periodic_trapezoid(int n, double a, double period);

}  // namespace kacrice::quad
