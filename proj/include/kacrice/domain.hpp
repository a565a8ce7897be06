#pragma once

#include "kacrice/geomcore.hpp"

#include <string>
#include <vector>

namespace kacrice {

/// Parameter space of a random field: the circle S^1 ⊂ R^2, the sphere S^2 ⊂ R^3
/// or the cube [0,1]^m ⊂ R^m. Points are stored in ambient coordinates.
class Domain {
public:
    enum class Kind { Circle, Sphere, Cube };

    static Domain circle() { return Domain(Kind::Circle, 1); }
    static Domain sphere() { return Domain(Kind::Sphere, 2); }
    static Domain cube(int m);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int ambient_dim() const { return kind_ == Kind::Cube ? dim_ : dim_ + 1; }
    [[nodiscard]] std::string name() const;

    /// Orthonormal tangent frame (ambient_dim x dim) at p. On S^2 the first vector
    /// is (-y, x, 0) normalized, with a fixed fallback near the poles.
    [[nodiscard]] Mat tangent_frame(const Vec& p) const;

    [[nodiscard]] double volume() const;

    bool operator==(const Domain&) const = default;

private:
    Domain(Kind kind, int dim) : kind_(kind), dim_(dim) {}
    Kind kind_;
    int dim_;
};

/// Cubature rule on a region of a domain (or on a finite set of points, dim = 0).
struct Region {
    int dim = 0;
    std::vector<Vec> nodes;
    std::vector<double> weights;

    /// Finite set of points; each contributes with weight 1.
    static Region points(std::vector<Vec> pts);
    /// Uniform periodic rule on the whole circle.
    static Region circle(int n);
    /// Gauss-Legendre rule on the arc of angles [theta0, theta1].
    static Region arc(double theta0, double theta1, int n);
    /// Gauss-Legendre in cos(polar angle) times periodic trapezoid in azimuth.
    static Region sphere(int n_polar, int n_azimuth);
    /// Tensor Gauss-Legendre on [0,1]^m with `order` points per axis.
    static Region cube(int m, int order);

    [[nodiscard]] double total_weight() const;
};

[[nodiscard]] Vec circle_point(double theta);

}  // namespace kacrice
