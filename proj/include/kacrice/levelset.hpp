#pragma once

#include "kacrice/geomcore.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kacrice {

/// Cubature node on W with its volume weight.
struct FiberNode {
    Vec y;
    double weight = 0.0;
};

/// Ask a fiber sampler for a rule on W ∩ B_R. Compact sets ignore `radius`.
struct FiberRequest {
    double radius = 0.0;
    int n_nodes = 64;
    std::uint64_t seed = 0;
};

using FiberSampler = std::function<std::vector<FiberNode>(const FiberRequest&)>;

/// Submanifold W = φ^{-1}(0) ⊂ R^k of codimension m, constant along the base.
struct LevelSetW {
    int ambient_dim = 0;
    int codim = 0;
    std::function<Vec(const Vec&)> phi;
    std::function<Mat(const Vec&)> phi_jacobian;
    /// k x m matrix with orthonormal columns spanning T_yW^⊥. An empty or
    /// non-finite result marks a point where no framing exists; such nodes are skipped.
    std::function<Mat(const Vec&)> normal_framing;
    FiberSampler fiber_sampler;  // may be empty for a point
    bool compact = false;
    bool is_point = false;
    std::string name;

    [[nodiscard]] int fiber_dim() const { return ambient_dim - codim; }

    /// W = {y0}.
    static LevelSetW point(const Vec& y0);
    /// Round sphere of radius r centered at 0 in R^k, k ∈ {2, 3}.
    static LevelSetW sphere(double r, int k = 2);
    /// Affine subspace {y : ν^T (y - offset) = 0} where ν spans the columns of `normals`.
    static LevelSetW linear(const Mat& normals, const Vec& offset);
    /// Open half-line {y > 0} ⊂ R (codimension 0).
    static LevelSetW half_line();
    /// Union of the coordinate axes {y1 y2 = 0} ⊂ R^2; no framing at the origin.
    static LevelSetW cross();
};

}  // namespace kacrice
