#include "kacrice/oracle.hpp"
#include "kacrice/domain.hpp"
#include "kacrice/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>
#include <vector>

namespace kacrice::oracle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CircleRoots {
    std::vector<double> angles;
    long long steps = 0;
};

CircleRoots circle_roots(const std::function<double(double)>& f, int n, double tol) {
    CircleRoots out;
    const double h = kTwoPi / n;
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = f(h * i);
    for (int i = 0; i < n; ++i) {
        const double f0 = vals[static_cast<std::size_t>(i)], f1 = vals[static_cast<std::size_t>((i + 1) % n)];
        if ((f0 > 0.0) == (f1 > 0.0)) continue;
        double a = h * i, b = h * (i + 1);
        const bool left_positive = f0 > 0.0;
        while (b - a > tol) {
            const double mid = 0.5 * (a + b);
            if ((f(mid) > 0.0) == left_positive) a = mid; else b = mid;
            ++out.steps;
        }
        out.angles.push_back(0.5 * (a + b));
    }
    return out;
}

double circular_min_separation(const std::vector<double>& angles) {
    if (angles.size() < 2) return std::numeric_limits<double>::infinity();
    double best = kTwoPi - (angles.back() - angles.front());
    for (std::size_t i = 1; i < angles.size(); ++i) best = std::min(best, angles[i] - angles[i - 1]);
    return best;
}

CountSample audited_circle_count(const std::function<double(double)>& f, const CircleGrid& grid, CircleRoots& roots) {
    if (grid.grid_n < 3) throw DomainError("count_zeros_circle: grid_n must be at least 3");
    roots = circle_roots(f, grid.grid_n, grid.tol);
    CountSample s;
    s.count = static_cast<long long>(roots.angles.size());
    s.n_bisection_steps = roots.steps;
    s.min_separation = circular_min_separation(roots.angles);
    const CircleRoots fine = circle_roots(f, 2 * grid.grid_n, 1e-3);
    if (fine.angles.size() != roots.angles.size()) {
        s.flagged = true;
        s.reason = "count changed under grid doubling";
    } else if (s.count % 2 != 0) {
        s.flagged = true;
        s.reason = "odd number of sign changes";
    } else if (s.min_separation < 10.0 * grid.tol) {
        s.flagged = true;
        s.reason = "roots closer than the resolution limit";
    }
    return s;
}

std::function<double(double)> circle_restriction(const grf::Realization& r) {
    if (r.model().domain().kind() != Domain::Kind::Circle || r.model().output_dim() != 1) {
        throw DomainError("count_zeros_circle: realization must be a scalar field on S^1");
    }
    return [&r](double t) { return r.value(circle_point(t))(0); };
}

// ---------------------------------------------------------------------------
// Common zeros on S^2

Eigen::Vector3d cube_point(int face, double u, double v) {
    const int axis = face / 2;
    const double sign = face % 2 == 0 ? 1.0 : -1.0;
    Eigen::Vector3d p;
    p(axis) = sign;
    p((axis + 1) % 3) = u;
    p((axis + 2) % 3) = v;
    return p.normalized();
}

Eigen::Matrix<double, 3, 2> tangent_basis(const Eigen::Vector3d& x) {
    const Eigen::Vector3d seed = std::abs(x.x()) < 0.6 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e1 = (seed - seed.dot(x) * x).normalized();
    Eigen::Matrix<double, 3, 2> t;
    t.col(0) = e1;
    t.col(1) = x.cross(e1);
    return t;
}

struct SphereSolve {
    std::vector<Eigen::Vector3d> roots;
    int seeds = 0;
    int failures = 0;
    long long steps = 0;
    double scale = 0.0;
};

SphereSolve solve_on_sphere(const SphereMap& f, const SphereGrid& grid, int n) {
    SphereSolve out;
    const int side = n + 1;
    std::vector<Eigen::Vector3d> seed_points;
    std::vector<Eigen::Vector2d> vals(static_cast<std::size_t>(side * side));
    for (int face = 0; face < 6; ++face) {
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                const Eigen::Vector3d p = cube_point(face, -1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
                const Eigen::Vector2d v = f.value(p);
                vals[static_cast<std::size_t>(i * side + j)] = v;
                out.scale = std::max(out.scale, v.cwiseAbs().maxCoeff());
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                // Split the cell into two triangles and seed where the linear interpolant of F vanishes.
                const int corner[4][2] = {{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}};
                for (const auto& tri : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
                    Eigen::Vector2d fv[3];
                    Eigen::Vector3d pv[3];
                    for (int c = 0; c < 3; ++c) {
                        const auto [ci, cj] = corner[tri[static_cast<std::size_t>(c)]];
                        fv[c] = vals[static_cast<std::size_t>(ci * side + cj)];
                        pv[c] = cube_point(face, -1.0 + 2.0 * ci / n, -1.0 + 2.0 * cj / n);
                    }
                    Eigen::Matrix2d lin;
                    lin.col(0) = fv[1] - fv[0];
                    lin.col(1) = fv[2] - fv[0];
                    const Eigen::FullPivLU<Eigen::Matrix2d> tri_lu(lin);
                    if (!tri_lu.isInvertible()) {
                        // Degenerate interpolant: seed at the centroid if both components change sign,
                        // so that a non-transverse zero set is seen (and flagged) by Newton.
                        bool change[2] = {false, false};
                        for (int c = 0; c < 2; ++c) {
                            for (int v = 1; v < 3; ++v) change[c] = change[c] || ((fv[v](c) > 0.0) != (fv[0](c) > 0.0));
                        }
                        if (change[0] && change[1]) seed_points.push_back((pv[0] + pv[1] + pv[2]).normalized());
                        continue;
                    }
                    const Eigen::Vector2d ab = tri_lu.solve(-fv[0]);
                    constexpr double slack = 0.1;
                    if (ab(0) < -slack || ab(1) < -slack || ab.sum() > 1.0 + slack) continue;
                    seed_points.push_back((pv[0] + ab(0) * (pv[1] - pv[0]) + ab(1) * (pv[2] - pv[0])).normalized());
                }
            }
        }
    }
    for (const Eigen::Vector3d& seed : seed_points) {
        ++out.seeds;
        Eigen::Vector3d x = seed;
        bool converged = false;
        for (int it = 0; it < grid.max_iter; ++it) {
            ++out.steps;
            const Eigen::Matrix<double, 3, 2> t = tangent_basis(x);
            const Eigen::Matrix2d j2 = f.jacobian(x) * t;
            const Eigen::Vector2d fx = f.value(x);
            const Eigen::FullPivLU<Eigen::Matrix2d> lu(j2);
            if (!lu.isInvertible()) break;
            Eigen::Vector2d delta = -lu.solve(fx);
            if (!delta.allFinite()) break;
            // Backtracking keeps |F| decreasing; far from a root full steps can leave the basin.
            const double fnorm = fx.norm();
            Eigen::Vector3d trial = (x + t * delta).normalized();
            for (int halving = 0; halving < 40 && f.value(trial).norm() >= fnorm && fnorm > 0.0; ++halving) {
                delta *= 0.5;
                trial = (x + t * delta).normalized();
            }
            x = trial;
            if (delta.norm() < 1e-13) {
                converged = true;
                break;
            }
        }
        if (converged && f.value(x).norm() > 1e-8 * std::max(out.scale, 1.0)) converged = false;
        if (!converged) {
            ++out.failures;
            continue;
        }
        const bool seen = std::any_of(out.roots.begin(), out.roots.end(), [&](const Eigen::Vector3d& r) {
            return (r - x).norm() < grid.dedup_radius;
        });
        if (!seen) out.roots.push_back(x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kinematic Monte Carlo

std::vector<Eigen::Vector3d> polyline(const SphereCurve& c, double max_segment) {
    double max_speed = 0.0;
    for (int i = 0; i <= 1024; ++i) max_speed = std::max(max_speed, c.velocity(c.t0 + (c.t1 - c.t0) * i / 1024.0).norm());
    const auto n = static_cast<int>(std::ceil(1.05 * max_speed * (c.t1 - c.t0) / max_segment)) + 1;
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(c.point(c.t0 + (c.t1 - c.t0) * i / n).normalized());
    if ((pts.back() - pts.front()).norm() < 1e-12) pts.back() = pts.front();
    return pts;
}

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
    }
};

constexpr double kCell = 0.01;

CellKey cell_of(const Eigen::Vector3d& p) {
    return {static_cast<std::int64_t>(std::floor(p.x() / kCell)), static_cast<std::int64_t>(std::floor(p.y() / kCell)),
            static_cast<std::int64_t>(std::floor(p.z() / kCell))};
}

class SegmentIndex {
public:
    SegmentIndex(const std::vector<Eigen::Vector3d>& pts, double margin) : pts_(pts) {
        for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
            const Eigen::Vector3d lo = pts[s].cwiseMin(pts[s + 1]).array() - margin;
            const Eigen::Vector3d hi = pts[s].cwiseMax(pts[s + 1]).array() + margin;
            const CellKey a = cell_of(lo), b = cell_of(hi);
            for (auto x = a.x; x <= b.x; ++x)
                for (auto y = a.y; y <= b.y; ++y)
                    for (auto z = a.z; z <= b.z; ++z) cells_[{x, y, z}].push_back(static_cast<int>(s));
        }
    }

    [[nodiscard]] const std::vector<int>* candidates(const Eigen::Vector3d& p) const {
        const auto it = cells_.find(cell_of(p));
        return it == cells_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] const Eigen::Vector3d& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }

private:
    const std::vector<Eigen::Vector3d>& pts_;
    std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
};

enum class Crossing { None, Transverse, Tangential };

Crossing arcs_cross(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1, const Eigen::Vector3d& b0,
                    const Eigen::Vector3d& b1) {
    const Eigen::Vector3d na = a0.cross(a1), nb = b0.cross(b1);
    if ((na.dot(b0) > 0.0) == (na.dot(b1) > 0.0)) return Crossing::None;
    if ((nb.dot(a0) > 0.0) == (nb.dot(a1) > 0.0)) return Crossing::None;
    if (a0.dot(b0) <= 0.0) return Crossing::None;  // the antipodal crossing of the two great circles
    const double sine = na.cross(nb).norm() / (na.norm() * nb.norm());
    return sine < 1e-6 ? Crossing::Tangential : Crossing::Transverse;
}

}  // namespace

CountSample count_zeros_circle(const std::function<double(double)>& f, const CircleGrid& grid) {
    CircleRoots roots;
    return audited_circle_count(f, grid, roots);
}

CountSample count_zeros_circle(const grf::Realization& r, const CircleGrid& grid) {
    CountSample s = count_zeros_circle(circle_restriction(r), grid);
    s.seed = r.seed();
    return s;
}

CountSample count_signed_zeros_circle(const grf::Realization& r, const CircleGrid& grid) {
    const auto f = circle_restriction(r);
    CircleRoots roots;
    CountSample s = audited_circle_count(f, grid, roots);
    s.seed = r.seed();
    double scale = 0.0;
    for (int i = 0; i < grid.grid_n; ++i) scale = std::max(scale, r.differential(circle_point(kTwoPi * i / grid.grid_n)).cwiseAbs().maxCoeff());
    long long signed_count = 0;
    for (double t : roots.angles) {
        const double deriv = r.differential(circle_point(t))(0, 0);
        if (std::abs(deriv) <= 1e-9 * std::max(scale, 1e-300)) {
            s.flagged = true;
            s.reason = "non-transverse zero";
            continue;
        }
        signed_count += deriv > 0.0 ? 1 : -1;
    }
    s.count = signed_count;
    return s;
}

CountSample count_common_zeros_sphere(const SphereMap& f, const SphereGrid& grid) {
    if (grid.grid_n < 2) throw DomainError("count_common_zeros_sphere: grid_n must be at least 2");
    const SphereSolve base = solve_on_sphere(f, grid, grid.grid_n);
    const SphereSolve fine = solve_on_sphere(f, grid, 2 * grid.grid_n);
    CountSample s;
    s.n_bisection_steps = base.steps + fine.steps;
    const auto& roots = fine.roots;
    s.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) s.min_separation = std::min(s.min_separation, (roots[i] - roots[j]).norm());
    }
    auto flag = [&](const char* why) {
        if (!s.flagged) s.reason = why;
        s.flagged = true;
    };
    const int seeds = base.seeds + fine.seeds, failures = base.failures + fine.failures;
    if (seeds > 0 && failures > 0.01 * seeds) flag("Newton failed on more than 1% of seeds");
    if (base.roots.size() != fine.roots.size()) flag("count changed under grid doubling");
    for (const auto& x : roots) {
        const double det = (f.jacobian(x) * tangent_basis(x)).determinant();
        if (std::abs(det) < 1e-8 * std::max(fine.scale * fine.scale, 1e-300)) flag("non-transverse common zero");
        const bool paired = std::any_of(roots.begin(), roots.end(), [&](const Eigen::Vector3d& y) {
            return (x + y).norm() < 10.0 * grid.dedup_radius;
        });
        if (!paired) flag("roots are not antipodally paired");
    }
    if (roots.size() % 2 != 0) flag("odd number of roots on the sphere");
    s.count = static_cast<long long>(roots.size() / 2);
    return s;
}

CountSample count_common_zeros_sphere(const grf::Realization& r1, const grf::Realization& r2, const SphereGrid& grid) {
    for (const auto* r : {&r1, &r2}) {
        if (r->model().domain().kind() != Domain::Kind::Sphere || r->model().output_dim() != 1) {
            throw DomainError("count_common_zeros_sphere: realizations must be scalar fields on S^2");
        }
    }
    SphereMap f;
    f.value = [&](const Eigen::Vector3d& x) -> Eigen::Vector2d {
        const Vec p = x;
        return {r1.value(p)(0), r2.value(p)(0)};
    };
    f.jacobian = [&](const Eigen::Vector3d& x) -> Eigen::Matrix<double, 2, 3> {
        const Vec p = x;
        Eigen::Matrix<double, 2, 3> j;
        j.row(0) = r1.ambient_gradient(p).row(0);
        j.row(1) = r2.ambient_gradient(p).row(0);
        return j;
    };
    CountSample s = count_common_zeros_sphere(f, grid);
    s.seed = r1.seed();
    return s;
}

CountSample count_common_zeros_sphere(const grf::Realization& r, const SphereGrid& grid) {
    if (r.model().domain().kind() != Domain::Kind::Sphere || r.model().output_dim() != 2) {
        throw DomainError("count_common_zeros_sphere: realization must have two components on S^2");
    }
    SphereMap f;
    f.value = [&](const Eigen::Vector3d& x) -> Eigen::Vector2d { return r.value(Vec(x)); };
    f.jacobian = [&](const Eigen::Vector3d& x) -> Eigen::Matrix<double, 2, 3> { return r.ambient_gradient(Vec(x)); };
    CountSample s = count_common_zeros_sphere(f, grid);
    s.seed = r.seed();
    return s;
}

Estimate mc_expected_count(const std::shared_ptr<const grf::FieldModel>& model, const CountOp& op, int n_samples,
                           std::uint64_t seed) {
    if (n_samples < 1) throw DomainError("mc_expected_count: n_samples must be positive");
    const auto samples = parallel_map<CountSample>(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
        return op(grf::sample(model, derive_seed(seed, i)));
    });
    Estimate e;
    e.seed = seed;
    e.method = "oracle_count";
    double sum = 0.0, sum_sq = 0.0;
    long long used = 0;
    for (const auto& s : samples) {
        if (s.flagged) {
            ++e.excluded;
            continue;
        }
        const auto c = static_cast<double>(s.count);
        sum += c;
        sum_sq += c * c;
        ++used;
    }
    e.n = used;
    if (used > 0) {
        e.value = sum / used;
        const double var = used > 1 ? std::max(0.0, (sum_sq - used * e.value * e.value) / (used - 1)) : 0.0;
        e.std_error = std::sqrt(var / used);
    } else {
        e.value = std::numeric_limits<double>::quiet_NaN();
        e.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    e.flagged = e.excluded > 0.05 * n_samples;
    return e;
}

Eigen::Matrix3d random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::Vector4d q;
    do {
        for (int i = 0; i < 4; ++i) q(i) = normal(rng);
    } while (q.norm() < 1e-12);
    q.normalize();
    return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
}

Estimate kinematic_mc(const SphereCurve& c1, const SphereCurve& c2, const KinematicMcOptions& opts, std::uint64_t seed) {
    if (opts.n_rotations < 1) throw DomainError("kinematic_mc: n_rotations must be positive");
    if (!(opts.max_segment > 0.0 && opts.max_segment < 1e-3)) throw DomainError("kinematic_mc: segments must be shorter than 1e-3");
    const auto p1 = polyline(c1, opts.max_segment);
    const auto p2 = polyline(c2, opts.max_segment);
    const SegmentIndex index(p2, 1.5 * opts.max_segment);
    const auto counts = parallel_map<long long>(static_cast<std::size_t>(opts.n_rotations), [&](std::size_t r) {
        const std::uint64_t rot_seed = derive_seed(seed, r);
        for (std::uint64_t attempt = 0;; ++attempt) {
            const Eigen::Matrix3d g = random_rotation(derive_seed(rot_seed, attempt));
            long long count = 0;
            bool tangential = false;
            Eigen::Vector3d prev = g * p1.front();
            for (std::size_t s = 0; s + 1 < p1.size() && !tangential; ++s) {
                const Eigen::Vector3d next = g * p1[s + 1];
                if (const auto* cand = index.candidates(prev)) {
                    for (int b : *cand) {
                        const Crossing c = arcs_cross(prev, next, index.point(b), index.point(b + 1));
                        if (c == Crossing::Tangential) {
                            tangential = true;
                            break;
                        }
                        if (c == Crossing::Transverse) ++count;
                    }
                }
                prev = next;
            }
            if (!tangential) return count;
        }
    });
    Estimate e;
    e.seed = seed;
    e.method = "kinematic_mc";
    e.n = opts.n_rotations;
    double sum = 0.0, sum_sq = 0.0;
    for (long long c : counts) {
        sum += static_cast<double>(c);
        sum_sq += static_cast<double>(c) * static_cast<double>(c);
    }
    const double n = opts.n_rotations;
    e.value = sum / n;
    e.std_error = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * e.value * e.value) / (n - 1)) / n) : 0.0;
    return e;
}

}  // namespace kacrice::oracle
