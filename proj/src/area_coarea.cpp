#include "kacrice/geomcore.hpp"
#include "kacrice/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace kacrice::geom {

namespace {

constexpr int kLineOrder = 8;

double checked(double x, const char* what) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite sample");
    return x;
}

// Root of h on [lo, hi] given a sign change, refined to `tol`.
template <class F>
double bisect(const F& h, double lo, double hi, double tol) {
    double hlo = h(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if ((hm > 0) == (hlo > 0)) {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> sorted_breaks(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    for (double v : values) {
        if (out.empty() || v - out.back() > 1e-13 * std::max(1.0, std::abs(v))) out.push_back(v);
    }
    return out;
}

}  // namespace

FormulaCheck area_formula_check(const Map1D& f, const std::function<double(double)>& g, const AreaOptions& opts) {
    if (!(f.b > f.a)) throw DomainError("area_formula_check: empty interval");
    const int n = opts.cells;
    const double h = (f.b - f.a) / n;

    std::vector<double> xs(n + 1), fp(n + 1);
    for (int i = 0; i <= n; ++i) {
        xs[i] = (i == n) ? f.b : f.a + i * h;
        fp[i] = checked(f.derivative(xs[i]), "area_formula_check");
    }

    // Partition into monotone pieces: grid nodes plus the critical points of f.
    std::vector<double> part;
    part.reserve(n + 16);
    for (int i = 0; i < n; ++i) {
        part.push_back(xs[i]);
        if (fp[i] * fp[i + 1] < 0.0) part.push_back(bisect(f.derivative, xs[i], xs[i + 1], opts.bisection_tol));
    }
    part.push_back(f.b);

    std::vector<double> fv(part.size());
    for (std::size_t i = 0; i < part.size(); ++i) fv[i] = checked(f.value(part[i]), "area_formula_check");

    FormulaCheck out;
    for (std::size_t i = 0; i + 1 < part.size(); ++i) {
        const auto rule = quad::gauss_legendre(kLineOrder, part[i], part[i + 1]);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double x = rule.nodes[j];
            out.lhs += rule.weights[j] * checked(g(x) * std::abs(f.derivative(x)), "area_formula_check");
        }
    }

    // The preimage count changes only at values of f at the endpoints and critical points.
    std::vector<double> breaks{fv.front(), fv.back()};
    for (std::size_t i = 1; i + 1 < part.size(); ++i) {
        const double d = f.derivative(part[i]);
        if (std::abs(d) < 1e-9 || (i > 0 && (fv[i] - fv[i - 1]) * (fv[i + 1] - fv[i]) < 0.0)) breaks.push_back(fv[i]);
    }
    breaks = sorted_breaks(std::move(breaks));
    const double fmin = *std::min_element(fv.begin(), fv.end());
    const double fmax = *std::max_element(fv.begin(), fv.end());
    if (breaks.front() > fmin) breaks.insert(breaks.begin(), fmin);
    if (breaks.back() < fmax) breaks.push_back(fmax);

    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        // q = lo + (hi - lo)(3τ^2 - 2τ^3) absorbs the square-root behaviour of preimages near fold values.
        const double lo_q = breaks[b], span = breaks[b + 1] - breaks[b];
        const auto rule = quad::composite_gauss_legendre(opts.q_panels, kLineOrder, 0.0, 1.0);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double tau = rule.nodes[j];
            const double q = lo_q + span * tau * tau * (3.0 - 2.0 * tau);
            const double dq = span * 6.0 * tau * (1.0 - tau);
            double sum = 0.0;
            for (std::size_t i = 0; i + 1 < part.size(); ++i) {
                const double lo = fv[i] - q, hi = fv[i + 1] - q;
                if (lo * hi < 0.0) {
                    const double p = bisect([&](double x) { return f.value(x) - q; }, part[i], part[i + 1],
                                            opts.bisection_tol);
                    sum += g(p);
                }
            }
            out.rhs += rule.weights[j] * dq * checked(sum, "area_formula_check");
        }
    }
    return out;
}

//------------------------------------------------------------------------------

PlanarDomain PlanarDomain::rectangle(double x0, double x1, double y0, double y1) {
    PlanarDomain d;
    d.map = [](const Eigen::Vector2d& uv) { return uv; };
    d.jacobian = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity().eval(); };
    d.u0 = x0;
    d.u1 = x1;
    d.v0 = y0;
    d.v1 = y1;
    return d;
}

PlanarDomain PlanarDomain::annulus(double r0, double r1) {
    PlanarDomain d;
    d.map = [](const Eigen::Vector2d& rt) {
        return Eigen::Vector2d(rt(0) * std::cos(rt(1)), rt(0) * std::sin(rt(1)));
    };
    d.jacobian = [](const Eigen::Vector2d& rt) {
        Eigen::Matrix2d j;
        j << std::cos(rt(1)), -rt(0) * std::sin(rt(1)), std::sin(rt(1)), rt(0) * std::cos(rt(1));
        return j;
    };
    d.u0 = r0;
    d.u1 = r1;
    d.v0 = 0.0;
    d.v1 = 2.0 * std::numbers::pi;
    return d;
}

namespace {

using V2 = Eigen::Vector2d;

// Level-set tracer working in the parameter rectangle of a PlanarDomain.
class LevelTracer {
public:
    LevelTracer(const Map2D& f, const std::function<double(const V2&)>& g, const PlanarDomain& dom, double step)
        : f_(f), g_(g), dom_(dom), step_(step) {}

    double value(const V2& uv) const { return f_.value(dom_.map(uv)); }

    V2 param_gradient(const V2& uv) const { return dom_.jacobian(uv).transpose() * f_.gradient(dom_.map(uv)); }

    bool inside(const V2& uv) const {
        const double eps = 1e-14 * std::max({1.0, std::abs(dom_.u1), std::abs(dom_.v1)});
        return uv(0) >= dom_.u0 - eps && uv(0) <= dom_.u1 + eps && uv(1) >= dom_.v0 - eps && uv(1) <= dom_.v1 + eps;
    }

    // Unit-speed (in the physical metric) tangent of the level set through uv.
    V2 tangent(const V2& uv, double dir) const {
        const V2 grad = param_gradient(uv);
        const V2 t(-grad(1), grad(0));
        const double speed = (dom_.jacobian(uv) * t).norm();
        if (speed == 0.0) throw NumericError("coarea_formula_check: vanishing gradient on a traced level set");
        return dir * t / speed;
    }

    double weight(const V2& uv) const { return g_(dom_.map(uv)); }

    // One RK4 step of the augmented system d(uv, I)/ds = (T(uv), g(uv)).
    void rk4(const V2& x, double h, double dir, V2& x_out, double& dI) const {
        const V2 k1 = tangent(x, dir);
        const double j1 = weight(x);
        const V2 x2 = x + 0.5 * h * k1;
        const V2 k2 = tangent(x2, dir);
        const double j2 = weight(x2);
        const V2 x3 = x + 0.5 * h * k2;
        const V2 k3 = tangent(x3, dir);
        const double j3 = weight(x3);
        const V2 x4 = x + h * k3;
        const V2 k4 = tangent(x4, dir);
        const double j4 = weight(x4);
        x_out = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        dI = h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    }

    void project(V2& x, double q) const {
        for (int it = 0; it < 3; ++it) {
            const V2 grad = param_gradient(x);
            const double n2 = grad.squaredNorm();
            if (n2 == 0.0) return;
            x -= (value(x) - q) * grad / n2;
        }
    }

    struct Trace {
        double integral = 0.0;
        bool closed = false;
        std::vector<V2> points;  // physical positions
    };

    Trace march(const V2& start, double q, double dir) const {
        Trace tr;
        V2 x = start;
        const V2 phys0 = dom_.map(start);
        const V2 t0 = tangent(start, dir);
        double travelled = 0.0;
        tr.points.push_back(phys0);
        const std::size_t max_steps = 50'000'000;
        for (std::size_t s = 0; s < max_steps; ++s) {
            V2 next;
            double dI = 0.0;
            rk4(x, step_, dir, next, dI);
            project(next, q);

            if (!inside(next)) {
                // Shrink the step until the endpoint sits on the boundary.
                double lo = 0.0, hi = step_;
                double dI_lo = 0.0;
                for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    V2 trial;
                    double dI_mid = 0.0;
                    rk4(x, mid, dir, trial, dI_mid);
                    if (inside(trial)) {
                        lo = mid;
                        dI_lo = dI_mid;
                    } else {
                        hi = mid;
                    }
                }
                tr.integral += dI_lo;
                return tr;
            }

            const double side_prev = (x - start).dot(t0);
            const double side_next = (next - start).dot(t0);
            if (travelled > 4.0 * step_ && side_prev < 0.0 && side_next >= 0.0 &&
                (dom_.map(next) - phys0).norm() < 2.0 * step_) {
                // Closed loop: finish exactly at the starting cross-section.
                double lo = 0.0, hi = step_;
                double dI_mid = 0.0;
                for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    V2 trial;
                    rk4(x, mid, dir, trial, dI_mid);
                    if ((trial - start).dot(t0) < 0.0) lo = mid; else hi = mid;
                }
                V2 trial;
                rk4(x, 0.5 * (lo + hi), dir, trial, dI_mid);
                tr.integral += dI_mid;
                tr.closed = true;
                return tr;
            }

            tr.integral += dI;
            travelled += step_;
            x = next;
            tr.points.push_back(dom_.map(x));
        }
        throw NumericError("coarea_formula_check: level-set tracing did not terminate");
    }

    // ∫_{f^{-1}(q)} g ds over the parameter rectangle.
    double level_integral(double q, int grid) const {
        const double du = (dom_.u1 - dom_.u0) / grid, dv = (dom_.v1 - dom_.v0) / grid;
        auto node = [&](int i, int j) {
            return V2(i == grid ? dom_.u1 : dom_.u0 + i * du, j == grid ? dom_.v1 : dom_.v0 + j * dv);
        };
        std::vector<double> vals((grid + 1) * (grid + 1));
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) vals[i * (grid + 1) + j] = value(node(i, j)) - q;

        std::vector<V2> seeds;
        auto edge_seed = [&](const V2& a, const V2& b) {
            const double t = bisect([&](double s) { return value(a + s * (b - a)) - q; }, 0.0, 1.0, 1e-15);
            V2 p = a + t * (b - a);
            seeds.push_back(p);
        };
        for (int i = 0; i <= grid; ++i) {
            for (int j = 0; j <= grid; ++j) {
                const double here = vals[i * (grid + 1) + j];
                if (i < grid && here * vals[(i + 1) * (grid + 1) + j] < 0.0) edge_seed(node(i, j), node(i + 1, j));
                if (j < grid && here * vals[i * (grid + 1) + j + 1] < 0.0) edge_seed(node(i, j), node(i, j + 1));
            }
        }

        std::vector<V2> visited;
        double total = 0.0;
        for (const V2& seed : seeds) {
            const V2 phys = dom_.map(seed);
            bool covered = false;
            for (const V2& p : visited) {
                if ((p - phys).norm() < 1.5 * step_) {
                    covered = true;
                    break;
                }
            }
            if (covered) continue;
            Trace fwd = march(seed, q, +1.0);
            total += fwd.integral;
            visited.insert(visited.end(), fwd.points.begin(), fwd.points.end());
            if (!fwd.closed) {
                Trace back = march(seed, q, -1.0);
                total += back.integral;
                visited.insert(visited.end(), back.points.begin(), back.points.end());
            }
        }
        return total;
    }

private:
    const Map2D& f_;
    const std::function<double(const V2&)>& g_;
    const PlanarDomain& dom_;
    double step_;
};

}  // namespace

FormulaCheck coarea_formula_check(const Map2D& f, const std::function<double(const V2&)>& g, const PlanarDomain& dom,
                                  const CoareaOptions& opts) {
    if (!(dom.u1 > dom.u0) || !(dom.v1 > dom.v0)) throw DomainError("coarea_formula_check: empty domain");
    LevelTracer tracer(f, g, dom, opts.step);

    FormulaCheck out;
    const auto ru = quad::composite_gauss_legendre(opts.lhs_panels, 6, dom.u0, dom.u1);
    const auto rv = quad::composite_gauss_legendre(opts.lhs_panels, 6, dom.v0, dom.v1);
    std::size_t vanishing = 0;
    for (std::size_t i = 0; i < ru.nodes.size(); ++i) {
        for (std::size_t j = 0; j < rv.nodes.size(); ++j) {
            const V2 uv(ru.nodes[i], rv.nodes[j]);
            const V2 x = dom.map(uv);
            const double jf = f.gradient(x).norm();
            if (jf < 1e-12) ++vanishing;
            const double area = std::abs(dom.jacobian(uv).determinant());
            out.lhs += ru.weights[i] * rv.weights[j] * checked(g(x) * jf * area, "coarea_formula_check");
        }
    }
    out.flagged = vanishing > ru.nodes.size() * rv.nodes.size() / 100;

    // Level-set length changes character only at corner values and at tangencies
    // with the boundary, which are critical points of f along the edges.
    std::vector<double> breaks;
    const V2 corners[4] = {{dom.u0, dom.v0}, {dom.u1, dom.v0}, {dom.u1, dom.v1}, {dom.u0, dom.v1}};
    for (const V2& c : corners) breaks.push_back(tracer.value(c));
    const int edge_samples = 4096;
    for (int e = 0; e < 4; ++e) {
        const V2 a = corners[e], b = corners[(e + 1) % 4];
        const V2 dir = b - a;
        auto slope = [&](double s) { return tracer.param_gradient(a + s * dir).dot(dir); };
        double prev = slope(0.0);
        for (int i = 1; i <= edge_samples; ++i) {
            const double s = static_cast<double>(i) / edge_samples;
            const double cur = slope(s);
            if (prev * cur < 0.0) {
                const double root = bisect(slope, s - 1.0 / edge_samples, s, 1e-14);
                breaks.push_back(tracer.value(a + root * dir));
            }
            prev = cur;
        }
    }
    breaks = sorted_breaks(std::move(breaks));

    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        const auto rule = quad::composite_gauss_legendre(opts.q_panels, kLineOrder, breaks[b], breaks[b + 1]);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            out.rhs += rule.weights[j] * tracer.level_integral(rule.nodes[j], opts.seed_grid);
        }
    }
    return out;
}

}  // namespace kacrice::geom
