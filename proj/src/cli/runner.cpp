#include "kacrice/cli/runner.hpp"
#include "kacrice/formulas.hpp"
#include "kacrice/kinematic.hpp"
#include "kacrice/oracle.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

namespace kacrice::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double discrepancy(double oracle_mean, double oracle_se, double formula) {
    if (!std::isfinite(oracle_mean) || !std::isfinite(formula) || !std::isfinite(oracle_se)) return kNaN;
    if (oracle_se > 0.0) return (oracle_mean - formula) / oracle_se;
    return oracle_mean == formula ? 0.0 : kNaN;
}

Record make_record(const std::string& experiment, double x, double formula, const Estimate* oracle, const Estimate& value,
                   std::uint64_t seed) {
    Record r;
    r.experiment = experiment;
    r.x = x;
    r.formula = formula;
    r.oracle_mean = oracle ? oracle->value : kNaN;
    r.oracle_se = oracle ? oracle->std_error : kNaN;
    r.discrepancy_se = discrepancy(r.oracle_mean, r.oracle_se, formula);
    r.n = oracle ? oracle->n : value.n;
    r.seed = seed;
    r.method = value.method;
    r.value = value.value;
    r.std_error = value.std_error;
    r.flagged = value.flagged || value.diverged || (oracle && (oracle->flagged || oracle->diverged));
    return r;
}

void push(RunResult& out, Record r) {
    out.flagged = out.flagged || r.flagged;
    out.records.push_back(std::move(r));
}

Region region_for(const Domain& d, int nodes) {
    switch (d.kind()) {
        case Domain::Kind::Circle: return Region::circle(nodes);
        case Domain::Kind::Sphere: {
            const int polar = std::max(2, static_cast<int>(std::lround(std::sqrt(nodes / 2.0))));
            return Region::sphere(polar, 2 * polar);
        }
        case Domain::Kind::Cube: {
            const int order = std::max(1, static_cast<int>(std::lround(std::pow(nodes, 1.0 / d.dim()))));
            return Region::cube(d.dim(), order);
        }
    }
    throw DomainError("unsupported domain");
}

// Σ0 = K0 and Σ1 = the first k x k block of K1 at a reference point (isotropic models only).
std::pair<Mat, Mat> sigma_pair(const grf::FieldModel& model) {
    Vec p = Vec::Zero(model.domain().ambient_dim());
    p(0) = 1.0;
    const grf::JetCovariance jet = grf::jet_covariance(model, p);
    const int k = model.output_dim();
    return {jet.K0, jet.K1.topLeftCorner(k, k)};
}

MonteCarlo mc_of(const ExperimentConfig& c) { return MonteCarlo{c.params.mc_samples, c.params.fiber_nodes, c.seed, 0.0}; }

Vec point_value(const WSpec& w, int k) {
    if (w.y.empty()) return Vec::Zero(k);
    if (static_cast<int>(w.y.size()) != k) throw ConfigError("W.y", "expected " + std::to_string(k) + " numbers");
    return Eigen::Map<const Vec>(w.y.data(), k);
}

oracle::CountOp circle_zero_op(const Vec& y, const oracle::CircleGrid& grid) {
    const double y0 = y(0);
    return [y0, grid](const grf::Realization& r) {
        oracle::CountSample s = oracle::count_zeros_circle([&](double t) { return r.value(circle_point(t))(0) - y0; }, grid);
        s.seed = r.seed();
        return s;
    };
}

Estimate circle_oracle(const std::shared_ptr<const grf::FieldModel>& model, const Vec& y, const ExperimentConfig& c) {
    return oracle::mc_expected_count(model, circle_zero_op(y, {c.params.grid_n, 1e-12}), c.params.n_samples, c.seed);
}

Estimate sphere_oracle(const std::shared_ptr<const grf::FieldModel>& model, const ExperimentConfig& c) {
    const oracle::SphereGrid grid{c.params.sphere_grid};
    return oracle::mc_expected_count(
        model, [grid](const grf::Realization& r) { return oracle::count_common_zeros_sphere(r, grid); }, c.params.n_samples,
        c.seed);
}

Estimate scaled(Estimate e, double factor) {
    e.value *= factor;
    e.std_error *= factor;
    return e;
}

RunResult point_count(const ExperimentConfig& c, double x) {
    const auto model = build_model(c.model);
    const int k = model->output_dim(), dim = model->domain().dim();
    const Vec y = point_value(c.w, k);
    const LevelSetW w = LevelSetW::point(y);
    double formula = kNaN;
    if (model->isotropic() && k == dim) {
        const auto [s0, s1] = sigma_pair(*model);
        formula = isotropic_point_count(s0, s1, y);
    }
    const Estimate value = expected_count(*model, w, region_for(model->domain(), c.params.region_nodes), mc_of(c));
    std::optional<Estimate> orc;
    if (model->domain().kind() == Domain::Kind::Circle && k == 1) {
        orc = circle_oracle(model, y, c);
    } else if (model->domain().kind() == Domain::Kind::Sphere && k == 2 && y.isZero(0.0)) {
        orc = scaled(sphere_oracle(model, c), 2.0);  // sphere count = 2 x projective count
    }
    RunResult out;
    push(out, make_record("point_count", x, formula, orc ? &*orc : nullptr, value, c.seed));
    return out;
}

RunResult sphere_count(const ExperimentConfig& c) {
    const auto model = build_model(c.model);
    const int k = model->output_dim(), dim = model->domain().dim();
    RunResult out;
    if (c.w.type == "point") {
        if (model->domain().kind() != Domain::Kind::Sphere || k != 2) {
            throw ConfigError("model", "sphere_count with a point W needs a two-component field on S^2");
        }
        const Vec y = point_value(c.w, k);
        if (!y.isZero(0.0)) throw ConfigError("W.y", "projective counts are defined for y = 0 only");
        double formula = kNaN;
        if (c.model.kind == "kostlan") formula = shub_smale(c.model.degrees);
        else if (c.model.kind == "mixed_kostlan") formula = 0.5 * mixed_kostlan_count(c.model.matrices);
        const Estimate value = scaled(expected_count(*model, LevelSetW::point(y), region_for(model->domain(), c.params.region_nodes), mc_of(c)), 0.5);
        const Estimate orc = sphere_oracle(model, c);
        push(out, make_record("sphere_count", 0.0, formula, &orc, value, c.seed));
        return out;
    }
    const LevelSetW w = build_w(c.w, k);
    if (!model->isotropic()) throw ConfigError("model.kind", "sphere_count with a level set needs an isotropic model");
    if (w.codim != dim) throw ConfigError("W", "codimension of W must equal the sphere dimension");
    const auto [s0, s1] = sigma_pair(*model);
    const Estimate closed = isotropic_sphere_count(s0, s1, w, dim, std::max(c.params.fiber_nodes, 16), c.seed);
    const Estimate value = expected_count(*model, w, region_for(model->domain(), c.params.region_nodes), mc_of(c));
    std::optional<Estimate> orc;
    if (c.w.type == "sphere" && model->domain().kind() == Domain::Kind::Circle && k == 2) {
        const double r2 = c.w.radius * c.w.radius;
        const oracle::CircleGrid grid{c.params.grid_n, 1e-12};
        orc = oracle::mc_expected_count(
            model,
            [r2, grid](const grf::Realization& r) {
                auto s = oracle::count_zeros_circle([&](double t) { return r.value(circle_point(t)).squaredNorm() - r2; }, grid);
                s.seed = r.seed();
                return s;
            },
            c.params.n_samples, c.seed);
    }
    push(out, make_record("sphere_count", c.w.radius, closed.value, orc ? &*orc : nullptr, value, c.seed));
    Record cub = make_record("sphere_count", c.w.radius, closed.value, nullptr, closed, c.seed);
    push(out, cub);
    return out;
}

RunResult signed_count(const ExperimentConfig& c) {
    const auto model = build_model(c.model);
    if (model->domain().kind() != Domain::Kind::Circle || model->output_dim() != 1) {
        throw ConfigError("model", "signed_count needs a scalar field on S^1");
    }
    const Vec y = point_value(c.w, 1);
    if (!y.isZero(0.0)) throw ConfigError("W.y", "signed_count supports y = 0 only");
    const Estimate value = expected_count(*model, LevelSetW::point(y), region_for(model->domain(), c.params.region_nodes),
                                          mc_of(c), WeightFn::orientation_sign());
    const oracle::CircleGrid grid{c.params.grid_n, 1e-12};
    const Estimate orc = oracle::mc_expected_count(
        model, [grid](const grf::Realization& r) { return oracle::count_signed_zeros_circle(r, grid); }, c.params.n_samples,
        c.seed);
    RunResult out;
    Record r = make_record("signed_count", 0.0, 0.0, &orc, value, c.seed);
    r.method = "kac_rice_signed_integral";
    push(out, r);
    return out;
}

SphereCurve build_curve(const CurveSpec& s, const std::string& path) {
    if (s.type == "latitude") {
        if (!(s.rho > 0.0 && s.rho < std::numbers::pi)) throw ConfigError(path + ".rho", "must lie in (0, pi)");
        return SphereCurve::latitude(s.rho);
    }
    const Eigen::Vector3d n(s.normal[0], s.normal[1], s.normal[2]);
    if (!(n.norm() > 0.0)) throw ConfigError(path + ".normal", "must be nonzero");
    return SphereCurve::great_circle(n);
}

RunResult kinematic(const ExperimentConfig& c) {
    const SphereCurve c1 = build_curve(c.w.curve1, "W.curve1"), c2 = build_curve(c.w.curve2, "W.curve2");
    const Estimate rhs = kinematic_rhs_sphere(c1, c2, {c.params.kinematic_nodes, c.params.kinematic_nodes, c.params.kinematic_angles});
    const Estimate orc = oracle::kinematic_mc(c1, c2, {c.params.n_rotations, 9e-4}, c.seed);
    RunResult out;
    push(out, make_record("kinematic", 0.0, rhs.value, &orc, rhs, c.seed));
    return out;
}

RunResult continuity(const ExperimentConfig& c, const std::vector<double>& grid) {
    RunResult out;
    const int d0 = c.params.sweep_degrees[0], d1 = c.params.sweep_degrees[1];
    for (double eps : grid) {
        std::vector<Mat> mats(static_cast<std::size_t>(std::max(d0, d1) + 1), Mat::Zero(1, 1));
        mats[static_cast<std::size_t>(d0)](0, 0) = std::sqrt(1.0 - eps);
        mats[static_cast<std::size_t>(d1)](0, 0) = std::sqrt(eps);
        const auto model = grf::isotropic_model(grf::IsotropicModel{mats}, 1);
        const double formula = mixed_kostlan_count(mats);
        // The same seed at every epsilon keeps the inner samples common across the sweep.
        const Estimate value = expected_count(*model, LevelSetW::point(Vec::Zero(1)), Region::circle(c.params.region_nodes), mc_of(c));
        const Estimate orc = circle_oracle(model, Vec::Zero(1), c);
        push(out, make_record("continuity_sweep", eps, formula, &orc, value, c.seed));
    }
    return out;
}

RunResult subgaussian(const ExperimentConfig& c) {
    int k = 0;
    if (c.w.type == "linear") k = static_cast<int>(c.w.normals.cols());
    else if (c.w.type == "sphere") k = 2;
    else if (c.w.type == "cross") k = 2;
    else if (c.w.type == "half_line") k = 1;
    else throw ConfigError("W.type", "subgaussian needs a level set W (linear, sphere, cross or half_line)");
    const LevelSetW w = build_w(c.w, k);
    if (c.params.R_grid.size() < 3) throw ConfigError("params.R_grid", "at least 3 radii are required");
    const SubGaussianFit fit = subgaussian_diagnostic(w, c.params.R_grid, c.params.fiber_nodes, c.seed);
    RunResult out;
    for (std::size_t i = 0; i < fit.radii.size(); ++i) {
        Estimate v;
        v.value = fit.volumes[i];
        v.n = c.params.fiber_nodes;
        v.method = "volume";
        push(out, make_record("subgaussian", fit.radii[i], kNaN, nullptr, v, c.seed));
    }
    Estimate eps;
    eps.value = fit.epsilon;
    eps.n = static_cast<long long>(fit.radii.size());
    eps.method = "subgaussian_epsilon";
    push(out, make_record("subgaussian", kNaN, kNaN, nullptr, eps, c.seed));
    return out;
}

Mat random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal;
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
    return m;
}

RunResult selfcheck(std::uint64_t seed) {
    RunResult out;
    auto check = [&](const std::string& method, double x, double formula, double value, bool ok) {
        Estimate e;
        e.value = value;
        e.n = 1;
        e.method = method;
        e.flagged = !ok;
        push(out, make_record("selfcheck", x, formula, nullptr, e, seed));
    };
    for (int m = 1; m <= 8; ++m) {
        const auto [lhs, rhs] = gamma_identity_check(m);
        check("gamma_identity", m, rhs, lhs, std::abs(lhs - rhs) <= 1e-12 * rhs);
    }
    std::mt19937_64 rng(seed);
    double worst_complement = 0.0, worst_projection = 0.0, worst_symmetry = 0.0;
    const int pairs = 500;
    for (int t = 0; t < pairs; ++t) {
        const int n = 5 + t % 4;
        std::uniform_int_distribution<int> dim(1, n - 1);
        const auto v = geom::Subspace::span(random_matrix(rng, n, dim(rng)));
        const auto w = geom::Subspace::span(random_matrix(rng, n, dim(rng)));
        const double s = geom::principal_angle(v, w);
        worst_symmetry = std::max(worst_symmetry, std::abs(s - geom::principal_angle(w, v)));
        worst_complement = std::max(worst_complement,
                                    std::abs(s - geom::principal_angle(v.orthogonal_complement(), w.orthogonal_complement())));
        if (!v.contains(w)) worst_projection = std::max(worst_projection, std::abs(s - geom::angle_via_projection(v, w)));
    }
    check("angle_symmetry", pairs, 0.0, worst_symmetry, worst_symmetry < 1e-9);
    check("angle_complement", pairs, 0.0, worst_complement, worst_complement < 1e-9);
    check("angle_projection", pairs, 0.0, worst_projection, worst_projection < 1e-9);
    for (int d : {1, 4, 25}) {
        const auto model = grf::kostlan_model(1, d);
        const grf::JetCovariance jet = grf::jet_covariance(*model, circle_point(0.37));
        const double err = std::max({std::abs(jet.K0(0, 0) - 1.0), jet.K01.cwiseAbs().maxCoeff(), std::abs(jet.K1(0, 0) - d)});
        check("kostlan_jet", d, d, jet.K1(0, 0), err < 1e-10);
    }
    return out;
}

std::string number(double v) {
    if (!std::isfinite(v)) return {};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string json_number(double v) {
    const std::string s = number(v);
    return s.empty() ? "null" : s;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{"experiment", "x",      "formula", "oracle_mean", "oracle_se", "discrepancy_se",
                                               "n",          "seed",   "method",  "value",       "std_error", "flagged"};
    return cols;
}

std::shared_ptr<const grf::FieldModel> build_model(const ModelSpec& spec) {
    if (spec.kind == "kostlan") return grf::kostlan_system(spec.m, spec.degrees);
    if (spec.kind == "mixed_kostlan") return grf::isotropic_model(grf::IsotropicModel{spec.matrices}, spec.m);
    Domain domain = spec.domain == "circle" ? Domain::circle() : spec.domain == "sphere" ? Domain::sphere() : Domain::cube(spec.cube_dim);
    std::vector<grf::Term> terms;
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const auto& t = spec.terms[i];
        if (static_cast<int>(t.exponent.size()) != domain.ambient_dim()) {
            throw ConfigError("model.terms[" + std::to_string(i) + "].exponent",
                              "expected " + std::to_string(domain.ambient_dim()) + " exponents");
        }
        if (t.direction.size() != spec.terms.front().direction.size()) {
            throw ConfigError("model.terms[" + std::to_string(i) + "].direction", "all directions must have the same length");
        }
        terms.push_back({t.exponent, Eigen::Map<const Vec>(t.direction.data(), static_cast<Eigen::Index>(t.direction.size()))});
    }
    const auto n = static_cast<Eigen::Index>(terms.size());
    Mat cov = spec.cov ? *spec.cov : Mat(Mat::Identity(n, n));
    if (cov.rows() != n || cov.cols() != n) throw ConfigError("model.cov", "expected a " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
    if (grf::min_eigenvalue(0.5 * (cov + cov.transpose())) < -1e-12) throw ConfigError("model.cov", "must be positive semidefinite");
    return grf::custom_model(domain, std::move(terms), std::move(cov));
}

LevelSetW build_w(const WSpec& spec, int k) {
    if (spec.type == "point") return LevelSetW::point(point_value(spec, k));
    if (spec.type == "sphere") {
        if (k != 2 && k != 3) throw ConfigError("W.type", "a sphere W needs a field with 2 or 3 components");
        return LevelSetW::sphere(spec.radius, k);
    }
    if (spec.type == "linear") {
        if (spec.normals.cols() != k) throw ConfigError("W.normals", "each normal must have " + std::to_string(k) + " entries");
        Vec offset = Vec::Zero(k);
        if (!spec.offset.empty()) {
            if (static_cast<int>(spec.offset.size()) != k) throw ConfigError("W.offset", "expected " + std::to_string(k) + " numbers");
            offset = Eigen::Map<const Vec>(spec.offset.data(), k);
        }
        return LevelSetW::linear(spec.normals.transpose(), offset);
    }
    if (spec.type == "half_line") {
        if (k != 1) throw ConfigError("W.type", "half_line needs a scalar field");
        return LevelSetW::half_line();
    }
    if (spec.type == "cross") {
        if (k != 2) throw ConfigError("W.type", "cross needs a two-component field");
        return LevelSetW::cross();
    }
    throw ConfigError("W.type", "'" + spec.type + "' is not a level set");
}

RunResult run_experiment(const ExperimentConfig& c) {
    if (c.experiment == "point_count") {
        return point_count(c, c.model.kind == "kostlan" && !c.model.degrees.empty() ? c.model.degrees.front() : 0.0);
    }
    if (c.experiment == "sphere_count") return sphere_count(c);
    if (c.experiment == "signed_count") return signed_count(c);
    if (c.experiment == "kinematic") return kinematic(c);
    if (c.experiment == "continuity_sweep") {
        return continuity(c, c.params.epsilon_grid.empty() ? std::vector<double>{0.0, 0.001, 0.01, 0.1, 0.5, 1.0}
                                                            : c.params.epsilon_grid);
    }
    if (c.experiment == "subgaussian") return subgaussian(c);
    if (c.experiment == "selfcheck") return selfcheck(c.seed);
    throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
}

RunResult run_sweep(const ExperimentConfig& c) {
    if (!c.params.epsilon_grid.empty()) return continuity(c, c.params.epsilon_grid);
    if (c.params.degree_grid.empty()) throw ConfigError("params", "sweep needs a nonempty epsilon_grid or degree_grid");
    RunResult out;
    for (int d : c.params.degree_grid) {
        ExperimentConfig one = c;
        one.model = ModelSpec{};
        one.model.kind = "kostlan";
        one.model.m = 1;
        one.model.degrees = {d};
        one.w = WSpec{};
        RunResult r = point_count(one, d);
        for (auto& rec : r.records) rec.experiment = "degree_sweep";
        for (auto& rec : r.records) push(out, rec);
    }
    return out;
}

std::string format_records(const std::vector<Record>& records, const std::string& format) {
    std::string out;
    if (format == "csv") {
        const auto& cols = csv_columns();
        for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
        out += "\n";
        for (const auto& r : records) {
            out += r.experiment + "," + number(r.x) + "," + number(r.formula) + "," + number(r.oracle_mean) + "," +
                   number(r.oracle_se) + "," + number(r.discrepancy_se) + "," + std::to_string(r.n) + "," +
                   std::to_string(r.seed) + "," + r.method + "," + number(r.value) + "," + number(r.std_error) + "," +
                   (r.flagged ? "1" : "0") + "\n";
        }
        return out;
    }
    if (format != "json") throw ConfigError("--format", "expected csv or json");
    for (const auto& r : records) {
        out += "{\"experiment\":" + nlohmann::json(r.experiment).dump() + ",\"x\":" + json_number(r.x) +
               ",\"formula\":" + json_number(r.formula) + ",\"oracle_mean\":" + json_number(r.oracle_mean) +
               ",\"oracle_se\":" + json_number(r.oracle_se) + ",\"discrepancy_se\":" + json_number(r.discrepancy_se) +
               ",\"n\":" + std::to_string(r.n) + ",\"seed\":" + std::to_string(r.seed) +
               ",\"method\":" + nlohmann::json(r.method).dump() + ",\"value\":" + json_number(r.value) +
               ",\"std_error\":" + json_number(r.std_error) + ",\"flagged\":" + (r.flagged ? "true" : "false") + "}\n";
    }
    return out;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Kac-Rice expected-count experiments"};
    app.require_subcommand(1);
    std::string config_path, out_path, format;
    std::optional<std::uint64_t> seed_flag;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed_flag, "Master seed (overrides KACRICE_SEED and the config)");
        sub->add_option("--out", out_path, "Output file (default: config output.path or stdout)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("--config", config_path, "JSON config")->required();
    add_common(run);
    CLI::App* self = app.add_subcommand("selfcheck", "Geometry invariants and Gamma identity");
    add_common(self);
    CLI::App* sweep = app.add_subcommand("sweep", "Run an epsilon_grid or degree_grid sweep");
    sweep->add_option("--config", config_path, "JSON config")->required();
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig config;
        if (self->parsed()) {
            config.experiment = "selfcheck";
        } else {
            config = load_config(config_path);
        }
        if (const char* env = std::getenv("KACRICE_SEED")) {
            try {
                std::size_t used = 0;
                const unsigned long long v = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
                config.seed = v;
            } catch (const std::exception&) {
                throw ConfigError("KACRICE_SEED", "expected a nonnegative integer");
            }
        }
        if (seed_flag) config.seed = *seed_flag;
        if (!out_path.empty()) config.output.path = out_path;
        if (!format.empty()) config.output.format = format;

        const RunResult result = sweep->parsed() ? run_sweep(config) : run_experiment(config);
        const std::string text = format_records(result.records, config.output.format);
        if (config.output.path.empty()) {
            std::cout << text << std::flush;
        } else {
            std::ofstream file(config.output.path, std::ios::binary);
            if (!file) throw ConfigError("output.path", "cannot write '" + config.output.path + "'");
            file << text;
        }
        return result.flagged ? 3 : 0;
    } catch (const ConfigError& e) {
        std::cerr << "kacrice: invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "kacrice: invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "kacrice: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace kacrice::cli
