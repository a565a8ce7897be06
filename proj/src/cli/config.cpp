#include "kacrice/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace kacrice::cli {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) throw ConfigError(child(path, key), "unknown key");
    }
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    return j;
}

int get_int(const json& j, const std::string& key, const std::string& path, int def, int min_value) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(child(path, key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < min_value || x > 1'000'000'000) {
        throw ConfigError(child(path, key), "must be an integer >= " + std::to_string(min_value));
    }
    return static_cast<int>(x);
}

double get_double(const json& j, const std::string& key, const std::string& path, double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(child(path, key), "expected a number");
    return v.get<double>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path, const std::string& def,
                       const std::vector<std::string>& choices) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(child(path, key), "expected a string");
    auto s = v.get<std::string>();
    if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
        std::string list;
        for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
        throw ConfigError(child(path, key), "unknown value '" + s + "' (expected one of: " + list + ")");
    }
    return s;
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(index(path, i), "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<int> int_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) throw ConfigError(index(path, i), "expected an integer");
        out.push_back(v[i].get<int>());
    }
    return out;
}

Mat matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(number_list(v[i], index(path, i)));
    const std::size_t cols = rows.front().size();
    Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ConfigError(index(path, i), "ragged matrix row");
        for (std::size_t c = 0; c < cols; ++c) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    return out;
}

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        rows.push_back(row);
    }
    return rows;
}

ModelSpec parse_model(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"kind", "m", "degrees", "matrices", "domain", "dim", "terms", "cov"});
    ModelSpec s;
    s.kind = get_string(j, "kind", path, s.kind, {"kostlan", "mixed_kostlan", "custom_basis"});
    s.m = get_int(j, "m", path, s.m, 1);
    if (s.kind != "custom_basis" && s.m > 2) throw ConfigError(child(path, "m"), "sphere dimension must be 1 or 2");
    if (j.contains("degrees")) {
        s.degrees = int_list(j.at("degrees"), child(path, "degrees"));
        if (s.degrees.empty()) throw ConfigError(child(path, "degrees"), "must not be empty");
        for (std::size_t i = 0; i < s.degrees.size(); ++i) {
            if (s.degrees[i] < 0) throw ConfigError(index(child(path, "degrees"), i), "degree must be nonnegative");
        }
    }
    if (j.contains("matrices")) {
        const json& mats = j.at("matrices");
        if (!mats.is_array() || mats.empty()) throw ConfigError(child(path, "matrices"), "expected a nonempty array of matrices");
        for (std::size_t i = 0; i < mats.size(); ++i) s.matrices.push_back(matrix(mats[i], index(child(path, "matrices"), i)));
        for (std::size_t i = 0; i < s.matrices.size(); ++i) {
            if (s.matrices[i].rows() != s.matrices[0].rows() || s.matrices[i].cols() != s.matrices[0].rows()) {
                throw ConfigError(index(child(path, "matrices"), i), "every matrix must be k x k with the same k");
            }
        }
    } else if (s.kind == "mixed_kostlan") {
        throw ConfigError(child(path, "matrices"), "required for mixed_kostlan");
    }
    s.domain = get_string(j, "domain", path, s.domain, {"circle", "sphere", "cube"});
    s.cube_dim = get_int(j, "dim", path, s.cube_dim, 1);
    if (j.contains("terms")) {
        const json& terms = j.at("terms");
        const std::string tpath = child(path, "terms");
        if (!terms.is_array() || terms.empty()) throw ConfigError(tpath, "expected a nonempty array of terms");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string ipath = index(tpath, i);
            require_object(terms[i], ipath);
            reject_unknown(terms[i], ipath, {"exponent", "direction"});
            if (!terms[i].contains("exponent")) throw ConfigError(child(ipath, "exponent"), "required");
            TermSpec t;
            t.exponent = int_list(terms[i].at("exponent"), child(ipath, "exponent"));
            t.direction = terms[i].contains("direction") ? number_list(terms[i].at("direction"), child(ipath, "direction"))
                                                          : std::vector<double>{1.0};
            s.terms.push_back(std::move(t));
        }
    } else if (s.kind == "custom_basis") {
        throw ConfigError(child(path, "terms"), "required for custom_basis");
    }
    if (j.contains("cov")) s.cov = matrix(j.at("cov"), child(path, "cov"));
    return s;
}

json model_json(const ModelSpec& s) {
    json j;
    j["kind"] = s.kind;
    j["m"] = s.m;
    j["degrees"] = s.degrees;
    if (!s.matrices.empty()) {
        json mats = json::array();
        for (const auto& a : s.matrices) mats.push_back(matrix_json(a));
        j["matrices"] = mats;
    }
    j["domain"] = s.domain;
    j["dim"] = s.cube_dim;
    if (!s.terms.empty()) {
        json terms = json::array();
        for (const auto& t : s.terms) terms.push_back({{"exponent", t.exponent}, {"direction", t.direction}});
        j["terms"] = terms;
    }
    if (s.cov) j["cov"] = matrix_json(*s.cov);
    return j;
}

CurveSpec parse_curve(const json& j, const std::string& path, CurveSpec def) {
    require_object(j, path);
    reject_unknown(j, path, {"type", "normal", "rho"});
    def.type = get_string(j, "type", path, def.type, {"great_circle", "latitude"});
    if (j.contains("normal")) {
        def.normal = number_list(j.at("normal"), child(path, "normal"));
        if (def.normal.size() != 3) throw ConfigError(child(path, "normal"), "expected 3 numbers");
    }
    def.rho = get_double(j, "rho", path, def.rho);
    return def;
}

json curve_json(const CurveSpec& c) { return {{"type", c.type}, {"normal", c.normal}, {"rho", c.rho}}; }

WSpec parse_w(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"type", "y", "radius", "normals", "offset", "curve1", "curve2"});
    WSpec s;
    s.type = get_string(j, "type", path, s.type, {"point", "sphere", "linear", "half_line", "cross", "curves"});
    if (j.contains("y")) s.y = number_list(j.at("y"), child(path, "y"));
    s.radius = get_double(j, "radius", path, s.radius);
    if (!(s.radius > 0.0)) throw ConfigError(child(path, "radius"), "must be positive");
    if (j.contains("normals")) s.normals = matrix(j.at("normals"), child(path, "normals"));
    if (j.contains("offset")) s.offset = number_list(j.at("offset"), child(path, "offset"));
    if (s.type == "linear" && s.normals.size() == 0) throw ConfigError(child(path, "normals"), "required for linear W");
    if (j.contains("curve1")) s.curve1 = parse_curve(j.at("curve1"), child(path, "curve1"), s.curve1);
    if (j.contains("curve2")) s.curve2 = parse_curve(j.at("curve2"), child(path, "curve2"), s.curve2);
    return s;
}

json w_json(const WSpec& s) {
    json j;
    j["type"] = s.type;
    j["y"] = s.y;
    j["radius"] = s.radius;
    if (s.normals.size() > 0) j["normals"] = matrix_json(s.normals);
    j["offset"] = s.offset;
    j["curve1"] = curve_json(s.curve1);
    j["curve2"] = curve_json(s.curve2);
    return j;
}

Params parse_params(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown(j, path, {"n_samples", "mc_samples", "fiber_nodes", "region_nodes", "grid_n", "sphere_grid",
                             "n_rotations", "kinematic_nodes", "kinematic_angles", "R_grid", "epsilon_grid",
                             "degree_grid", "sweep_degrees"});
    Params p;
    p.n_samples = get_int(j, "n_samples", path, p.n_samples, 1);
    p.mc_samples = get_int(j, "mc_samples", path, p.mc_samples, 2);
    p.fiber_nodes = get_int(j, "fiber_nodes", path, p.fiber_nodes, 1);
    p.region_nodes = get_int(j, "region_nodes", path, p.region_nodes, 1);
    p.grid_n = get_int(j, "grid_n", path, p.grid_n, 3);
    p.sphere_grid = get_int(j, "sphere_grid", path, p.sphere_grid, 2);
    p.n_rotations = get_int(j, "n_rotations", path, p.n_rotations, 1);
    p.kinematic_nodes = get_int(j, "kinematic_nodes", path, p.kinematic_nodes, 4);
    p.kinematic_angles = get_int(j, "kinematic_angles", path, p.kinematic_angles, 8);
    if (j.contains("R_grid")) p.R_grid = number_list(j.at("R_grid"), child(path, "R_grid"));
    if (j.contains("epsilon_grid")) {
        p.epsilon_grid = number_list(j.at("epsilon_grid"), child(path, "epsilon_grid"));
        for (std::size_t i = 0; i < p.epsilon_grid.size(); ++i) {
            if (!(p.epsilon_grid[i] >= 0.0 && p.epsilon_grid[i] <= 1.0)) {
                throw ConfigError(index(child(path, "epsilon_grid"), i), "epsilon must lie in [0, 1]");
            }
        }
    }
    if (j.contains("degree_grid")) {
        p.degree_grid = int_list(j.at("degree_grid"), child(path, "degree_grid"));
        for (std::size_t i = 0; i < p.degree_grid.size(); ++i) {
            if (p.degree_grid[i] < 1) throw ConfigError(index(child(path, "degree_grid"), i), "degree must be positive");
        }
    }
    if (j.contains("sweep_degrees")) {
        p.sweep_degrees = int_list(j.at("sweep_degrees"), child(path, "sweep_degrees"));
        if (p.sweep_degrees.size() != 2 || p.sweep_degrees[0] < 0 || p.sweep_degrees[1] < 0 ||
            p.sweep_degrees[0] == p.sweep_degrees[1]) {
            throw ConfigError(child(path, "sweep_degrees"), "expected two distinct nonnegative degrees");
        }
    }
    return p;
}

json params_json(const Params& p) {
    return {{"n_samples", p.n_samples},       {"mc_samples", p.mc_samples},
            {"fiber_nodes", p.fiber_nodes},   {"region_nodes", p.region_nodes},
            {"grid_n", p.grid_n},             {"sphere_grid", p.sphere_grid},
            {"n_rotations", p.n_rotations},   {"kinematic_nodes", p.kinematic_nodes},
            {"kinematic_angles", p.kinematic_angles}, {"R_grid", p.R_grid},
            {"epsilon_grid", p.epsilon_grid}, {"degree_grid", p.degree_grid},
            {"sweep_degrees", p.sweep_degrees}};
}

}  // namespace

const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> names{"point_count", "sphere_count",     "signed_count", "kinematic",
                                                "continuity_sweep", "subgaussian", "selfcheck"};
    return names;
}

ExperimentConfig parse_config(const json& j) {
    require_object(j, "");
    reject_unknown(j, "", {"schema", "experiment", "model", "W", "params", "seed", "output"});
    ExperimentConfig c;
    if (!j.contains("schema")) throw ConfigError("schema", "required (current version is " + std::to_string(kSchemaVersion) + ")");
    c.schema = get_int(j, "schema", "", kSchemaVersion, 0);
    if (c.schema != kSchemaVersion) throw ConfigError("schema", "unsupported version " + std::to_string(c.schema));
    if (!j.contains("experiment")) throw ConfigError("experiment", "required");
    c.experiment = get_string(j, "experiment", "", c.experiment, known_experiments());
    if (j.contains("model")) c.model = parse_model(j.at("model"), "model");
    if (j.contains("W")) c.w = parse_w(j.at("W"), "W");
    if (j.contains("params")) c.params = parse_params(j.at("params"), "params");
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ConfigError("seed", "expected a nonnegative integer");
        }
        c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("output")) {
        const json& o = require_object(j.at("output"), "output");
        reject_unknown(o, "output", {"path", "format"});
        c.output.path = get_string(o, "path", "output", "", {});
        c.output.format = get_string(o, "format", "output", "csv", {"csv", "json"});
    }
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["schema"] = c.schema;
    j["experiment"] = c.experiment;
    j["model"] = model_json(c.model);
    j["W"] = w_json(c.w);
    j["params"] = params_json(c.params);
    j["seed"] = c.seed;
    j["output"] = {{"path", c.output.path}, {"format", c.output.format}};
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace kacrice::cli
