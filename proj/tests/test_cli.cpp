#include "doctest.h"

#include "kacrice/cli/config.hpp"
#include "kacrice/cli/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace kacrice;
using namespace kacrice::cli;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "kacrice_test_cli";
    std::filesystem::create_directories(dir);
    return dir / name;
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "kacrice");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string error_path(const json& j) {
    try {
        (void)parse_config(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

json small_kostlan(int d) {
    return json{{"schema", 1},
                {"experiment", "point_count"},
                {"model", {{"kind", "kostlan"}, {"m", 1}, {"degrees", {d}}}},
                {"params", {{"n_samples", 100}, {"mc_samples", 200}, {"region_nodes", 16}}},
                {"seed", 3}};
}

}  // namespace

TEST_CASE("config round-trips through json") {
    const json full = {
        {"schema", 1},
        {"experiment", "sphere_count"},
        {"model", {{"kind", "mixed_kostlan"}, {"m", 1}, {"matrices", {{{1.0, 0.0}, {0.0, 1.0}}, {{0.5, 0.25}, {0.0, 2.0}}}}}},
        {"W", {{"type", "linear"}, {"normals", {{0.6, 0.8}}}, {"offset", {0.1, -0.2}}}},
        {"params", {{"n_samples", 123}, {"epsilon_grid", {0.0, 0.1}}, {"R_grid", {1.5, 2.5, 3.5}}}},
        {"seed", 77},
        {"output", {{"format", "json"}}}};
    const ExperimentConfig c = parse_config(full);
    const json once = to_json(c);
    const json twice = to_json(parse_config(once));
    CHECK(once == twice);
    CHECK(once.dump() == twice.dump());
    CHECK(c.params.n_samples == 123);
    CHECK(c.params.fiber_nodes == Params{}.fiber_nodes);
    CHECK(c.seed == 77);
    CHECK(c.model.matrices.at(1)(0, 1) == 0.25);

    const json defaults = to_json(parse_config(json{{"schema", 1}, {"experiment", "selfcheck"}}));
    for (const char* key : {"n_samples", "mc_samples", "fiber_nodes", "region_nodes", "grid_n", "sphere_grid", "n_rotations",
                            "kinematic_nodes", "kinematic_angles", "R_grid"}) {
        CHECK(defaults.at("params").contains(key));
    }
}

TEST_CASE("config errors carry the offending key path") {
    json j = small_kostlan(4);
    j["params"]["n_sample"] = 3;
    CHECK(error_path(j) == "params.n_sample");

    json bad_exp = small_kostlan(4);
    bad_exp["experiment"] = "nonsense";
    CHECK(error_path(bad_exp) == "experiment");

    json bad_degree = small_kostlan(4);
    bad_degree["model"]["degrees"] = {4, -1};
    CHECK(error_path(bad_degree) == "model.degrees[1]");

    json no_schema = small_kostlan(4);
    no_schema.erase("schema");
    CHECK(error_path(no_schema) == "schema");

    json wrong_schema = small_kostlan(4);
    wrong_schema["schema"] = 2;
    CHECK(error_path(wrong_schema) == "schema");

    json bad_format = small_kostlan(4);
    bad_format["output"] = {{"format", "xml"}};
    CHECK(error_path(bad_format) == "output.format");
}

TEST_CASE("point_count record for kostlan d = 25") {
    const auto r = run_experiment(parse_config(small_kostlan(25)));
    REQUIRE_FALSE(r.records.empty());
    const Record& rec = r.records.front();
    CHECK(rec.formula == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(rec.n <= 100);
    CHECK(rec.n >= 95);  // unresolved realizations are excluded
    CHECK(std::isfinite(rec.discrepancy_se));
    CHECK(rec.discrepancy_se == doctest::Approx((rec.oracle_mean - rec.formula) / rec.oracle_se));
}

TEST_CASE("kinematic experiment for two great circles") {
    json j{{"schema", 1}, {"experiment", "kinematic"}, {"W", {{"type", "curves"}}}, {"params", {{"n_rotations", 100}}}};
    const auto r = run_experiment(parse_config(j));
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].formula == doctest::Approx(2.0).epsilon(0.01));
    CHECK(r.records[0].oracle_mean == 2.0);
    CHECK(r.records[0].oracle_se == 0.0);
}

TEST_CASE("csv and json encodings carry identical fields") {
    const auto r = run_experiment(parse_config(small_kostlan(4)));
    const std::string csv = format_records(r.records, "csv");
    const std::string jsonl = format_records(r.records, "json");

    std::istringstream cs(csv);
    std::string header;
    std::getline(cs, header);
    std::vector<std::string> cols;
    std::stringstream hs(header);
    for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
    CHECK(cols == csv_columns());
    const std::vector<std::string> leading{"experiment", "x", "formula", "oracle_mean", "oracle_se", "discrepancy_se", "n", "seed"};
    CHECK(std::equal(leading.begin(), leading.end(), cols.begin()));
    for (const char* req : {"method", "seed", "n", "value", "std_error"}) {
        CHECK(std::find(cols.begin(), cols.end(), req) != cols.end());
    }

    std::istringstream js(jsonl);
    std::size_t lines = 0;
    for (std::string line; std::getline(js, line); ++lines) {
        const json rec = json::parse(line);
        std::set<std::string> keys;
        for (auto it = rec.begin(); it != rec.end(); ++it) keys.insert(it.key());
        CHECK(keys == std::set<std::string>(cols.begin(), cols.end()));
    }
    CHECK(lines == r.records.size());
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.back() == '\n');
}

TEST_CASE("same config and seed gives identical output") {
    const auto c = parse_config(small_kostlan(9));
    CHECK(format_records(run_experiment(c).records, "csv") == format_records(run_experiment(c).records, "csv"));
    auto other = c;
    other.seed = 4;
    CHECK(format_records(run_experiment(other).records, "csv") != format_records(run_experiment(c).records, "csv"));
}

TEST_CASE("degree sweep formulas follow 2 sqrt(d)") {
    json j = small_kostlan(1);
    j["params"]["degree_grid"] = {1, 4, 9, 16, 25};
    j["params"]["n_samples"] = 20;
    const auto r = run_sweep(parse_config(j));
    std::vector<double> formulas;
    for (const auto& rec : r.records) {
        if (rec.experiment == "degree_sweep" && rec.method.find("oracle") == std::string::npos) formulas.push_back(rec.formula);
    }
    std::vector<double> expected{2, 4, 6, 8, 10};
    std::vector<double> distinct;
    for (double f : formulas) {
        if (distinct.empty() || distinct.back() != f) distinct.push_back(f);
    }
    REQUIRE(distinct.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(distinct[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("single-point grid gives a single record") {
    json j = small_kostlan(4);
    j["experiment"] = "continuity_sweep";
    j["params"]["epsilon_grid"] = {0.5};
    const auto r = run_sweep(parse_config(j));
    CHECK(r.records.size() == 1);
    CHECK(r.records[0].x == 0.5);
    CHECK_THROWS_AS((void)run_sweep(parse_config(small_kostlan(4))), ConfigError);
}

TEST_CASE("command line entry point") {
    const auto cfg = scratch("cfg.json");
    {
        std::ofstream out(cfg);
        out << small_kostlan(4).dump(2);
    }
    const auto a = scratch("a.csv"), b = scratch("b.csv"), c = scratch("c.csv");
    CHECK(invoke({"run", "--config", cfg.string(), "--out", a.string()}) == 0);
    CHECK(invoke({"run", "--config", cfg.string(), "--out", b.string()}) == 0);
    CHECK(read_file(a) == read_file(b));
    CHECK_FALSE(read_file(a).empty());

    CHECK(invoke({"run", "--config", cfg.string(), "--seed", "11", "--out", c.string()}) == 0);
    CHECK(read_file(c).find(",11,") != std::string::npos);

    ::setenv("KACRICE_SEED", "12", 1);
    CHECK(invoke({"run", "--config", cfg.string(), "--out", c.string()}) == 0);
    CHECK(read_file(c).find(",12,") != std::string::npos);
    CHECK(invoke({"run", "--config", cfg.string(), "--seed", "13", "--out", c.string()}) == 0);
    CHECK(read_file(c).find(",13,") != std::string::npos);
    ::unsetenv("KACRICE_SEED");

    CHECK(invoke({"selfcheck", "--out", c.string()}) == 0);

    const auto bad = scratch("bad.json");
    {
        std::ofstream out(bad);
        out << R"({"schema": 1, "experiment": "point_count", "model": {"kind": "kostlan", "colour": 3}})";
    }
    CHECK(invoke({"run", "--config", bad.string(), "--out", c.string()}) == 2);
    CHECK(invoke({"run", "--config", scratch("missing.json").string()}) == 2);
    CHECK(invoke({"run"}) == 2);
}
