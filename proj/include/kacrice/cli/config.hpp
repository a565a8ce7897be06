#pragma once

#include "kacrice/geomcore.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kacrice::cli {

/// Invalid configuration; `path()` names the offending key (e.g. "model.degrees[1]").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline constexpr int kSchemaVersion = 1;

struct TermSpec {
    std::vector<int> exponent;
    std::vector<double> direction;
};

struct ModelSpec {
    std::string kind = "kostlan";          // kostlan | mixed_kostlan | custom_basis
    int m = 1;                             // sphere dimension (kostlan, mixed_kostlan)
    std::vector<int> degrees{25};          // kostlan: one degree per component
    std::vector<Mat> matrices;             // mixed_kostlan: A_0..A_d
    std::string domain = "circle";         // custom_basis: circle | sphere | cube
    int cube_dim = 1;                      // custom_basis on a cube
    std::vector<TermSpec> terms;           // custom_basis
    std::optional<Mat> cov;                // custom_basis; identity when absent
};

struct CurveSpec {
    std::string type = "great_circle";     // great_circle | latitude
    std::vector<double> normal{0.0, 0.0, 1.0};
    double rho = 1.0;
};

struct WSpec {
    std::string type = "point";            // point | sphere | linear | half_line | cross | curves
    std::vector<double> y;                 // point; zero vector when empty
    double radius = 1.0;                   // sphere
    Mat normals;                           // linear: one normal per row
    std::vector<double> offset;            // linear
    CurveSpec curve1;
    CurveSpec curve2{"great_circle", {1.0, 0.0, 0.0}, 1.0};
};

struct Params {
    int n_samples = 1000;                  // oracle realizations
    int mc_samples = 2000;                 // inner Monte Carlo samples per fiber node
    int fiber_nodes = 64;
    int region_nodes = 64;
    int grid_n = 512;                      // circle root grid
    int sphere_grid = 16;                  // cells per cube-face edge
    int n_rotations = 1000;
    int kinematic_nodes = 48;
    int kinematic_angles = 128;
    std::vector<double> R_grid{2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32};
    std::vector<double> epsilon_grid;      // continuity sweep
    std::vector<int> degree_grid;          // degree sweep
    std::vector<int> sweep_degrees{4, 9};  // K_eps = (1 - eps) t^d0 + eps t^d1
};

struct OutputSpec {
    std::string path;                      // stdout when empty
    std::string format = "csv";            // csv | json
};

struct ExperimentConfig {
    int schema = kSchemaVersion;
    std::string experiment = "point_count";
    ModelSpec model;
    WSpec w;
    Params params;
    std::uint64_t seed = 1;
    OutputSpec output;
};

[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& c);
/// Read and validate a JSON config file.
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

[[nodiscard]] const std::vector<std::string>& known_experiments();

}  // namespace kacrice::cli
