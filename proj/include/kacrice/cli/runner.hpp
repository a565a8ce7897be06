#pragma once

#include "kacrice/cli/config.hpp"
#include "kacrice/grf.hpp"
#include "kacrice/levelset.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace kacrice::cli {

/// One output row. NaN marks a column that does not apply.
struct Record {
    std::string experiment;
    double x = 0.0;
    double formula = 0.0;
    double oracle_mean = 0.0;
    double oracle_se = 0.0;
    double discrepancy_se = 0.0;
    long long n = 0;
    std::uint64_t seed = 0;
    std::string method;
    double value = 0.0;
    double std_error = 0.0;
    bool flagged = false;
};

struct RunResult {
    std::vector<Record> records;
    bool flagged = false;
};

/// Fixed CSV column order.
[[nodiscard]] const std::vector<std::string>& csv_columns();

[[nodiscard]] std::shared_ptr<const grf::FieldModel> build_model(const ModelSpec& spec);
[[nodiscard]] LevelSetW build_w(const WSpec& spec, int k);

/// Execute the experiment named in the config.
[[nodiscard]] RunResult run_experiment(const ExperimentConfig& config);
/// Execute a continuity (epsilon_grid) or degree (degree_grid) sweep.
[[nodiscard]] RunResult run_sweep(const ExperimentConfig& config);

/// CSV with header row, or JSON-lines; LF line endings, doubles printed with 17 significant digits.
[[nodiscard]] std::string format_records(const std::vector<Record>& records, const std::string& format);

/// Command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace kacrice::cli
