#ifndef FRACORBIT_EXPERIMENT_HPP
#define FRACORBIT_EXPERIMENT_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fracorbit {

// Exit codes used by the CLI: 0 success, 1 configuration error, 2
// numerical failure (Newton divergence, singular system, ...).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericError = 2;

// Runs one experiment described by a JSON config file. Kinds:
//   simulate    -> traces.csv, field_snapshot.csv (d = 1), metadata.json
//   reconstruct -> reconstruction.csv, diagnostics.json
//   stability   -> stability.csv, diagnostics.json
//   verify      -> verify_report.txt, pass/fail per check
// Every run echoes its fully resolved config to resolved_config.json in
// the output directory; re-running from the echo reproduces the run.
// Throws config_error / numeric_error; returns the list of files written.
std::vector<std::filesystem::path> run_experiment(const std::filesystem::path& config_path,
                                                  const std::string& output_dir_override = "");

// Per-column maximum absolute differences between same-named CSV files in
// two run directories. Missing counterpart files or mismatched schemas
// throw config_error.
struct CompareReport {
    struct FileDiff {
        std::string file;
        std::vector<std::string> columns;
        std::vector<double> max_abs_diff;
    };
    std::vector<FileDiff> files;

    double overall_max() const;
    std::string to_string() const;
};

CompareReport compare_runs(const std::filesystem::path& dir_a,
                           const std::filesystem::path& dir_b);

}  // namespace fracorbit

#endif
