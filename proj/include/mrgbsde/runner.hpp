#pragma once

#include <exception>
#include <iosfwd>
#include <string>

#include "mrgbsde/config.hpp"

namespace mrgbsde {

/// Process exit codes.
enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_convergence = 3,
    exit_check_failed = 4,
    exit_regression = 5,
    exit_precondition = 6,
};

int exit_code_for(const std::exception& e);

/// cfg.output_dir unless MRGBSDE_OUTPUT_DIR is set.
std::string output_dir(const ExperimentConfig& cfg);

/// results.csv, iterations.csv, [field.csv], manifest.json.
int run_solve(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Suites: skorokhod, gexp, classical-limit, kprocess, flatness, game, comparison, all.
/// Writes verify_<suite>.csv and manifest.json.
int run_verify(const ExperimentConfig& cfg, const std::string& suite, const std::string& out_dir,
               std::ostream& log);

/// Solve, then game.csv (and linear_game.csv when the instance fits the linear form).
int run_game(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);

/// Regenerates solve + game outputs into `work_dir` and compares them against
/// `golden_dir` (numbers within 1e-12). With `bless` the goldens are rewritten.
int run_regress(const ExperimentConfig& cfg, const std::string& golden_dir,
                const std::string& work_dir, bool bless, std::ostream& log);

struct CsvDiff {
    int differences = 0;
    std::string report;
};

/// Cell-wise comparison; cells that both parse as numbers use |a - b| <= tol max(1, |a|, |b|).
CsvDiff compare_csv(const std::string& golden, const std::string& fresh, double tol = 1e-12);

}  // namespace mrgbsde
