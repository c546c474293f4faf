#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrgbsde/gametheory.hpp"

namespace mrgbsde {

struct CheckRow {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct SuiteReport {
    std::string id;
    std::vector<CheckRow> rows;

    void add(std::string name, double value, double bound, bool pass);
    bool ok() const;
    int failures() const;
};

/// Random affine backward problems: stability and growth bounds per trial.
SuiteReport suite_skorokhod(std::uint64_t seed, int trials, int nt = 100);

/// Second moments, sublinearity, monotonicity and constants of the engine.
SuiteReport suite_gexp(const VolBounds& vb, const Grid& grid, std::uint64_t seed);

/// sigma_low = sigma_high against Gaussian closed forms (within 2%).
SuiteReport suite_classical(double sigma_sq, double T, int nt, int nx);

/// K along random controls and paths never increases; sup-DP of K_T is 0.
SuiteReport suite_kprocess(const MRSolution& sol, const MRInstance& inst, std::uint64_t seed,
                           int controls);

/// Flatness sums and admissibility of a solved instance.
SuiteReport suite_flatness(const MRSolution& sol, const MRInstance& inst);

/// Inequality chain, minimax inequality, equality case, linear game when applicable.
SuiteReport suite_game(const MRSolution& sol, const MRInstance& inst, const GameGrid& gg);

/// Ordered-loss comparisons against randomly raised losses, and the sandwich.
SuiteReport suite_comparison(const MRInstance& inst, std::uint64_t seed, int instances,
                             double lambda);

/// Header `check,value,bound,pass`.
void write_suite_csv(std::ostream& os, const SuiteReport& r);

}  // namespace mrgbsde
