#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mrgbsde/meanreflect.hpp"

namespace mrgbsde {

/// One loss curve: affine  slope * x - thr(t),  sin  x + gamma sin(x) - thr(t),
/// thr given by polynomial coefficients in t (constant term first).
struct LossSpec {
    std::string kind = "affine";
    double slope = 1.0;
    double gamma = 0.0;
    std::vector<double> threshold;

    BoundaryCurve build(const Grid& grid) const;
};

/// Flat `section.key = value` experiment file. See README for the key list.
struct ExperimentConfig {
    double sigma_low_sq = 0.0, sigma_high_sq = 0.0;
    double T = 1.0;
    int nt = Grid::default_nt;
    int nx = Grid::default_nx;
    double x_half_width = 0.0;  // 0: 6 sigma_high sqrt(T)
    int substeps = 0;           // 0: smallest CFL-stable count
    PayoffSpec terminal;
    GeneratorSpec gen;
    LossSpec L, R;
    double separation = 0.0;
    Policy policy = Policy::linear_y;
    double tol_iter = 1e-6;
    double tol_flat = -1.0;
    int max_iters = 30;
    double beta = 2.0;
    double kappa_bound = 10.0;
    int boundary_points = 41;
    double game_t = 0.0;
    int game_s_count = 0, game_q_count = 0;
    int verify_trials = 1000;
    int verify_controls = 1000;
    double verify_lambda = 0.05;
    std::string output_dir = "out";
    bool output_field = false;
    std::uint64_t seed = 1;

    /// Every key with its effective value, defaults included, in a fixed order.
    std::vector<std::pair<std::string, std::string>> resolved() const;
    std::string canonical_text() const;
    /// FNV-1a of canonical_text().
    std::uint64_t hash() const;

    VolBounds vol() const;
    Grid grid() const;
    MRInstance instance() const;
};

/// Parse, default and validate. Errors carry `origin:line`.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

/// sum_k c[k] t^k
double poly_eval(const std::vector<double>& c, double t);

}  // namespace mrgbsde
