#pragma once

#include <iosfwd>
#include <vector>

#include "mrgbsde/meanreflect.hpp"

namespace mrgbsde {

/// Base time and deterministic stopping sets, all as coarse indices in [t, nt].
struct GameGrid {
    int t = 0;
    std::vector<int> S_set, Q_set;

    /// count <= 0 takes every coarse time in [t, nt]; otherwise `count` evenly
    /// spread times that always include t and nt.
    static GameGrid make(const Grid& grid, int t, int s_count = 0, int q_count = 0);
    void validate(const Grid& grid) const;
};

/// Roots of the four centred boundaries on the coarse grid. The "up" rows use
/// the upper centring x + Ytilde - E^[Ytilde], the "lo" rows x + Ytilde + E^[-Ytilde].
struct Thresholds {
    std::vector<double> t, r_up, l_up, r_lo, l_lo;
};

Thresholds thresholds(const MRSolution& sol, const MRInstance& inst);

struct GameValues {
    GameGrid gg;
    std::vector<std::vector<double>> upper, lower;  // [s][q]
    double supinf_upper = 0.0;  // sup_q inf_s upper
    double infsup_upper = 0.0;
    double supinf_lower = 0.0;
    double infsup_lower = 0.0;  // inf_s sup_q lower
    double E_Y = 0.0, negE_negY = 0.0;
    int s_star = 0, q_star = 0;  // coarse indices
    double tol = 0.0;
    bool chain_ok = false;
    bool no_mean_uncertainty = false;
    bool equality_ok = true;  // only meaningful without mean uncertainty
};

/// Upper and lower game matrices at gg.t, their reductions and the ordering
/// lower game <= -E^[-Y_t] <= E^[Y_t] <= upper game within 20 (h + dt).
GameValues optim_bounds(const MRSolution& sol, const MRInstance& inst, const GameGrid& gg);

struct LinearGame {
    GameGrid gg;
    std::vector<std::vector<double>> value;  // [s][q] = E^[y_t^{s ^ q}]
    double supinf = 0.0, infsup = 0.0, E_Y = 0.0;
    int s_star = 0, q_star = 0;    // first touching times of the mean curve
    int s_brute = 0, q_brute = 0;  // argmin_s sup_q, argmax_q inf_s (earliest on ties)
    double saddle_value = 0.0;
    double tol = 0.0;
    bool saddle_ok = false;      // perturbation inequalities around (s*, q*)
    bool brute_match = false;
};

/// f = gamma_t y + f_t, g = 0, L(t,x) = x - L_t, R(t,x) = x - R_t with L - R bounded below.
LinearGame linear_game(const MRSolution& sol, const MRInstance& inst, const GameGrid& gg);

struct Comparison {
    double margin = 0.0;  // min over coarse nodes of Y1 - Y2
    double tol = 0.0;
    bool ok = false;
};

/// L1 <= L2 and R1 <= R2 (checked on a sampled net) imply Y2 <= Y1.
Comparison compare_loss(const MRInstance& i1, const MRInstance& i2);

struct Sandwich {
    bool lower_skipped = false, upper_skipped = false;
    double lower_margin = 0.0;  // min (Y - Ylow)
    double upper_margin = 0.0;  // min (Yup - Y)
    double tol = 0.0;
    bool ok = false;  // true when every non-skipped side holds
};

/// Single-condition solutions built by adding lambda t to the unconstrained
/// side of A and re-solving the one-sided backward problem.
Sandwich sandwich(const MRInstance& inst, double lambda);

void write_game_csv(std::ostream& os, const GameValues& gv);

}  // namespace mrgbsde
