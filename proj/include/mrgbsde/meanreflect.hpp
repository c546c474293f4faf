#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrgbsde/gbsde.hpp"
#include "mrgbsde/gcore.hpp"
#include "mrgbsde/skorokhod.hpp"

namespace mrgbsde {

enum class Policy { constant, linear_y, lipschitz_segmented, picard };

std::string to_string(Policy p);
Policy policy_from(const std::string& name);

/// Doubly mean-reflected problem
///   Y_t = xi + int_t^T f ds + int_t^T g d<B> - int_t^T Z dB - (K_T - K_t) + (A_T - A_t),
///   E^[L(t, Y_t)] <= 0 <= E^[R(t, Y_t)],  A = A^R - A^L flat on the active side.
/// `losses.lower` is L, `losses.upper` is R, both on the coarse grid.
struct MRInstance {
    PayoffSpec terminal;
    GeneratorSpec gen;
    BoundaryPair losses;
    Grid grid;
    VolBounds vb;
    Policy policy = Policy::linear_y;
    double tol_iter = 1e-6;
    double tol_flat = -1.0;  // negative: 10 (h + dt)(1 + TV(A))
    int max_iters = 30;
    double beta = 2.0;
    double kappa_bound = 10.0;
    int boundary_points = 41;
    double sp_tol = 1e-10;   // Skorokhod root tolerance
    double adm_tol = 1e-8;   // slack allowed in the terminal admissibility check

    /// Grid/loss compatibility, CFL with the generator margin, terminal admissibility.
    void validate() const;
};

struct MeanCurves {
    std::vector<double> t, E_Y, negE_negY, slack_L, slack_R;
};

struct IterationRecord {
    int segment = 0;
    int iter = 0;
    double delta = 0.0;
};

/// Y = bar.y + delta_t with delta_t = A_T - A_t. The fine accrual fields of
/// `bar` are those of the Y dynamics (used by the game bounds).
struct MRSolution {
    BsdeSolution bar;
    std::vector<double> delta, A, AR, AL;  // coarse rows
    MeanCurves curves;
    std::vector<IterationRecord> iterations;
    int segments = 1;
    int substeps = 1;
    double tol_flat = 0.0;

    double y(int coarse_i, int j) const;
    std::vector<double> y_row(int coarse_i) const;
    ValueField y_field() const;
    /// delta at a fine index, linear between coarse nodes.
    double delta_fine(int k) const;
};

enum class Centering { upper, lower };

/// l^S(t, x) = E^[L(t, x + S_t + c_t)], r^S likewise, for coarse i0..i1 (re-indexed
/// from 0). c_t = -E^[S_t] (upper) or E^[-S_t] (lower). Affine losses are mapped
/// exactly; other kinds are tabulated on `points` offsets.
BoundaryPair build_boundaries(const BsdeSolution& S, const BoundaryPair& losses, const Grid& grid,
                              const VolBounds& vb, int i0, int i1,
                              Centering centering = Centering::upper, int points = 41);

/// Pieces of one reflection pass for a fixed driver: Ybar on the lattice, the
/// mean path s_t = E^[Ybar_t0] - E^[Ybar_t], a = E^[Ybar_t1], the mapped
/// boundaries and the backward Skorokhod solution, all on coarse i0..i1.
struct ReflectionData {
    BsdeSolution bar;
    std::vector<double> t, means, s;
    double a = 0.0;
    BoundaryPair bs;
    SkorokhodSolution sp;
    std::vector<double> A, AR, AL, delta;
};

/// One reflection pass over coarse i0..i1 given Ybar; `losses_local` indexed from i0.
ReflectionData reflect(BsdeSolution bar, int i0, int i1, const BoundaryPair& losses_local,
                       const MRInstance& inst);

/// Reflection pass of the linear_y route in the variables Y^a = e^{a_t} Y,
/// a_t = int_0^t gamma. `ef` receives e^{a} on the fine grid.
ReflectionData reflect_linear(const MRInstance& inst, std::vector<double>& ef);

MRSolution solve(const MRInstance& inst);
MRSolution solve_constant(const MRInstance& inst);
MRSolution solve_linear_y(const MRInstance& inst);
/// Picard (whole interval) or Lipschitz-segmented, according to inst.policy.
MRSolution solve_fixed_point(const MRInstance& inst);

/// Number of segments for the Lipschitz route: smallest n with
/// C (T/n) exp(C T/n) < 1/2, C = kappa_y (1 + 12 C_lip / c_lip).
int segment_count(const MRInstance& inst);

struct MRFlatness {
    double sum_R = 0.0, sum_L = 0.0, tv = 0.0, tol = 0.0;
    double worst_slack = 0.0;  // max(slack_L, -slack_R, 0)
    bool ok = false;
};

MRFlatness check_flatness(const MRSolution& sol, const MRInstance& inst);

struct AStability {
    double lhs = 0.0, rhs = 0.0, C_tilde = 0.0;
    bool ok = false;  // diagnostic
};

/// sup|A1 - A2| <= C~ (E^|xi1 - xi2| + T sup|f1 - f2| + sigma_high_sq T sup|g1 - g2|)
/// for constant-coefficient instances; C~ = 14 C_lip / c_lip.
AStability a_stability(const MRSolution& s1, const MRSolution& s2, const MRInstance& i1,
                       const MRInstance& i2);

/// Mean curves of the solution on the coarse grid.
MeanCurves mean_curves(const MRSolution& sol, const MRInstance& inst);

void write_results_csv(std::ostream& os, const MRSolution& sol);
void write_iterations_csv(std::ostream& os, const MRSolution& sol);

}  // namespace mrgbsde
