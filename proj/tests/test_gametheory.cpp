#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mrgbsde/config.hpp"
#include "mrgbsde/errors.hpp"
#include "mrgbsde/gametheory.hpp"
#include "cfg_text.hpp"

using namespace mrgbsde;

namespace {

const char* base = R"(
vol.sigma_low_sq = 0.25
vol.sigma_high_sq = 1.0
grid.nt = 100
grid.nx = 200
terminal.kind = affine
terminal.coeffs = 0 1
loss.L.threshold = 1
loss.R.threshold = 0.5 -0.5
loss.separation = 0.5
)";

MRInstance make(const std::string& extra = "") { return parse_config(testcfg::with(base, extra)).instance(); }

}  // namespace

TEST_CASE("game grid") {
    const auto inst = make();
    const auto all = GameGrid::make(inst.grid, 40);
    CHECK(all.S_set.size() == 61);
    CHECK(all.S_set.front() == 40);
    const auto few = GameGrid::make(inst.grid, 0, 5, 3);
    CHECK(few.S_set == std::vector<int>{0, 25, 50, 75, 100});
    CHECK(few.Q_set == std::vector<int>{0, 50, 100});
    CHECK_THROWS_AS(GameGrid::make(inst.grid, 101), AlignmentError);
    GameGrid bad = few;
    bad.S_set = {0, 50};
    CHECK_THROWS_AS(bad.validate(inst.grid), PreconditionError);
    bad.S_set = {-1, 100};
    CHECK_THROWS_AS(bad.validate(inst.grid), AlignmentError);
}

TEST_CASE("thresholds of affine losses") {
    const auto inst = make();
    const auto sol = solve(inst);
    const auto th = thresholds(sol, inst);
    const double root_tol = 1e-3 * inst.grid.tolerance();
    for (int i = 0; i <= inst.grid.nt(); ++i) {
        CHECK(std::abs(th.r_up[i] - 0.5 * (1.0 - th.t[i])) <= root_tol);
        CHECK(std::abs(th.l_up[i] - 1.0) <= root_tol);
        CHECK(std::abs(th.r_lo[i] - th.r_up[i]) <= 2.0 * root_tol);
    }
}

TEST_CASE("flagship optimal stopping bounds") {
    const auto inst = make();
    const auto sol = solve(inst);
    const auto gv = optim_bounds(sol, inst, GameGrid::make(inst.grid, 0));
    CHECK(gv.chain_ok);
    CHECK(gv.no_mean_uncertainty);
    CHECK(gv.equality_ok);
    CHECK(gv.infsup_upper >= gv.supinf_upper);
    CHECK(gv.infsup_lower >= gv.supinf_lower);
    CHECK(std::abs(gv.supinf_upper - 0.5) <= gv.tol);
    CHECK(gv.tol == doctest::Approx(2.0 * inst.grid.tolerance()));
    std::ostringstream os;
    write_game_csv(os, gv);
    CHECK(os.str().rfind("s,q,upper,lower\n", 0) == 0);
}

TEST_CASE("mean uncertainty: the chain holds for a squared terminal") {
    const auto inst = make(R"(
terminal.kind = quadratic
terminal.coeffs = 0 0 1
loss.L.threshold = 3
loss.R.threshold = 0.8 -0.8
)");
    const auto sol = solve(inst);
    const auto gv = optim_bounds(sol, inst, GameGrid::make(inst.grid, 20, 21, 21));
    CHECK_FALSE(gv.no_mean_uncertainty);
    CHECK(gv.chain_ok);
    CHECK(gv.negE_negY < gv.E_Y);
    CHECK(gv.infsup_lower <= gv.negE_negY + gv.tol);
    CHECK(gv.E_Y <= gv.supinf_upper + gv.tol);
}

TEST_CASE("linear game on the flagship") {
    const auto inst = make();
    const auto sol = solve(inst);
    const auto lg = linear_game(sol, inst, GameGrid::make(inst.grid, 0));
    CHECK(lg.E_Y == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(lg.supinf - 0.5) <= lg.tol);
    CHECK(std::abs(lg.infsup - 0.5) <= lg.tol);
    CHECK(lg.saddle_ok);
    CHECK(lg.brute_match);
}

TEST_CASE("linear game with slack constraints stops at T") {
    const auto inst = make("loss.L.threshold = 3\nloss.R.threshold = -3\nloss.separation = 1\n");
    const auto sol = solve(inst);
    const auto lg = linear_game(sol, inst, GameGrid::make(inst.grid, 0));
    CHECK(lg.s_star == inst.grid.nt());
    CHECK(lg.q_star == inst.grid.nt());
    CHECK(std::abs(lg.E_Y) <= 1e-12);
    CHECK(lg.saddle_ok);
}

TEST_CASE("linear game rejects nonlinear instances") {
    const auto inst = make("generator.f.kind = lipschitz_sin\ngenerator.f.coeffs = 0 0.2 0\nsolver.policy = picard\n");
    const auto sol = solve(inst);
    CHECK_THROWS_AS(linear_game(sol, inst, GameGrid::make(inst.grid, 0)), PreconditionError);
}

TEST_CASE("raising the losses lowers the solution") {
    const auto i1 = make();
    const auto same = compare_loss(i1, i1);
    CHECK(same.ok);
    CHECK(std::abs(same.margin) <= 1e-12);
    const auto i2 = make("loss.R.threshold = 0.4 -0.4\n");
    const auto c = compare_loss(i1, i2);
    CHECK(c.ok);
    CHECK(c.margin >= -c.tol);
    const auto s1 = solve(i1), s2 = solve(i2);
    CHECK(s1.curves.E_Y[0] - s2.curves.E_Y[0] == doctest::Approx(0.1).epsilon(1e-6));
    // reversed order is not a comparison
    CHECK_THROWS_AS(compare_loss(i2, i1), PreconditionError);
}

TEST_CASE("one-sided solutions sandwich the doubly reflected one") {
    const auto inst = make();
    for (double lam : {0.0, 0.05, 0.1}) {
        const auto sw = sandwich(inst, lam);
        CHECK(sw.ok);
        CHECK(!(sw.lower_skipped && sw.upper_skipped));
    }
}
