#include "mrgbsde/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "mrgbsde/errors.hpp"

namespace mrgbsde {

void SuiteReport::add(std::string name, double value, double bound, bool pass) {
    rows.push_back({std::move(name), value, bound, pass});
}

bool SuiteReport::ok() const { return failures() == 0; }

int SuiteReport::failures() const {
    return int(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.pass; }));
}

void write_suite_csv(std::ostream& os, const SuiteReport& r) {
    os << "check,value,bound,pass\n";
    for (const auto& row : r.rows)
        os << row.name << ',' << fmt17(row.value) << ',' << fmt17(row.bound) << ','
           << (row.pass ? 1 : 0) << '\n';
}

namespace {

double rel_err(double v, double ref) { return std::abs(v - ref) / std::max(std::abs(ref), 1e-300); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

BoundaryCurve shifted(const BoundaryCurve& c, const std::vector<double>& d) {
    std::vector<double> thr = c.threshold();
    for (std::size_t i = 0; i < thr.size(); ++i) thr[i] -= d[i];
    switch (c.kind()) {
        case BoundaryCurve::Kind::affine_threshold:
            return BoundaryCurve::affine(c.slope(), std::move(thr)).with_arg_scale(c.arg_scale());
        case BoundaryCurve::Kind::sin_perturbed:
            return BoundaryCurve::sin_perturbed(c.gamma(), std::move(thr)).with_arg_scale(c.arg_scale());
        default: break;
    }
    throw PreconditionError("loss shift needs an affine or sin loss");
}

}  // namespace

SuiteReport suite_skorokhod(std::uint64_t seed, int trials, int nt) {
    SuiteReport rep{"skorokhod", {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    auto u = [&](double a, double b) { return a + (b - a) * U(rng); };
    std::vector<double> t(nt + 1);
    for (int i = 0; i <= nt; ++i) t[i] = double(i) / nt;

    int stab_bad = 0, growth_bad = 0, active = 0;
    double stab_ratio = 0.0, growth_ratio = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const double kappa = u(0.5, 2.0), g0 = u(0.2, 1.0);
        const double base = u(-0.5, 0.5), amp = u(0.0, 0.3), f1 = u(0.5, 3.0), p1 = u(0.0, 6.3);
        const double f2 = u(0.5, 3.0), p2 = u(0.0, 6.3);
        std::vector<double> tr(nt + 1), tl(nt + 1);
        for (int i = 0; i <= nt; ++i) {
            tr[i] = base + amp * std::sin(2.0 * std::numbers::pi * f1 * t[i] + p1);
            tl[i] = tr[i] + kappa * g0 * (1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * f2 * t[i] + p2));
        }
        const double sep = 0.69 * kappa * g0;
        const auto bp1 = BoundaryPair::make(BoundaryCurve::affine(kappa, tl), BoundaryCurve::affine(kappa, tr), sep);
        const double kappa2 = kappa * (1.0 + u(-0.1, 0.1)), d = u(-0.05, 0.05);
        std::vector<double> tr2 = tr, tl2 = tl;
        for (int i = 0; i <= nt; ++i) {
            tr2[i] += d;
            tl2[i] += d;
        }
        const auto bp2 = BoundaryPair::make(BoundaryCurve::affine(kappa2, tl2), BoundaryCurve::affine(kappa2, tr2), sep);

        const double a1 = (tr[nt] + (tl[nt] - tr[nt]) * U(rng)) / kappa;
        const double lo2 = tr2[nt] / kappa2, hi2 = tl2[nt] / kappa2;
        const double a2 = std::clamp(a1 + 0.05 * N(rng), lo2, hi2);
        std::vector<double> s1(nt + 1, 0.0), s2(nt + 1, 0.0);
        const double step = 1.5 * g0 / std::sqrt(double(nt));
        for (int i = 1; i <= nt; ++i) {
            s1[i] = s1[i - 1] + step * N(rng);
            s2[i] = s1[i] + 0.02 * g0 * N(rng);
        }
        const auto x1 = solve_backward(t, a1, s1, bp1, 1e-12, 1e-12);
        const auto x2 = solve_backward(t, a2, s2, bp2, 1e-12, 1e-12);
        if (x1.kr.back() + x1.kl.back() > 0.0) ++active;
        const auto st = check_stability(x1, x2, {a1, s1, &bp1}, {a2, s2, &bp2}, 1e-9);
        const auto gr = check_growth(x1, a1, s1, bp1, 1e-9);
        if (!st.ok) ++stab_bad;
        if (!gr.ok) ++growth_bad;
        if (st.rhs > 0.0) stab_ratio = std::max(stab_ratio, st.lhs / st.rhs);
        if (gr.rhs > 0.0) growth_ratio = std::max(growth_ratio, gr.lhs / gr.rhs);
    }
    rep.add("stability_violations", stab_bad, 0, stab_bad == 0);
    rep.add("growth_violations", growth_bad, 0, growth_bad == 0);
    rep.add("worst_stability_ratio", stab_ratio, 1, stab_ratio <= 1.0 + 1e-9);
    rep.add("worst_growth_ratio", growth_ratio, 1, growth_ratio <= 1.0 + 1e-9);
    rep.add("trials_with_reflection", active, trials, active > 0);
    return rep;
}

SuiteReport suite_gexp(const VolBounds& vb, const Grid& grid, std::uint64_t seed) {
    SuiteReport rep{"gexp", {}};
    const double T = grid.T();
    const double eb2 = g_expectation(PayoffSpec::quadratic(0, 0, 1), T, grid, vb);
    const double enb2 = g_expectation(PayoffSpec::quadratic(0, 0, -1), T, grid, vb);
    rep.add("E[B_T^2]_rel_err", rel_err(eb2, vb.sigma_high_sq * T), 0.02,
            rel_err(eb2, vb.sigma_high_sq * T) <= 0.02);
    rep.add("E[-B_T^2]_rel_err", rel_err(enb2, -vb.sigma_low_sq * T), 0.02,
            rel_err(enb2, -vb.sigma_low_sq * T) <= 0.02);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto u = [&](double a, double b) { return a + (b - a) * U(rng); };
    const int n = grid.cols();
    auto random_row = [&] {
        const double c0 = u(-1, 1), c1 = u(-1, 1), c2 = u(0.2, 3), c3 = u(-1, 1), c4 = u(-1, 1),
                     c5 = u(-0.5, 0.5);
        std::vector<double> r(n);
        for (int j = 0; j < n; ++j) {
            const double x = grid.x(j);
            r[j] = c0 + c1 * std::sin(c2 * x) + c3 * std::abs(x - c4) + c5 * x * x;
        }
        return r;
    };
    int sub_bad = 0, hom_bad = 0, mono_bad = 0, const_bad = 0, trans_bad = 0, order_bad = 0;
    const int trials = 50;
    for (int k = 0; k < trials; ++k) {
        const int i = 1 + int(U(rng) * grid.nt()) % grid.nt();
        const auto X = random_row(), Y = random_row();
        std::vector<double> S(n), L(n), M(n), C(n), Xc(n), negX(n);
        const double lam = u(0.0, 3.0), c = u(-5.0, 5.0);
        for (int j = 0; j < n; ++j) {
            S[j] = X[j] + Y[j];
            L[j] = lam * X[j];
            M[j] = X[j] + std::abs(Y[j]) * (U(rng) < 0.5 ? 0.0 : 1.0);
            C[j] = c;
            Xc[j] = X[j] + c;
            negX[j] = -X[j];
        }
        const double ex = expect_row(X, i, grid, vb), ey = expect_row(Y, i, grid, vb);
        const double scale = 1.0 + std::abs(ex) + std::abs(ey);
        if (expect_row(S, i, grid, vb) > ex + ey + 1e-12 * scale) ++sub_bad;
        if (std::abs(expect_row(L, i, grid, vb) - lam * ex) > 1e-12 * (1.0 + lam * std::abs(ex))) ++hom_bad;
        if (!(ex <= expect_row(M, i, grid, vb))) ++mono_bad;
        if (expect_row(C, i, grid, vb) != c) ++const_bad;
        if (std::abs(expect_row(Xc, i, grid, vb) - ex - c) > 1e-12 * (scale + std::abs(c))) ++trans_bad;
        if (-expect_row(negX, i, grid, vb) > ex + 1e-12 * scale) ++order_bad;
    }
    rep.add("subadditivity_violations", sub_bad, 0, sub_bad == 0);
    rep.add("homogeneity_violations", hom_bad, 0, hom_bad == 0);
    rep.add("monotonicity_violations_exact", mono_bad, 0, mono_bad == 0);
    rep.add("constant_violations_exact", const_bad, 0, const_bad == 0);
    rep.add("translation_violations", trans_bad, 0, trans_bad == 0);
    rep.add("lower_le_upper_violations", order_bad, 0, order_bad == 0);
    return rep;
}

SuiteReport suite_classical(double sigma_sq, double T, int nt, int nx) {
    SuiteReport rep{"classical-limit", {}};
    const VolBounds vb = VolBounds::classical(sigma_sq);
    const double sd = std::sqrt(sigma_sq * T);
    const Grid grid = Grid::make(T, nt, nx, 6.0 * sd, vb);
    auto check = [&](const std::string& name, double v, double ref) {
        const double e = rel_err(v, ref);
        rep.add(name, e, 0.02, e <= 0.02);
    };
    check("quadratic_rel_err", g_expectation(PayoffSpec::quadratic(0, 0, 1), T, grid, vb), sigma_sq * T);
    check("neg_quadratic_rel_err", g_expectation(PayoffSpec::quadratic(0, 0, -1), T, grid, vb), -sigma_sq * T);
    const double K = 0.3 * sd;
    check("call_rel_err", g_expectation(PayoffSpec::call(K, 1.0), T, grid, vb),
          sd * norm_pdf(K / sd) - K * (1.0 - norm_cdf(K / sd)));

    // Linear BSDE f = gamma y with a quadratic terminal.
    const double gamma = 0.5;
    GeneratorSpec gen;
    gen.f.a1 = gamma;
    const Grid g2 = Grid::make(T, nt, nx, 6.0 * sd, vb, gen.cfl_rate(12.0 * sd / nx, T, vb));
    const auto bs = solve_bsde(PayoffSpec::quadratic(0, 0, 1).row(g2), gen, g2, vb);
    check("bsde_quadratic_rel_err", bs.y_at(0, g2.center()), std::exp(gamma * T) * sigma_sq * T);

    // Mean-reflected call: E[Y_t] = max(E[xi], 0.6 (1 - t)).
    const int n1 = nt + 1;
    std::vector<double> thrL(n1, 3.0), thrR(n1);
    for (int i = 0; i < n1; ++i) thrR[i] = 0.6 * sd * (1.0 - grid.time(i) / T);
    MRInstance inst{PayoffSpec::call(0.0, 1.0), GeneratorSpec{},
                    BoundaryPair::make(BoundaryCurve::affine(1.0, thrL), BoundaryCurve::affine(1.0, thrR), 1.0),
                    grid, vb};
    const auto sol = solve(inst);
    const double a = sd / std::sqrt(2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < n1; ++i) worst = std::max(worst, rel_err(sol.curves.E_Y[i], std::max(a, thrR[i])));
    rep.add("reflected_call_mean_rel_err", worst, 0.02, worst <= 0.02);
    return rep;
}

SuiteReport suite_kprocess(const MRSolution& sol, const MRInstance& inst, std::uint64_t seed,
                           int controls) {
    SuiteReport rep{"kprocess", {}};
    const Grid& grid = inst.grid;
    const VolBounds& vb = inst.vb;
    const int nt = grid.nt(), n = grid.cols();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int reach = std::max(1, int(std::lround(std::sqrt(vb.sigma_high_sq * grid.dt()) / grid.h())));
    long long bad = 0;
    double worst = -std::numeric_limits<double>::infinity();
    ControlField ctrl{ValueField(nt, n, grid.dt())};
    std::vector<int> path(nt + 1);
    for (int c = 0; c < controls; ++c) {
        for (double& v : ctrl.sigma_sq.data()) v = vb.sigma_low_sq + (vb.sigma_high_sq - vb.sigma_low_sq) * U(rng);
        path[0] = grid.center();
        for (int i = 1; i <= nt; ++i) {
            const int step = int(U(rng) * (2 * reach + 1)) - reach;
            path[i] = std::clamp(path[i - 1] + step, 0, n - 1);
        }
        const auto K = realize_k(sol.bar, ctrl, path, grid, vb);
        for (int i = 0; i < nt; ++i) {
            const double inc = K[i + 1] - K[i];
            worst = std::max(worst, inc);
            if (inc > 0.0) ++bad;
        }
    }
    rep.add("k_increase_violations", double(bad), 0, bad == 0);
    rep.add("k_largest_increment", worst, 0, worst <= 0.0);
    const std::vector<double> zero(n, 0.0);
    const auto v = expect_with_k(sol.bar, zero, 0, nt, Accrual{false, true}, false, grid, vb);
    const double supK = -v[grid.center()];
    rep.add("sup_E[K_T]", std::abs(supK), grid.tolerance(), std::abs(supK) <= grid.tolerance());
    return rep;
}

SuiteReport suite_flatness(const MRSolution& sol, const MRInstance& inst) {
    SuiteReport rep{"flatness", {}};
    const auto f = check_flatness(sol, inst);
    rep.add("flatness_sum_R", f.sum_R, f.tol, f.sum_R <= f.tol);
    rep.add("flatness_sum_L", f.sum_L, f.tol, f.sum_L <= f.tol);
    rep.add("worst_constraint_slack", f.worst_slack, inst.grid.tolerance(),
            f.worst_slack <= inst.grid.tolerance());
    return rep;
}

SuiteReport suite_game(const MRSolution& sol, const MRInstance& inst, const GameGrid& gg) {
    SuiteReport rep{"game", {}};
    const auto gv = optim_bounds(sol, inst, gg);
    rep.add("lower_game_le_negE_negY", gv.infsup_lower - gv.negE_negY, gv.tol,
            gv.infsup_lower <= gv.negE_negY + gv.tol);
    rep.add("negE_negY_le_E_Y", gv.negE_negY - gv.E_Y, gv.tol, gv.negE_negY <= gv.E_Y + gv.tol);
    rep.add("E_Y_le_upper_game", gv.E_Y - gv.supinf_upper, gv.tol, gv.E_Y <= gv.supinf_upper + gv.tol);
    rep.add("minimax_upper", gv.supinf_upper - gv.infsup_upper, 0, gv.infsup_upper >= gv.supinf_upper);
    rep.add("minimax_lower", gv.supinf_lower - gv.infsup_lower, 0, gv.infsup_lower >= gv.supinf_lower);
    if (gv.no_mean_uncertainty) {
        rep.add("equality_upper", std::abs(gv.supinf_upper - gv.E_Y), 3 * gv.tol,
                std::abs(gv.supinf_upper - gv.E_Y) <= 3 * gv.tol);
        rep.add("equality_lower", std::abs(gv.infsup_lower - gv.E_Y), 3 * gv.tol,
                std::abs(gv.infsup_lower - gv.E_Y) <= 3 * gv.tol);
    }
    try {
        const auto lg = linear_game(sol, inst, gg);
        rep.add("linear_supinf_vs_E_Y", std::abs(lg.supinf - lg.E_Y), lg.tol, std::abs(lg.supinf - lg.E_Y) <= lg.tol);
        rep.add("linear_infsup_vs_E_Y", std::abs(lg.infsup - lg.E_Y), lg.tol, std::abs(lg.infsup - lg.E_Y) <= lg.tol);
        rep.add("linear_saddle", lg.saddle_ok ? 0 : 1, 0, lg.saddle_ok);
        rep.add("linear_saddle_times_match_brute_force", lg.brute_match ? 0 : 1, 0, lg.brute_match);
    } catch (const PreconditionError&) {
        rep.add("linear_game_not_applicable", 0, 0, true);
    }
    return rep;
}

SuiteReport suite_comparison(const MRInstance& inst, std::uint64_t seed, int instances, double lambda) {
    SuiteReport rep{"comparison", {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 0.2);
    const Grid& grid = inst.grid;
    const int nt = grid.nt();
    for (int k = 0; k < instances; ++k) {
        double u1 = U(rng), u2 = U(rng);
        if (u1 > u2) std::swap(u1, u2);
        std::vector<double> d1(nt + 1), d2(nt + 1);
        for (int i = 0; i <= nt; ++i) {
            d1[i] = u1 * (1.0 - grid.time(i) / grid.T());
            d2[i] = u2 * (1.0 - grid.time(i) / grid.T());
        }
        MRInstance raised = inst;
        raised.losses = BoundaryPair::make(shifted(inst.losses.lower, d1), shifted(inst.losses.upper, d2),
                                           inst.losses.sep);
        const auto c = compare_loss(inst, raised);
        rep.add("compare_margin_" + std::to_string(k), c.margin, -c.tol, c.ok);
    }
    int used = 0;
    for (double lam : {0.0, lambda, 2.0 * lambda}) {
        const auto sw = sandwich(inst, lam);
        const std::string tag = "sandwich_lambda_" + fmt17(lam);
        if (sw.lower_skipped) rep.add(tag + "_lower_skipped", 0, 0, true);
        else rep.add(tag + "_lower_margin", sw.lower_margin, -sw.tol, sw.lower_margin >= -sw.tol);
        if (sw.upper_skipped) rep.add(tag + "_upper_skipped", 0, 0, true);
        else rep.add(tag + "_upper_margin", sw.upper_margin, -sw.tol, sw.upper_margin >= -sw.tol);
        used += !sw.lower_skipped + !sw.upper_skipped;
    }
    rep.add("sandwich_non_skipped", used, 3, used >= 3);
    return rep;
}

}  // namespace mrgbsde
