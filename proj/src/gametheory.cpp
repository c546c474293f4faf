#include "mrgbsde/gametheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mrgbsde/errors.hpp"

namespace mrgbsde {

namespace {

std::vector<int> spread(int t, int nt, int count) {
    std::vector<int> out;
    if (count <= 0 || count > nt - t + 1) {
        for (int i = t; i <= nt; ++i) out.push_back(i);
        return out;
    }
    if (count == 1) return {nt};
    for (int c = 0; c < count; ++c)
        out.push_back(t + int(std::lround(double(c) * (nt - t) / (count - 1))));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> negated(std::span<const double> r) {
    std::vector<double> out(r.begin(), r.end());
    for (double& v : out) v = -v;
    return out;
}

double upper_mean(std::span<const double> row, int i, const Grid& g, const VolBounds& vb) {
    return expect_row(row, i, g, vb);
}

double lower_mean(std::span<const double> row, int i, const Grid& g, const VolBounds& vb) {
    return -expect_row(negated(row), i, g, vb);
}

// Earliest index attaining the extremum, ties within 1e-12.
int arg_best(const std::vector<double>& v, bool want_max) {
    int best = 0;
    for (int i = 1; i < int(v.size()); ++i) {
        const double d = want_max ? v[i] - v[best] : v[best] - v[i];
        if (d > 1e-12) best = i;
    }
    return best;
}

struct Reduced {
    double supinf, infsup;
    int q_arg, s_arg;
};

Reduced reduce(const std::vector<std::vector<double>>& M) {
    const std::size_t ns = M.size(), nq = M[0].size();
    std::vector<double> col_min(nq, std::numeric_limits<double>::infinity());
    std::vector<double> row_max(ns, -std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = 0; b < nq; ++b) {
            col_min[b] = std::min(col_min[b], M[a][b]);
            row_max[a] = std::max(row_max[a], M[a][b]);
        }
    Reduced r;
    r.q_arg = arg_best(col_min, true);
    r.s_arg = arg_best(row_max, false);
    r.supinf = col_min[r.q_arg];
    r.infsup = row_max[r.s_arg];
    return r;
}

int first_touch(const std::vector<double>& curve, const std::vector<double>& level, int t, int nt,
                double tol) {
    for (int i = t; i <= nt; ++i)
        if (std::abs(curve[i] - level[i]) <= tol) return i;
    return nt;
}

void add_unique(std::vector<int>& v, int x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) {
        v.push_back(x);
        std::sort(v.begin(), v.end());
    }
}

}  // namespace

GameGrid GameGrid::make(const Grid& grid, int t, int s_count, int q_count) {
    if (t < 0 || t > grid.nt()) throw AlignmentError("game base time outside the grid");
    GameGrid gg;
    gg.t = t;
    gg.S_set = spread(t, grid.nt(), s_count);
    gg.Q_set = spread(t, grid.nt(), q_count);
    return gg;
}

void GameGrid::validate(const Grid& grid) const {
    const int nt = grid.nt();
    if (t < 0 || t > nt) throw AlignmentError("game base time outside the grid");
    for (const auto* set : {&S_set, &Q_set}) {
        if (set->empty() || set->back() != nt) throw PreconditionError("stopping sets must contain T");
        for (int i : *set)
            if (i < t || i > nt) throw AlignmentError("stopping time outside [t, T]");
    }
}

Thresholds thresholds(const MRSolution& sol, const MRInstance& inst) {
    const Grid& grid = inst.grid;
    const int nt = grid.nt();
    const auto up = build_boundaries(sol.bar, inst.losses, grid, inst.vb, 0, nt, Centering::upper,
                                     inst.boundary_points);
    const auto lo = build_boundaries(sol.bar, inst.losses, grid, inst.vb, 0, nt, Centering::lower,
                                     inst.boundary_points);
    const double tol = 1e-3 * grid.tolerance() / std::max(1.0, inst.losses.C_lip());
    Thresholds th;
    for (int i = 0; i <= nt; ++i) {
        th.t.push_back(grid.time(i));
        th.r_up.push_back(up.upper.root(i, 0.0, tol));
        th.l_up.push_back(up.lower.root(i, 0.0, tol));
        th.r_lo.push_back(lo.upper.root(i, 0.0, tol));
        th.l_lo.push_back(lo.lower.root(i, 0.0, tol));
    }
    return th;
}

GameValues optim_bounds(const MRSolution& sol, const MRInstance& inst, const GameGrid& gg) {
    const Grid& grid = inst.grid;
    const VolBounds& vb = inst.vb;
    gg.validate(grid);
    const int nt = grid.nt(), t = gg.t;
    const Thresholds th = thresholds(sol, inst);

    // Both DPs are translation invariant in the terminal, so a stopped payoff
    // c at tau contributes c + V(tau) with V the value of a zero terminal.
    std::vector<int> taus;
    for (int s : gg.S_set)
        for (int q : gg.Q_set) add_unique(taus, std::min(s, q));
    const std::vector<double> zero(grid.cols(), 0.0);
    const Accrual acc;
    std::vector<double> v_sup(nt + 1, 0.0), v_inf(nt + 1, 0.0);
    for (int tau : taus) {
        if (tau == nt) continue;
        v_sup[tau] = upper_mean(expect_with_k(sol.bar, zero, t, tau, acc, true, grid, vb), t, grid, vb);
        v_inf[tau] = lower_mean(expect_with_k(sol.bar, zero, t, tau, acc, false, grid, vb), t, grid, vb);
    }
    const auto xi = inst.terminal.row(grid);
    const double xi_sup = upper_mean(expect_with_k(sol.bar, xi, t, nt, acc, true, grid, vb), t, grid, vb);
    const double xi_inf = lower_mean(expect_with_k(sol.bar, xi, t, nt, acc, false, grid, vb), t, grid, vb);

    GameValues gv;
    gv.gg = gg;
    const std::size_t ns = gg.S_set.size(), nq = gg.Q_set.size();
    gv.upper.assign(ns, std::vector<double>(nq));
    gv.lower.assign(ns, std::vector<double>(nq));
    for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = 0; b < nq; ++b) {
            const int s = gg.S_set[a], q = gg.Q_set[b];
            if (std::min(s, q) == nt) {
                gv.upper[a][b] = xi_sup;
                gv.lower[a][b] = xi_inf;
            } else if (q <= s) {
                gv.upper[a][b] = th.r_up[q] + v_sup[q];
                gv.lower[a][b] = th.r_lo[q] + v_inf[q];
            } else {
                gv.upper[a][b] = th.l_up[s] + v_sup[s];
                gv.lower[a][b] = th.l_lo[s] + v_inf[s];
            }
        }
    const Reduced ru = reduce(gv.upper), rl = reduce(gv.lower);
    gv.supinf_upper = ru.supinf;
    gv.infsup_upper = ru.infsup;
    gv.supinf_lower = rl.supinf;
    gv.infsup_lower = rl.infsup;
    gv.E_Y = sol.curves.E_Y[t];
    gv.negE_negY = sol.curves.negE_negY[t];
    gv.tol = 2.0 * grid.tolerance();
    gv.chain_ok = gv.infsup_lower <= gv.negE_negY + gv.tol && gv.negE_negY <= gv.E_Y + gv.tol &&
                  gv.E_Y <= gv.supinf_upper + gv.tol;
    bool flat = true;
    for (int i = 0; i <= nt; ++i)
        flat = flat && std::abs(sol.curves.E_Y[i] - sol.curves.negE_negY[i]) <= 1e-8 * (1.0 + std::abs(sol.curves.E_Y[i]));
    gv.no_mean_uncertainty = flat;
    if (gv.no_mean_uncertainty)
        gv.equality_ok = std::abs(gv.supinf_upper - gv.E_Y) <= 3.0 * gv.tol &&
                         std::abs(gv.infsup_lower - gv.E_Y) <= 3.0 * gv.tol;
    // thresholds carry the root tolerance, far below the scheme tolerance
    gv.s_star = first_touch(sol.curves.E_Y, th.l_up, t, nt, 1e-2 * grid.tolerance());
    gv.q_star = first_touch(sol.curves.E_Y, th.r_up, t, nt, 1e-2 * grid.tolerance());
    return gv;
}

namespace {

void require_linear_game(const MRInstance& inst) {
    const GeneratorSpec& gen = inst.gen;
    const bool f_ok = gen.f.kind == GeneratorTerm::Kind::affine && gen.f.z_free();
    const bool g_ok = gen.g.a0 == 0.0 && gen.g.a1 == 0.0 && gen.g.a2 == 0.0;
    if (!f_ok || !g_ok) throw PreconditionError("linear game needs f = gamma_t y + f_t and g = 0");
    for (const BoundaryCurve* c : {&inst.losses.lower, &inst.losses.upper}) {
        if (c->kind() != BoundaryCurve::Kind::affine_threshold || c->slope() != 1.0)
            throw PreconditionError("linear game needs losses x - threshold_t");
        for (double s : c->arg_scale())
            if (s != 1.0) throw PreconditionError("linear game needs unscaled losses");
    }
    const auto& L = inst.losses.lower.threshold();
    const auto& R = inst.losses.upper.threshold();
    for (std::size_t i = 0; i < L.size(); ++i)
        if (!(L[i] - R[i] > 0.0)) throw PreconditionError("linear game needs L_t - R_t > 0");
}

}  // namespace

LinearGame linear_game(const MRSolution& sol, const MRInstance& inst, const GameGrid& gg_in) {
    require_linear_game(inst);
    const Grid& grid = inst.grid;
    gg_in.validate(grid);
    const int nt = grid.nt(), t = gg_in.t, m = grid.substeps();
    const auto& L = inst.losses.lower.threshold();
    const auto& R = inst.losses.upper.threshold();
    const double tol = grid.tolerance();

    LinearGame lg;
    lg.tol = tol;
    lg.E_Y = sol.curves.E_Y[t];
    // the reflected mean sits on an affine boundary up to the root tolerance
    const double touch = std::max(1e-9, 1e3 * inst.sp_tol);
    lg.s_star = first_touch(sol.curves.E_Y, L, t, nt, touch);
    lg.q_star = first_touch(sol.curves.E_Y, R, t, nt, touch);
    lg.gg = gg_in;
    add_unique(lg.gg.S_set, lg.s_star);
    add_unique(lg.gg.Q_set, lg.q_star);

    // A constant terminal stays constant along the lattice sweep, so the
    // auxiliary equation reduces to the scalar recursion on the fine grid.
    const GeneratorSpec& gen = inst.gen;
    auto scalar = [&](double c, int tau) {
        double y = c;
        for (int k = tau * m; k > t * m; --k) {
            const double tk = grid.fine_time(k);
            y = y + grid.fine_dt() * gen.f_at(tk, y, 0.0);
        }
        return y;
    };
    double xi_val;
    {
        GeneratorSpec g2 = gen;
        const auto full = solve_bsde(inst.terminal.row(grid), g2, grid, inst.vb);
        xi_val = expect_row(full.y_row(t * m), t, grid, inst.vb);
    }

    const std::size_t ns = lg.gg.S_set.size(), nq = lg.gg.Q_set.size();
    lg.value.assign(ns, std::vector<double>(nq));
    for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = 0; b < nq; ++b) {
            const int s = lg.gg.S_set[a], q = lg.gg.Q_set[b];
            if (std::min(s, q) == nt) lg.value[a][b] = xi_val;
            else if (s < q) lg.value[a][b] = scalar(L[s], s);
            else lg.value[a][b] = scalar(R[q], q);
        }
    const Reduced r = reduce(lg.value);
    lg.supinf = r.supinf;
    lg.infsup = r.infsup;
    lg.s_brute = lg.gg.S_set[r.s_arg];
    lg.q_brute = lg.gg.Q_set[r.q_arg];
    lg.brute_match = lg.s_brute == lg.s_star && lg.q_brute == lg.q_star;

    const auto sa = std::size_t(std::find(lg.gg.S_set.begin(), lg.gg.S_set.end(), lg.s_star) - lg.gg.S_set.begin());
    const auto qb = std::size_t(std::find(lg.gg.Q_set.begin(), lg.gg.Q_set.end(), lg.q_star) - lg.gg.Q_set.begin());
    lg.saddle_value = lg.value[sa][qb];
    bool ok = std::abs(lg.saddle_value - lg.supinf) <= tol;
    for (std::size_t a = 0; a < ns; ++a) ok = ok && lg.value[a][qb] >= lg.saddle_value - tol;
    for (std::size_t b = 0; b < nq; ++b) ok = ok && lg.value[sa][b] <= lg.saddle_value + tol;
    lg.saddle_ok = ok;
    return lg;
}

Comparison compare_loss(const MRInstance& i1, const MRInstance& i2) {
    const Grid& grid = i1.grid;
    if (grid.nt() != i2.grid.nt() || grid.nx() != i2.grid.nx() || grid.T() != i2.grid.T())
        throw PreconditionError("compare_loss: instances must share the grid");
    for (int i = 0; i <= grid.nt(); ++i)
        for (double x = -20.0; x <= 20.0; x += 0.5) {
            if (i1.losses.lower(i, x) > i2.losses.lower(i, x) + 1e-12 ||
                i1.losses.upper(i, x) > i2.losses.upper(i, x) + 1e-12)
                throw PreconditionError("compare_loss: losses are not ordered (need L1 <= L2, R1 <= R2)");
        }
    MRInstance a = i1, b = i2;
    a.policy = b.policy = Policy::linear_y;
    const MRSolution s1 = solve(a), s2 = solve(b);
    Comparison c;
    c.margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid.nt(); ++i) {
        const auto y1 = s1.y_row(i), y2 = s2.y_row(i);
        for (std::size_t j = 0; j < y1.size(); ++j) c.margin = std::min(c.margin, y1[j] - y2[j]);
    }
    c.tol = grid.tolerance();
    c.ok = c.margin >= -c.tol;
    return c;
}

Sandwich sandwich(const MRInstance& inst, double lambda) {
    std::vector<double> ef;
    const ReflectionData c = reflect_linear(inst, ef);
    const Grid& grid = inst.grid;
    const int nt = grid.nt(), m = grid.substeps();
    Sandwich sw;
    sw.tol = grid.tolerance();
    const double adm = std::max(inst.adm_tol, 1e3 * inst.sp_tol);

    // R-flat system: extra push lambda t on A^L.
    {
        std::vector<double> AL(nt + 1), s(nt + 1);
        for (int i = 0; i <= nt; ++i) {
            AL[i] = c.AL[i] + lambda * c.t[i];
            s[i] = c.s[i] - AL[i];
        }
        const auto sp = solve_one_sided(c.t, s, c.bs.upper, false, true, c.a, inst.sp_tol, inst.adm_tol);
        bool admissible = true;
        for (int i = 0; i <= nt; ++i) admissible = admissible && c.bs.lower(i, sp.x[i]) <= adm;
        if (!admissible) {
            sw.lower_skipped = true;
        } else {
            sw.lower_margin = std::numeric_limits<double>::infinity();
            const double AT = sp.kr[nt] - AL[nt];
            for (int i = 0; i <= nt; ++i) {
                const double d_low = AT - (sp.kr[i] - AL[i]);
                sw.lower_margin = std::min(sw.lower_margin, (c.delta[i] - d_low) / ef[i * m]);
            }
        }
    }
    // L-flat system: extra push lambda t on A^R.
    {
        std::vector<double> AR(nt + 1), s(nt + 1);
        for (int i = 0; i <= nt; ++i) {
            AR[i] = c.AR[i] + lambda * c.t[i];
            s[i] = c.s[i] + AR[i];
        }
        const auto sp = solve_one_sided(c.t, s, c.bs.lower, true, true, c.a, inst.sp_tol, inst.adm_tol);
        bool admissible = true;
        for (int i = 0; i <= nt; ++i) admissible = admissible && c.bs.upper(i, sp.x[i]) >= -adm;
        if (!admissible) {
            sw.upper_skipped = true;
        } else {
            sw.upper_margin = std::numeric_limits<double>::infinity();
            const double AT = AR[nt] - sp.kl[nt];
            for (int i = 0; i <= nt; ++i) {
                const double d_up = AT - (AR[i] - sp.kl[i]);
                sw.upper_margin = std::min(sw.upper_margin, (d_up - c.delta[i]) / ef[i * m]);
            }
        }
    }
    sw.ok = (sw.lower_skipped || sw.lower_margin >= -sw.tol) &&
            (sw.upper_skipped || sw.upper_margin >= -sw.tol);
    return sw;
}

void write_game_csv(std::ostream& os, const GameValues& gv) {
    os << "s,q,upper,lower\n";
    for (std::size_t a = 0; a < gv.gg.S_set.size(); ++a)
        for (std::size_t b = 0; b < gv.gg.Q_set.size(); ++b)
            os << gv.gg.S_set[a] << ',' << gv.gg.Q_set[b] << ',' << fmt17(gv.upper[a][b]) << ','
               << fmt17(gv.lower[a][b]) << '\n';
    os << "\nsupinf_upper,infsup_lower,E_Y,negE_negY,s_star,q_star\n"
       << fmt17(gv.supinf_upper) << ',' << fmt17(gv.infsup_lower) << ',' << fmt17(gv.E_Y) << ','
       << fmt17(gv.negE_negY) << ',' << gv.s_star << ',' << gv.q_star << '\n';
}

}  // namespace mrgbsde
