#include "mrgbsde/meanreflect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mrgbsde/errors.hpp"

namespace mrgbsde {

std::string to_string(Policy p) {
    switch (p) {
        case Policy::constant: return "constant";
        case Policy::linear_y: return "linear_y";
        case Policy::lipschitz_segmented: return "lipschitz_segmented";
        case Policy::picard: return "picard";
    }
    return "?";
}

Policy policy_from(const std::string& name) {
    for (Policy p : {Policy::constant, Policy::linear_y, Policy::lipschitz_segmented, Policy::picard})
        if (to_string(p) == name) return p;
    throw ConfigError("unknown policy '" + name + "'");
}

void MRInstance::validate() const {
    terminal.validate();
    gen.validate();
    if (losses.lower.points() != grid.nt() + 1 || losses.upper.points() != grid.nt() + 1)
        throw ConfigError("loss threshold rows must have nt + 1 entries");
    grid.check_cfl(vb, gen.cfl_rate(grid.h(), grid.T(), vb));
    if (!(tol_iter > 0.0)) throw ConfigError("tol_iter must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(beta >= 1.0)) throw ConfigError("beta must be >= 1");
    if (boundary_points < 3) throw ConfigError("boundary_points must be >= 3");
    const auto xi = terminal.row(grid);
    const int n = grid.nt();
    std::vector<double> lrow(xi.size()), rrow(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        lrow[j] = losses.lower(n, xi[j]);
        rrow[j] = losses.upper(n, xi[j]);
    }
    const double el = expect_row(lrow, n, grid, vb);
    const double er = expect_row(rrow, n, grid, vb);
    if (el > adm_tol || er < -adm_tol)
        throw PreconditionError("terminal admissibility violated: E^[L(T, xi)] = " + fmt17(el) +
                                ", E^[R(T, xi)] = " + fmt17(er) + " (need L-side <= 0 <= R-side)");
}

double MRSolution::delta_fine(int k) const {
    const int m = substeps;
    const int i = k / m, r = k % m;
    if (r == 0) return delta[i];
    return delta[i] + (delta[i + 1] - delta[i]) * double(r) / m;
}

double MRSolution::y(int coarse_i, int j) const {
    return bar.y_at(coarse_i * substeps, j) + delta[coarse_i];
}

std::vector<double> MRSolution::y_row(int coarse_i) const {
    const auto r = bar.y_row(coarse_i * substeps);
    std::vector<double> out(r.begin(), r.end());
    for (double& v : out) v += delta[coarse_i];
    return out;
}

ValueField MRSolution::y_field() const {
    const int nt = int(delta.size()) - 1;
    ValueField f(nt + 1, bar.y.cols(), bar.y.row_dt() * substeps);
    for (int i = 0; i <= nt; ++i) {
        const auto r = y_row(i);
        std::copy(r.begin(), r.end(), f.row(i).begin());
    }
    return f;
}

namespace {

std::vector<double> coarse_means(const BsdeSolution& S, int i0, int i1, const Grid& grid,
                                 const VolBounds& vb, bool negate) {
    const int m = grid.substeps();
    std::vector<double> out(i1 - i0 + 1);
    for (int i = i0; i <= i1; ++i) {
        const auto r = S.y_row(i * m);
        if (negate) {
            std::vector<double> neg(r.begin(), r.end());
            for (double& v : neg) v = -v;
            out[i - i0] = -expect_row(neg, i, grid, vb);
        } else {
            out[i - i0] = expect_row(r, i, grid, vb);
        }
    }
    return out;
}

// loss_local is indexed 0..i1-i0; shift[i] is the centring constant and
// level[i] = E^[S + shift] computed on the lattice.
BoundaryCurve map_curve(const BoundaryCurve& loss, const BsdeSolution& S, int i0,
                        const std::vector<double>& shift, const std::vector<double>& level,
                        int points, const Grid& grid, const VolBounds& vb) {
    const int n1 = loss.points();
    const int m = grid.substeps();
    if (loss.kind() == BoundaryCurve::Kind::affine_threshold) {
        // E^[a s (S + shift + x) - thr] = a s (level + x) - thr by positive
        // homogeneity and constant preservation.
        std::vector<double> thr(n1);
        for (int i = 0; i < n1; ++i)
            thr[i] = loss.threshold()[i] - loss.slope() * loss.arg_scale()[i] * level[i];
        return BoundaryCurve::affine(loss.slope(), std::move(thr)).with_arg_scale(loss.arg_scale());
    }
    std::vector<std::vector<double>> knots(n1), values(n1);
    const double ratio = loss.C_lip() / loss.c_lip();
    std::vector<double> row(grid.cols());
    for (int i = 0; i < n1; ++i) {
        const auto s = S.y_row((i0 + i) * m);
        for (int j = 0; j < grid.cols(); ++j) row[j] = std::abs(s[j] + shift[i]);
        const double spread = expect_row(row, i0 + i, grid, vb);
        const double x0 = loss.root(i, 0.0, 1e-12);
        const double lo = x0 - ratio * spread - 1.0, hi = x0 + ratio * spread + 1.0;
        knots[i].resize(points);
        values[i].resize(points);
        for (int q = 0; q < points; ++q) {
            const double x = lo + (hi - lo) * q / (points - 1);
            for (int j = 0; j < grid.cols(); ++j) row[j] = loss(i, s[j] + shift[i] + x);
            knots[i][q] = x;
            values[i][q] = expect_row(row, i0 + i, grid, vb);
        }
    }
    // sin losses continue with their average slope
    std::vector<double> tail;
    if (loss.kind() == BoundaryCurve::Kind::sin_perturbed) tail = loss.arg_scale();
    return BoundaryCurve::tabulated(std::move(knots), std::move(values), loss.c_lip(), loss.C_lip(),
                                    std::move(tail));
}

BoundaryPair map_pair(const BsdeSolution& S, const BoundaryPair& losses_local, int i0, int i1,
                      const Grid& grid, const VolBounds& vb, Centering centering, int points,
                      const std::vector<double>* upper_means) {
    std::vector<double> shift, level;
    if (centering == Centering::upper) {
        std::vector<double> mu = upper_means ? *upper_means : coarse_means(S, i0, i1, grid, vb, false);
        shift.resize(mu.size());
        level.assign(mu.size(), 0.0);
        for (std::size_t i = 0; i < mu.size(); ++i) shift[i] = -mu[i];
    } else {
        const auto mu = upper_means ? *upper_means : coarse_means(S, i0, i1, grid, vb, false);
        const auto lo = coarse_means(S, i0, i1, grid, vb, true);  // -E^[-S]
        shift.resize(mu.size());
        level.resize(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) {
            shift[i] = -lo[i];
            level[i] = mu[i] - lo[i];
        }
    }
    auto l = map_curve(losses_local.lower, S, i0, shift, level, points, grid, vb);
    auto r = map_curve(losses_local.upper, S, i0, shift, level, points, grid, vb);
    // Interpolation between knots can eat a sliver of the separation.
    return BoundaryPair::make(std::move(l), std::move(r), 0.5 * losses_local.sep);
}

double interp_coarse(const std::vector<double>& v, int k_local, int m) {
    const int i = k_local / m, r = k_local % m;
    if (r == 0) return v[i];
    return v[i] + (v[i + 1] - v[i]) * double(r) / m;
}

void require_full(const MRInstance& inst) { inst.validate(); }

// Fills f_used/g_used/a of `bar` from the full process Y given on fine rows.
void accruals_from_y(BsdeSolution& bar, const ValueField& Y, const GeneratorSpec& gen,
                     const Grid& grid) {
    const int n = grid.cols();
    const int N = Y.rows() - 1;
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    for (int k = 0; k <= N; ++k) {
        const int src = std::min(k + 1, N);
        const auto u = Y.row(src);
        const auto z = first_difference(u, grid.h());
        const double t = grid.fine_time(bar.k0 + src);
        for (int j = 0; j < n; ++j) {
            const double f = gen.f_at(t, u[j], z[j]);
            const double g = gen.g_at(t, u[j], z[j]);
            const double d2 = (j == 0 || j == n - 1) ? 0.0 : (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_h2;
            bar.f_used(k, j) = f;
            bar.g_used(k, j) = g;
            bar.a(k, j) = d2 + 2.0 * g;
        }
    }
}

MRSolution finish(MRSolution sol, const MRInstance& inst) {
    sol.substeps = inst.grid.substeps();
    sol.curves = mean_curves(sol, inst);
    double tv = sol.AR.back() + sol.AL.back();
    sol.tol_flat = inst.tol_flat >= 0.0 ? inst.tol_flat : inst.grid.tolerance() * (1.0 + tv);
    return sol;
}

}  // namespace

ReflectionData reflect(BsdeSolution bar, int i0, int i1, const BoundaryPair& losses_local,
                       const MRInstance& inst) {
    const Grid& grid = inst.grid;
    ReflectionData c;
    c.means = coarse_means(bar, i0, i1, grid, inst.vb, false);
    c.bs = map_pair(bar, losses_local, i0, i1, grid, inst.vb, Centering::upper,
                    inst.boundary_points, &c.means);
    const int n = i1 - i0;
    c.s.resize(n + 1);
    for (int i = 0; i <= n; ++i) c.s[i] = c.means[0] - c.means[i];
    c.a = c.means[n];
    c.t.resize(n + 1);
    for (int i = 0; i <= n; ++i) c.t[i] = grid.time(i0 + i);
    c.sp = solve_backward(c.t, c.a, c.s, c.bs, inst.sp_tol, inst.adm_tol);
    c.A = c.sp.k;
    c.AR = c.sp.kr;
    c.AL = c.sp.kl;
    c.delta.resize(n + 1);
    for (int i = 0; i <= n; ++i) c.delta[i] = c.A[n] - c.A[i];
    c.bar = std::move(bar);
    return c;
}

BoundaryPair build_boundaries(const BsdeSolution& S, const BoundaryPair& losses, const Grid& grid,
                              const VolBounds& vb, int i0, int i1, Centering centering, int points) {
    if (i0 < 0 || i1 > grid.nt() || i0 > i1) throw PreconditionError("build_boundaries: bad range");
    const int m = grid.substeps();
    if (i0 * m < S.k0 || i1 * m > S.k1())
        throw PreconditionError("build_boundaries: S does not cover the requested range");
    const BoundaryPair local = losses.slice(i0, i1);
    return map_pair(S, local, i0, i1, grid, vb, centering, points, nullptr);
}

MeanCurves mean_curves(const MRSolution& sol, const MRInstance& inst) {
    const Grid& grid = inst.grid;
    MeanCurves mc;
    const int nt = grid.nt();
    std::vector<double> tmp(grid.cols());
    for (int i = 0; i <= nt; ++i) {
        const auto y = sol.y_row(i);
        mc.t.push_back(grid.time(i));
        mc.E_Y.push_back(expect_row(y, i, grid, inst.vb));
        for (int j = 0; j < grid.cols(); ++j) tmp[j] = -y[j];
        mc.negE_negY.push_back(-expect_row(tmp, i, grid, inst.vb));
        for (int j = 0; j < grid.cols(); ++j) tmp[j] = inst.losses.lower(i, y[j]);
        mc.slack_L.push_back(expect_row(tmp, i, grid, inst.vb));
        for (int j = 0; j < grid.cols(); ++j) tmp[j] = inst.losses.upper(i, y[j]);
        mc.slack_R.push_back(expect_row(tmp, i, grid, inst.vb));
    }
    return mc;
}

MRSolution solve_constant(const MRInstance& inst) {
    require_full(inst);
    if (!inst.gen.yz_independent())
        throw PreconditionError("constant route needs a generator independent of (y, z)");
    const Grid& grid = inst.grid;
    MRSolution sol;
    ReflectionData c =
        reflect(solve_bsde(inst.terminal.row(grid), inst.gen, grid, inst.vb), 0, grid.nt(), inst.losses, inst);
    sol.bar = std::move(c.bar);
    sol.A = c.A;
    sol.AR = c.AR;
    sol.AL = c.AL;
    sol.delta = c.delta;
    sol.iterations.push_back({0, 1, 0.0});
    return finish(std::move(sol), inst);
}

ReflectionData reflect_linear(const MRInstance& inst, std::vector<double>& ef) {
    require_full(inst);
    const GeneratorSpec& gen = inst.gen;
    if (!gen.linear_in_y())
        throw PreconditionError("linear_y route needs f = gamma_t y + f'(t, z) and g = g(t, z)");
    const Grid& grid = inst.grid;
    const int N = grid.fine_steps(), m = grid.substeps(), nt = grid.nt();
    const double dtf = grid.fine_dt();

    std::vector<double> af(N + 1, 0.0);
    ef.assign(N + 1, 1.0);
    for (int k = 1; k <= N; ++k)
        af[k] = af[k - 1] + 0.5 * dtf * (gen.gamma(grid.fine_time(k - 1)) + gen.gamma(grid.fine_time(k)));
    for (int k = 0; k <= N; ++k) ef[k] = std::exp(af[k]);

    auto xi = inst.terminal.row(grid);
    for (double& v : xi) v *= ef[N];
    RowGenerator tg = [&](int k, std::span<const double> u, std::span<const double> z,
                          std::span<double> f, std::span<double> g) {
        const double t = grid.fine_time(k), e = ef[k];
        for (std::size_t j = 0; j < u.size(); ++j) {
            f[j] = e * gen.f_at(t, 0.0, z[j] / e);
            g[j] = e * gen.g_at(t, 0.0, z[j] / e);
        }
    };
    std::vector<double> inv_scale(nt + 1);
    for (int i = 0; i <= nt; ++i) inv_scale[i] = 1.0 / ef[i * m];
    const BoundaryPair losses_a{inst.losses.lower.with_arg_scale(inv_scale),
                                inst.losses.upper.with_arg_scale(inv_scale), inst.losses.sep};
    return reflect(sweep(xi, 0, N, grid, inst.vb, tg), 0, nt, losses_a, inst);
}

MRSolution solve_linear_y(const MRInstance& inst) {
    std::vector<double> ef;
    const ReflectionData c = reflect_linear(inst, ef);
    const BsdeSolution& bar_a = c.bar;
    const GeneratorSpec& gen = inst.gen;
    const Grid& grid = inst.grid;
    const int N = grid.fine_steps(), m = grid.substeps(), nt = grid.nt(), n = grid.cols();
    const double dtf = grid.fine_dt();
    std::vector<double> inv_scale(nt + 1);
    for (int i = 0; i <= nt; ++i) inv_scale[i] = 1.0 / ef[i * m];

    MRSolution sol;
    sol.substeps = m;
    sol.AR.assign(nt + 1, 0.0);
    sol.AL.assign(nt + 1, 0.0);
    sol.A.assign(nt + 1, 0.0);
    for (int i = 0; i < nt; ++i) {
        const double w = inv_scale[i];
        sol.AR[i + 1] = sol.AR[i] + w * (c.AR[i + 1] - c.AR[i]);
        sol.AL[i + 1] = sol.AL[i] + w * (c.AL[i + 1] - c.AL[i]);
        sol.A[i + 1] = sol.AR[i + 1] - sol.AL[i + 1];
    }
    sol.delta.resize(nt + 1);
    for (int i = 0; i <= nt; ++i) sol.delta[i] = sol.A[nt] - sol.A[i];

    ValueField Y(N + 1, n, dtf);
    for (int k = 0; k <= N; ++k) {
        const double da = interp_coarse(c.delta, k, m);
        for (int j = 0; j < n; ++j) Y(k, j) = (bar_a.y(k, j) + da) / ef[k];
    }
    sol.bar.k0 = 0;
    sol.bar.substeps = m;
    sol.bar.y = ValueField(N + 1, n, dtf);
    sol.bar.f_used = ValueField(N + 1, n, dtf);
    sol.bar.g_used = ValueField(N + 1, n, dtf);
    sol.bar.a = ValueField(N + 1, n, dtf);
    for (int k = 0; k <= N; ++k) {
        const double d = sol.delta_fine(k);
        for (int j = 0; j < n; ++j) sol.bar.y(k, j) = Y(k, j) - d;
    }
    accruals_from_y(sol.bar, Y, gen, grid);
    sol.iterations.push_back({0, 1, 0.0});
    return finish(std::move(sol), inst);
}

int segment_count(const MRInstance& inst) {
    const GeneratorSpec& gen = inst.gen;
    if ((gen.f.kind == GeneratorTerm::Kind::mao && !gen.f.y_free()) ||
        (gen.g.kind == GeneratorTerm::Kind::mao && !gen.g.y_free()))
        throw PreconditionError("segmented route needs a y-Lipschitz generator (mao is not)");
    const double ky = gen.gamma_bound(inst.grid.T()) + inst.vb.sigma_high_sq * gen.g.y_rate();
    const double Ct = ky * (1.0 + 12.0 * inst.losses.C_lip() / inst.losses.c_lip());
    if (Ct == 0.0) return 1;
    const double T = inst.grid.T();
    for (int n = 1; n <= inst.grid.nt(); ++n) {
        const double d = T / n;
        if (Ct * d * std::exp(Ct * d) < 0.5) return n;
    }
    throw ConfigError("segmented route: the contraction needs more segments than nt = " +
                      std::to_string(inst.grid.nt()) + " coarse steps");
}

MRSolution solve_fixed_point(const MRInstance& inst) {
    require_full(inst);
    const GeneratorSpec& gen = inst.gen;
    const Grid& grid = inst.grid;
    const int N = grid.fine_steps(), m = grid.substeps(), nt = grid.nt(), n = grid.cols();
    const double dtf = grid.fine_dt();
    const int nseg = inst.policy == Policy::lipschitz_segmented ? segment_count(inst) : 1;
    std::vector<int> cut(nseg + 1);
    for (int s = 0; s <= nseg; ++s) cut[s] = int(std::lround(double(s) * nt / nseg));

    MRSolution sol;
    sol.substeps = m;
    sol.segments = nseg;
    ValueField Y(N + 1, n, dtf);
    sol.bar.k0 = 0;
    sol.bar.substeps = m;
    sol.bar.f_used = ValueField(N + 1, n, dtf);
    sol.bar.g_used = ValueField(N + 1, n, dtf);
    sol.bar.a = ValueField(N + 1, n, dtf);
    std::vector<std::vector<double>> segA(nseg), segAR(nseg), segAL(nseg);
    std::vector<double> terminal = inst.terminal.row(grid);
    std::vector<double> diff(n);

    for (int s = nseg - 1; s >= 0; --s) {
        const int i0 = cut[s], i1 = cut[s + 1], k0 = i0 * m, k1 = i1 * m;
        const BoundaryPair local = inst.losses.slice(i0, i1);
        ValueField U(k1 - k0 + 1, n, dtf, 0.0);
        std::vector<double> deltas;
        bool converged = false;
        BsdeSolution bar;
        for (int it = 1; it <= inst.max_iters; ++it) {
            RowGenerator fg = [&](int k, std::span<const double> u, std::span<const double> z,
                                  std::span<double> f, std::span<double> g) {
                const double t = grid.fine_time(k);
                const auto Uk = U.row(k - k0);
                for (std::size_t j = 0; j < u.size(); ++j) {
                    f[j] = gen.f_at(t, Uk[j], z[j]);
                    g[j] = gen.g_at(t, Uk[j], z[j]);
                }
            };
            ReflectionData c = reflect(sweep(terminal, k0, k1, grid, inst.vb, fg), i0, i1, local, inst);
            bar = std::move(c.bar);
            double dn = 0.0;
            for (int i = i0; i <= i1; ++i) {
                const int r = (i - i0) * m;
                for (int j = 0; j < n; ++j)
                    diff[j] = std::pow(std::abs(bar.y(r, j) + c.delta[i - i0] - U(r, j)), inst.beta);
                dn = std::max(dn, expect_row(diff, i, grid, inst.vb));
            }
            for (int r = 0; r <= k1 - k0; ++r) {
                const double d = interp_coarse(c.delta, r, m);
                for (int j = 0; j < n; ++j) U(r, j) = bar.y(r, j) + d;
            }
            deltas.push_back(dn);
            sol.iterations.push_back({s, it, dn});
            segA[s] = c.A;
            segAR[s] = c.AR;
            segAL[s] = c.AL;
            if (dn < inst.tol_iter) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw ConvergenceError("fixed-point iteration did not reach tol_iter = " +
                                   fmt17(inst.tol_iter) + " within " +
                                   std::to_string(inst.max_iters) + " iterations (segment " +
                                   std::to_string(s) + ", last delta " + fmt17(deltas.back()) + ")",
                                   deltas);
        const int last = (s == nseg - 1) ? k1 : k1 - 1;
        for (int k = k0; k <= last; ++k) {
            const int r = k - k0;
            for (int j = 0; j < n; ++j) {
                Y(k, j) = U(r, j);
                sol.bar.f_used(k, j) = bar.f_used(r, j);
                sol.bar.g_used(k, j) = bar.g_used(r, j);
                sol.bar.a(k, j) = bar.a(r, j);
            }
        }
        terminal.assign(U.row(0).begin(), U.row(0).end());
    }

    sol.A.assign(nt + 1, 0.0);
    sol.AR.assign(nt + 1, 0.0);
    sol.AL.assign(nt + 1, 0.0);
    double oA = 0.0, oR = 0.0, oL = 0.0;
    for (int s = 0; s < nseg; ++s) {
        const int i0 = cut[s], i1 = cut[s + 1];
        for (int i = i0; i <= i1; ++i) {
            sol.A[i] = oA + segA[s][i - i0];
            sol.AR[i] = oR + segAR[s][i - i0];
            sol.AL[i] = oL + segAL[s][i - i0];
        }
        oA = sol.A[i1];
        oR = sol.AR[i1];
        oL = sol.AL[i1];
    }
    sol.delta.resize(nt + 1);
    for (int i = 0; i <= nt; ++i) sol.delta[i] = sol.A[nt] - sol.A[i];
    sol.bar.y = ValueField(N + 1, n, dtf);
    for (int k = 0; k <= N; ++k) {
        const double d = sol.delta_fine(k);
        for (int j = 0; j < n; ++j) sol.bar.y(k, j) = Y(k, j) - d;
    }
    return finish(std::move(sol), inst);
}

MRSolution solve(const MRInstance& inst) {
    switch (inst.policy) {
        case Policy::constant: return solve_constant(inst);
        case Policy::linear_y: return solve_linear_y(inst);
        case Policy::lipschitz_segmented:
        case Policy::picard: return solve_fixed_point(inst);
    }
    throw ConfigError("unknown policy");
}

MRFlatness check_flatness(const MRSolution& sol, const MRInstance& inst) {
    MRFlatness f;
    const auto& c = sol.curves;
    const int nt = int(sol.A.size()) - 1;
    for (int i = 0; i < nt; ++i) {
        f.sum_R += std::abs(c.slack_R[i]) * (sol.AR[i + 1] - sol.AR[i]);
        f.sum_L += std::abs(c.slack_L[i]) * (sol.AL[i + 1] - sol.AL[i]);
    }
    for (int i = 0; i <= nt; ++i) f.worst_slack = std::max({f.worst_slack, c.slack_L[i], -c.slack_R[i]});
    f.tv = sol.AR.back() + sol.AL.back();
    f.tol = inst.tol_flat >= 0.0 ? inst.tol_flat : inst.grid.tolerance() * (1.0 + f.tv);
    f.ok = f.sum_R <= f.tol && f.sum_L <= f.tol && f.worst_slack <= inst.grid.tolerance();
    return f;
}

AStability a_stability(const MRSolution& s1, const MRSolution& s2, const MRInstance& i1,
                       const MRInstance& i2) {
    const Grid& grid = i1.grid;
    AStability r;
    for (std::size_t i = 0; i < s1.A.size(); ++i) r.lhs = std::max(r.lhs, std::abs(s1.A[i] - s2.A[i]));
    const auto x1 = i1.terminal.row(grid), x2 = i2.terminal.row(grid);
    std::vector<double> d(x1.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = std::abs(x1[j] - x2[j]);
    const double exi = expect_row(d, grid.nt(), grid, i1.vb);
    const double df = std::abs(i1.gen.f.a0 - i2.gen.f.a0);
    const double dg = std::abs(i1.gen.g.a0 - i2.gen.g.a0);
    const double c = std::min(i1.losses.c_lip(), i2.losses.c_lip());
    const double C = std::max(i1.losses.C_lip(), i2.losses.C_lip());
    r.C_tilde = 14.0 * C / c;
    r.rhs = r.C_tilde * (exi + grid.T() * df + i1.vb.sigma_high_sq * grid.T() * dg);
    r.ok = r.lhs <= r.rhs + grid.tolerance();
    return r;
}

void write_results_csv(std::ostream& os, const MRSolution& sol) {
    os << "t,E_Y,negE_negY,A,A_R,A_L,slack_L,slack_R\n";
    const auto& c = sol.curves;
    for (std::size_t i = 0; i < sol.A.size(); ++i)
        os << fmt17(c.t[i]) << ',' << fmt17(c.E_Y[i]) << ',' << fmt17(c.negE_negY[i]) << ','
           << fmt17(sol.A[i]) << ',' << fmt17(sol.AR[i]) << ',' << fmt17(sol.AL[i]) << ','
           << fmt17(c.slack_L[i]) << ',' << fmt17(c.slack_R[i]) << '\n';
}

void write_iterations_csv(std::ostream& os, const MRSolution& sol) {
    os << "iter,delta_beta_norm\n";
    int idx = 0;
    for (const auto& r : sol.iterations) os << ++idx << ',' << fmt17(r.delta) << '\n';
}

}  // namespace mrgbsde
