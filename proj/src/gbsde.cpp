#include "mrgbsde/gbsde.hpp"

#include <algorithm>
#include <cmath>

#include "kernel.hpp"
#include "mrgbsde/errors.hpp"

namespace mrgbsde {

double mao_m(double y) {
    const double u = std::abs(y);
    double mu;
    if (u == 0.0)
        mu = 0.0;
    else if (u <= 1.0)
        mu = u * (1.0 - std::log(u));
    else
        mu = u;
    return y < 0.0 ? -mu : mu;
}

double mao_modulus(double r) {
    constexpr double inv_e = 0.36787944117144233;
    if (r <= 0.0) return 0.0;
    const double u = 0.5 * r;
    return 2.0 * (u <= inv_e ? u * (1.0 - std::log(u)) : u + inv_e);
}

double GeneratorTerm::operator()(double y, double z) const {
    switch (kind) {
        case Kind::affine: return a0 + a1 * y + a2 * z;
        case Kind::lipschitz_sin: return a0 + a1 * std::sin(y) + a2 * std::abs(z);
        case Kind::mao: return a0 + a1 * mao_m(y) + a2 * z;
    }
    return 0.0;
}

std::string to_string(GeneratorTerm::Kind k) {
    switch (k) {
        case GeneratorTerm::Kind::affine: return "affine";
        case GeneratorTerm::Kind::lipschitz_sin: return "lipschitz_sin";
        case GeneratorTerm::Kind::mao: return "mao";
    }
    return "?";
}

GeneratorTerm::Kind generator_kind_from(const std::string& name) {
    using K = GeneratorTerm::Kind;
    for (K k : {K::affine, K::lipschitz_sin, K::mao})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown generator kind '" + name + "'");
}

double GeneratorSpec::gamma(double t) const {
    if (gamma_poly.empty()) return f.kind == GeneratorTerm::Kind::affine ? f.a1 : 0.0;
    double v = 0.0, p = 1.0;
    for (double c : gamma_poly) {
        v += c * p;
        p *= t;
    }
    return v;
}

double GeneratorSpec::f_at(double t, double y, double z) const {
    if (gamma_poly.empty()) return f(y, z);
    return gamma(t) * y + f.a0 + f.a2 * z;
}

double GeneratorSpec::gamma_bound(double T) const {
    if (gamma_poly.empty()) return f.y_rate();
    double b = 0.0, p = 1.0;
    for (double c : gamma_poly) {
        b += std::abs(c) * p;
        p *= std::max(1.0, T);
    }
    return b;
}

double GeneratorSpec::cfl_rate(double h, double T, const VolBounds& vb) const {
    return (vb.sigma_high_sq * g.z_lipschitz() + f.z_lipschitz()) / h + gamma_bound(T) +
           vb.sigma_high_sq * g.y_rate();
}

double GeneratorSpec::kappa(double T, const VolBounds& vb) const {
    return std::max({gamma_bound(T), f.z_lipschitz(), vb.sigma_high_sq * g.y_rate(),
                     vb.sigma_high_sq * g.z_lipschitz()});
}

bool GeneratorSpec::linear_in_y() const {
    if (!g.y_free()) return false;
    return f.kind == GeneratorTerm::Kind::affine || f.y_free();
}

void GeneratorSpec::validate() const {
    for (double v : {f.a0, f.a1, f.a2, g.a0, g.a1, g.a2})
        if (!std::isfinite(v)) throw ConfigError("generator coefficients must be finite");
    for (double v : gamma_poly)
        if (!std::isfinite(v)) throw ConfigError("generator gamma coefficients must be finite");
    if (!gamma_poly.empty() && f.kind != GeneratorTerm::Kind::affine)
        throw ConfigError("a time-dependent gamma needs an affine f");
}

RowGenerator plain_generator(const GeneratorSpec& gen, const Grid& grid) {
    return [gen, grid](int k, std::span<const double> u, std::span<const double> z,
                       std::span<double> f, std::span<double> g) {
        const double t = grid.fine_time(k);
        for (std::size_t j = 0; j < u.size(); ++j) {
            f[j] = gen.f_at(t, u[j], z[j]);
            g[j] = gen.g_at(t, u[j], z[j]);
        }
    };
}

ValueField BsdeSolution::z_field(const Grid& grid) const {
    ValueField yc = y_field();
    ValueField z(yc.rows(), yc.cols(), yc.row_dt());
    for (int i = 0; i < yc.rows(); ++i) {
        const auto d = first_difference(yc.row(i), grid.h());
        std::copy(d.begin(), d.end(), z.row(i).begin());
    }
    return z;
}

BsdeSolution sweep(std::span<const double> terminal, int k0, int k1, const Grid& grid,
                   const VolBounds& vb, const RowGenerator& gen) {
    const int n = grid.cols();
    if (int(terminal.size()) != n) throw ConfigError("sweep: terminal row length does not match grid");
    if (k0 < 0 || k1 > grid.fine_steps() || k0 > k1) throw ConfigError("sweep: bad fine index range");
    const int rows = k1 - k0 + 1;
    const double dtf = grid.fine_dt();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    BsdeSolution sol;
    sol.k0 = k0;
    sol.substeps = grid.substeps();
    sol.y = ValueField(rows, n, dtf);
    sol.f_used = ValueField(rows, n, dtf);
    sol.g_used = ValueField(rows, n, dtf);
    sol.a = ValueField(rows, n, dtf);
    const auto c = detail::step_coeffs(grid, vb);

    std::vector<double> cur(terminal.begin(), terminal.end()), nxt(n), frow(n), grow(n);
    std::copy(cur.begin(), cur.end(), sol.y.row(rows - 1).begin());
    auto record = [&](int r) {
        auto fa = sol.f_used.row(r), ga = sol.g_used.row(r), aa = sol.a.row(r);
        for (int j = 0; j < n; ++j) {
            fa[j] = frow[j];
            ga[j] = grow[j];
            const double d2 =
                (j == 0 || j == n - 1) ? 0.0 : (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) * inv_h2;
            aa[j] = d2 + 2.0 * grow[j];
        }
    };
    for (int k = k1; k > k0; --k) {
        const auto z = first_difference(cur, grid.h());
        gen(k, cur, z, frow, grow);
        if (k == k1) record(rows - 1);
        record(k - 1 - k0);
        nxt[0] = detail::edge_update(cur[0], grow[0], frow[0], c);
        nxt[n - 1] = detail::edge_update(cur[n - 1], grow[n - 1], frow[n - 1], c);
        for (int j = 1; j < n - 1; ++j)
            nxt[j] = detail::interior_update(cur[j - 1], cur[j], cur[j + 1], grow[j], frow[j], c);
        for (int j = 0; j < n; ++j)
            if (!std::isfinite(nxt[j]))
                throw DomainError("G-BSDE sweep produced a non-finite value at fine step " +
                                  std::to_string(k - 1));
        cur.swap(nxt);
        std::copy(cur.begin(), cur.end(), sol.y.row(k - 1 - k0).begin());
    }
    if (k0 == k1) {
        const auto z = first_difference(cur, grid.h());
        gen(k1, cur, z, frow, grow);
        record(0);
    }
    (void)dtf;
    return sol;
}

BsdeSolution solve_bsde(std::span<const double> terminal, const GeneratorSpec& gen,
                        const Grid& grid, const VolBounds& vb) {
    gen.validate();
    grid.check_cfl(vb, gen.cfl_rate(grid.h(), grid.T(), vb));
    return sweep(terminal, 0, grid.fine_steps(), grid, vb, plain_generator(gen, grid));
}

void ControlField::validate(const VolBounds& vb) const {
    for (double v : sigma_sq.data())
        if (!(v >= vb.sigma_low_sq - 1e-15 && v <= vb.sigma_high_sq + 1e-15))
            throw PreconditionError("control value " + fmt17(v) + " outside [sigma_low_sq, sigma_high_sq]");
}

std::vector<double> realize_k(const BsdeSolution& sol, const ControlField& ctrl,
                              std::span<const int> path, const Grid& grid, const VolBounds& vb) {
    ctrl.validate(vb);
    const int nt = grid.nt(), m = grid.substeps();
    if (int(path.size()) != nt + 1) throw PreconditionError("realize_k: path needs nt + 1 nodes");
    if (ctrl.sigma_sq.rows() != nt || ctrl.sigma_sq.cols() != grid.cols())
        throw PreconditionError("realize_k: control field must be nt x (nx + 1)");
    if (sol.k0 != 0 || sol.k1() != grid.fine_steps())
        throw PreconditionError("realize_k: solution must cover [0, T]");
    const double dtf = grid.fine_dt();
    std::vector<double> K(nt + 1, 0.0);
    for (int i = 0; i < nt; ++i) {
        const int j = path[i];
        if (j < 0 || j >= grid.cols()) throw PreconditionError("realize_k: path node out of range");
        const double s2 = ctrl.sigma_sq(i, j);
        double inc = 0.0;
        for (int k = i * m; k < (i + 1) * m; ++k) {
            const double a = sol.a(k, j);
            inc += dtf * (0.5 * s2 * a - g_eval(a, vb));
        }
        K[i + 1] = K[i] + inc;
    }
    return K;
}

std::vector<double> expect_with_k(const BsdeSolution& sol, std::span<const double> terminal,
                                  int coarse_t, int coarse_tau, const Accrual& acc, bool sup,
                                  const Grid& grid, const VolBounds& vb) {
    const int n = grid.cols(), m = grid.substeps();
    if (int(terminal.size()) != n) throw PreconditionError("expect_with_k: terminal row length");
    if (coarse_t < 0 || coarse_tau > grid.nt() || coarse_t > coarse_tau)
        throw PreconditionError("expect_with_k: need 0 <= t <= tau <= T");
    const int kt = coarse_t * m, ktau = coarse_tau * m;
    if (kt < sol.k0 || ktau > sol.k1())
        throw PreconditionError("expect_with_k: window outside the solved range");
    const auto c = detail::step_coeffs(grid, vb);
    const double dtf = c.dt;
    std::vector<double> cur(terminal.begin(), terminal.end()), nxt(n);
    for (int k = ktau - 1; k >= kt; --k) {
        const int r = k - sol.k0;
        const auto fa = sol.f_used.row(r), ga = sol.g_used.row(r), aa = sol.a.row(r);
        for (int j = 0; j < n; ++j) {
            double src_lo = 0.0, src_hi = 0.0;
            if (acc.generator) {
                src_lo += fa[j] + c.s_lo * ga[j];
                src_hi += fa[j] + c.s_hi * ga[j];
            }
            if (acc.k_residual) {
                const double G = g_eval(aa[j], vb);
                src_lo += G - 0.5 * c.s_lo * aa[j];
                src_hi += G - 0.5 * c.s_hi * aa[j];
            }
            double lo, hi;
            if (j == 0 || j == n - 1) {
                lo = cur[j] + dtf * src_lo;
                hi = cur[j] + dtf * src_hi;
            } else {
                lo = detail::fixed_update(cur[j - 1], cur[j], cur[j + 1], c.lam_lo, src_lo, dtf);
                hi = detail::fixed_update(cur[j - 1], cur[j], cur[j + 1], c.lam_hi, src_hi, dtf);
            }
            nxt[j] = sup ? std::max(lo, hi) : std::min(lo, hi);
        }
        cur.swap(nxt);
    }
    return cur;
}

BoundDiagnostic apriori_diagnostic(const BsdeSolution& sol, std::span<const double> terminal,
                                   const GeneratorSpec& gen, double alpha, double kappa_bound,
                                   const Grid& grid, const VolBounds& vb) {
    std::vector<double> xa(terminal.size());
    for (std::size_t j = 0; j < xa.size(); ++j) xa[j] = std::pow(std::abs(terminal[j]), alpha);
    const ValueField ex = solve_g_heat(xa, grid, vb);
    const ValueField yc = sol.y_field();
    BoundDiagnostic d;
    for (int i = 0; i < yc.rows(); ++i) {
        const double t = grid.time(i);
        const double h0 = std::abs(gen.f_at(t, 0.0, 0.0)) + vb.sigma_high_sq * std::abs(gen.g_at(t, 0.0, 0.0));
        for (int j = 0; j < yc.cols(); ++j) {
            const double lhs = std::pow(std::abs(yc(i, j)), alpha);
            const double rhs = kappa_bound * (ex(i, j) + (grid.T() - t) * std::pow(h0, alpha));
            if (rhs > 0.0) d.worst_ratio = std::max(d.worst_ratio, lhs / rhs);
            else if (lhs > 1e-12) d.worst_ratio = std::max(d.worst_ratio, 1e300);
        }
    }
    d.flagged = d.worst_ratio > 1.0;
    return d;
}

BoundDiagnostic stability_diagnostic(const BsdeSolution& s1, const BsdeSolution& s2,
                                     std::span<const double> xi1, std::span<const double> xi2,
                                     double kappa_bound, const Grid& grid, const VolBounds& vb) {
    std::vector<double> dx(xi1.size());
    for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = std::abs(xi1[j] - xi2[j]);
    const ValueField ex = solve_g_heat(dx, grid, vb);
    const ValueField y1 = s1.y_field(), y2 = s2.y_field();
    BoundDiagnostic d;
    for (int i = 0; i < y1.rows(); ++i)
        for (int j = 0; j < y1.cols(); ++j) {
            const double lhs = std::abs(y1(i, j) - y2(i, j));
            const double rhs = kappa_bound * ex(i, j);
            if (rhs > 0.0) d.worst_ratio = std::max(d.worst_ratio, lhs / rhs);
            else if (lhs > 1e-12) d.worst_ratio = std::max(d.worst_ratio, 1e300);
        }
    d.flagged = d.worst_ratio > 1.0;
    return d;
}

}  // namespace mrgbsde
