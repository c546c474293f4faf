#include "mrgbsde/gcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "kernel.hpp"
#include "mrgbsde/errors.hpp"

namespace mrgbsde {

VolBounds VolBounds::make(double low_sq, double high_sq) {
    if (!std::isfinite(low_sq) || !std::isfinite(high_sq) || low_sq < 0.0 || !(low_sq < high_sq))
        throw ConfigError("VolBounds invariant violated: need 0 <= sigma_low_sq < sigma_high_sq, got " +
                          fmt17(low_sq) + " and " + fmt17(high_sq));
    return {low_sq, high_sq};
}

VolBounds VolBounds::classical(double sigma_sq) {
    if (!std::isfinite(sigma_sq) || !(sigma_sq > 0.0))
        throw ConfigError("VolBounds invariant violated: classical volatility must be positive");
    return {sigma_sq, sigma_sq};
}

double g_eval(double a, const VolBounds& vb) {
    if (!std::isfinite(a)) throw DomainError("g_eval: non-finite argument");
    return a >= 0.0 ? 0.5 * vb.sigma_high_sq * a : 0.5 * vb.sigma_low_sq * a;
}

Grid Grid::make(double T, int nt, int nx, double x_half_width, const VolBounds& vb,
                double extra_rate, int substeps) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("Grid invariant violated: T must be > 0");
    if (nt < 1) throw ConfigError("Grid invariant violated: nt must be >= 1");
    if (nx < 2 || nx % 2 != 0)
        throw ConfigError("Grid invariant violated: nx must be even and >= 2 so that x = 0 is a node");
    if (!(x_half_width > 0.0) || !std::isfinite(x_half_width))
        throw ConfigError("Grid invariant violated: x_half_width must be > 0");
    if (extra_rate < 0.0 || !std::isfinite(extra_rate))
        throw ConfigError("Grid invariant violated: extra CFL rate must be >= 0");
    Grid g;
    g.T_ = T;
    g.nt_ = nt;
    g.nx_ = nx;
    g.w_ = x_half_width;
    if (substeps <= 0) {
        const double rate = vb.sigma_high_sq / (g.h() * g.h()) + extra_rate;
        const double need = g.dt() * rate;
        g.substeps_ = std::max(1, static_cast<int>(std::ceil(need * (1.0 - 1e-12))));
    } else {
        g.substeps_ = substeps;
    }
    g.check_cfl(vb, extra_rate);
    return g;
}

Grid Grid::defaults(double T, const VolBounds& vb) {
    return make(T, default_nt, default_nx, 6.0 * std::sqrt(vb.sigma_high_sq * T), vb);
}

int Grid::coarse_index(double t) const {
    const double r = t / dt();
    const long i = std::lround(r);
    if (i < 0 || i > nt_ || std::abs(t - time(int(i))) > 1e-9 * std::max(1.0, T_))
        throw AlignmentError("time " + fmt17(t) + " is not a node of the coarse grid (dt = " +
                             fmt17(dt()) + ")");
    return int(i);
}

void Grid::check_cfl(const VolBounds& vb, double extra_rate) const {
    const double ratio = fine_dt() * (vb.sigma_high_sq / (h() * h()) + extra_rate);
    if (ratio > 1.0 + 1e-12)
        throw ConfigError("CFL invariant violated: fine_dt * (sigma_high_sq / h^2 + extra) = " +
                          fmt17(ratio) + " > 1; raise grid.substeps or coarsen nx");
}

std::vector<double> Grid::x_row() const {
    std::vector<double> xs(cols());
    for (int j = 0; j < cols(); ++j) xs[j] = x(j);
    return xs;
}

ValueField ValueField::subsample(int stride) const {
    const int out_rows = (rows_ - 1) / stride + 1;
    ValueField out(out_rows, cols_, row_dt_ * stride);
    for (int i = 0; i < out_rows; ++i)
        std::copy_n(row(i * stride).begin(), cols_, out.row(i).begin());
    return out;
}

double PayoffSpec::operator()(double x) const {
    const auto& c = coeffs;
    switch (kind) {
        case Kind::affine: return c[0] + c[1] * x;
        case Kind::quadratic: return c[0] + c[1] * x + c[2] * x * x;
        case Kind::abs: return c[0] + c[1] * std::abs(x);
        case Kind::call: return c[1] * std::max(x - c[0], 0.0);
        case Kind::bounded_lipschitz_sin: return c[0] + c[1] * std::sin(c[2] * x);
    }
    return 0.0;
}

double PayoffSpec::lipschitz_bound() const {
    const auto& c = coeffs;
    switch (kind) {
        case Kind::affine: return std::abs(c[1]);
        case Kind::quadratic:
            return c[2] == 0.0 ? std::abs(c[1]) : std::numeric_limits<double>::infinity();
        case Kind::abs: return std::abs(c[1]);
        case Kind::call: return std::abs(c[1]);
        case Kind::bounded_lipschitz_sin: return std::abs(c[1] * c[2]);
    }
    return 0.0;
}

void PayoffSpec::validate() const {
    std::size_t need = kind == Kind::quadratic || kind == Kind::bounded_lipschitz_sin ? 3 : 2;
    if (coeffs.size() != need)
        throw ConfigError("payoff '" + to_string(kind) + "' needs " + std::to_string(need) +
                          " coefficients, got " + std::to_string(coeffs.size()));
    for (double v : coeffs)
        if (!std::isfinite(v)) throw ConfigError("payoff coefficients must be finite");
}

std::vector<double> PayoffSpec::row(const Grid& grid) const {
    std::vector<double> r(grid.cols());
    for (int j = 0; j < grid.cols(); ++j) r[j] = (*this)(grid.x(j));
    return r;
}

std::string to_string(PayoffSpec::Kind k) {
    switch (k) {
        case PayoffSpec::Kind::affine: return "affine";
        case PayoffSpec::Kind::quadratic: return "quadratic";
        case PayoffSpec::Kind::abs: return "abs";
        case PayoffSpec::Kind::call: return "call";
        case PayoffSpec::Kind::bounded_lipschitz_sin: return "bounded_lipschitz_sin";
    }
    return "?";
}

PayoffSpec::Kind payoff_kind_from(const std::string& name) {
    using K = PayoffSpec::Kind;
    for (K k : {K::affine, K::quadratic, K::abs, K::call, K::bounded_lipschitz_sin})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown payoff kind '" + name + "'");
}

std::vector<double> step_back(std::span<const double> u_next, std::span<const double> f_row,
                              std::span<const double> g_row, const Grid& grid,
                              const VolBounds& vb) {
    const int n = grid.cols();
    if (int(u_next.size()) != n) throw ConfigError("step_back: row length does not match grid");
    if ((!f_row.empty() && int(f_row.size()) != n) || (!g_row.empty() && int(g_row.size()) != n))
        throw ConfigError("step_back: source row length does not match grid");
    const auto c = detail::step_coeffs(grid, vb);
    std::vector<double> out(n);
    auto f = [&](int j) { return f_row.empty() ? 0.0 : f_row[j]; };
    auto g = [&](int j) { return g_row.empty() ? 0.0 : g_row[j]; };
    out[0] = detail::edge_update(u_next[0], g(0), f(0), c);
    out[n - 1] = detail::edge_update(u_next[n - 1], g(n - 1), f(n - 1), c);
    for (int j = 1; j < n - 1; ++j)
        out[j] = detail::interior_update(u_next[j - 1], u_next[j], u_next[j + 1], g(j), f(j), c);
    for (double v : out)
        if (!std::isfinite(v)) throw DomainError("step_back produced a non-finite value");
    return out;
}

ValueField solve_g_heat(std::span<const double> terminal, const Grid& grid, const VolBounds& vb) {
    const int n = grid.cols();
    if (int(terminal.size()) != n) throw ConfigError("solve_g_heat: row length does not match grid");
    const auto c = detail::step_coeffs(grid, vb);
    ValueField field(grid.nt() + 1, n, grid.dt());
    std::vector<double> cur(terminal.begin(), terminal.end()), nxt(n);
    std::copy(cur.begin(), cur.end(), field.row(grid.nt()).begin());
    for (int i = grid.nt() - 1; i >= 0; --i) {
        for (int s = 0; s < grid.substeps(); ++s) {
            detail::heat_step(cur.data(), nxt.data(), n, c);
            cur.swap(nxt);
        }
        std::copy(cur.begin(), cur.end(), field.row(i).begin());
    }
    return field;
}

std::vector<double> heat_back(std::span<const double> row, int fine_steps, const Grid& grid,
                              const VolBounds& vb) {
    const int n = grid.cols();
    const auto c = detail::step_coeffs(grid, vb);
    std::vector<double> cur(row.begin(), row.end()), nxt(n);
    for (int s = 0; s < fine_steps; ++s) {
        detail::heat_step(cur.data(), nxt.data(), n, c);
        cur.swap(nxt);
    }
    return cur;
}

double expect_row(std::span<const double> row, int coarse_i, const Grid& grid,
                  const VolBounds& vb) {
    const int n = grid.cols();
    if (int(row.size()) != n) throw ConfigError("expect_row: row length does not match grid");
    const int K = coarse_i * grid.substeps();
    const int mid = grid.center();
    if (K == 0) return row[mid];
    const auto c = detail::step_coeffs(grid, vb);
    std::vector<double> cur(row.begin(), row.end()), nxt(n);
    // Only nodes inside the dependence cone of the centre are updated; the
    // centre value is the same as a full sweep.
    for (int s = 1; s <= K; ++s) {
        const int reach = K - s;
        detail::heat_step(cur.data(), nxt.data(), n, c, std::max(0, mid - reach), std::min(n - 1, mid + reach));
        cur.swap(nxt);
    }
    if (!std::isfinite(cur[mid])) throw DomainError("expect_row produced a non-finite value");
    return cur[mid];
}

double g_expectation(const PayoffSpec& payoff, double t, const Grid& grid, const VolBounds& vb) {
    const int i = grid.coarse_index(t);
    return expect_row(payoff.row(grid), i, grid, vb);
}

double mean_functional(std::span<const double> s_row, const std::function<double(double)>& loss,
                       int coarse_i, double x_offset, const Grid& grid, const VolBounds& vb) {
    const double m = expect_row(s_row, coarse_i, grid, vb);
    std::vector<double> r(s_row.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = loss(s_row[j] - m + x_offset);
    return expect_row(r, coarse_i, grid, vb);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(std::ostream& os, const ValueField& field, const Grid& grid) {
    os << "t,x,u\n";
    for (int i = 0; i < field.rows(); ++i) {
        const std::string t = fmt17(field.rows() > 1 ? grid.T() * i / (field.rows() - 1) : 0.0);
        for (int j = 0; j < field.cols(); ++j)
            os << t << ',' << fmt17(grid.x(j)) << ',' << fmt17(field(i, j)) << '\n';
    }
}

std::vector<double> first_difference(std::span<const double> u, double h) {
    const int n = int(u.size());
    std::vector<double> d(n);
    for (int j = 1; j < n - 1; ++j) d[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
    d[0] = (u[1] - u[0]) / h;
    d[n - 1] = (u[n - 1] - u[n - 2]) / h;
    return d;
}

}  // namespace mrgbsde
