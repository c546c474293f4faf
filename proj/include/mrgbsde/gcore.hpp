#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mrgbsde {

/// Volatility bounds 0 <= sigma_low_sq <= sigma_high_sq, sigma_high_sq > 0.
/// `make` enforces the strict order used by configurations; `classical` builds
/// the degenerate pair used for classical-limit comparisons.
struct VolBounds {
    double sigma_low_sq = 0.0;
    double sigma_high_sq = 1.0;

    static VolBounds make(double low_sq, double high_sq);
    static VolBounds classical(double sigma_sq);

    bool degenerate() const { return sigma_low_sq == sigma_high_sq; }
};

/// G(a) = (sigma_high_sq a^+ - sigma_low_sq a^-) / 2.
double g_eval(double a, const VolBounds& vb);

/// Space-time lattice. Coarse steps (nt) carry the reflection and game
/// computations; each coarse step is cut into `substeps` explicit PDE steps so
/// that fine_dt * rate <= 1 with rate = sigma_high_sq / h^2 + extra.
class Grid {
public:
    static constexpr int default_nt = 200;
    static constexpr int default_nx = 400;

    /// substeps <= 0 picks the smallest count satisfying the CFL bound.
    static Grid make(double T, int nt, int nx, double x_half_width, const VolBounds& vb,
                     double extra_rate = 0.0, int substeps = 0);
    static Grid defaults(double T, const VolBounds& vb);

    double T() const { return T_; }
    int nt() const { return nt_; }
    int nx() const { return nx_; }
    int substeps() const { return substeps_; }
    int fine_steps() const { return nt_ * substeps_; }
    double x_half_width() const { return w_; }
    double dt() const { return T_ / nt_; }
    double fine_dt() const { return dt() / substeps_; }
    double h() const { return 2.0 * w_ / nx_; }
    int center() const { return nx_ / 2; }
    int cols() const { return nx_ + 1; }
    double x(int j) const { return (j - center()) * h(); }
    double time(int i) const { return T_ * i / nt_; }
    double fine_time(int k) const { return T_ * k / fine_steps(); }
    /// Coarse index of t; AlignmentError when t is off-grid.
    int coarse_index(double t) const;
    /// Scheme tolerance 10 (h + dt).
    double tolerance() const { return 10.0 * (h() + dt()); }
    /// Throws ConfigError when fine_dt * (sigma_high_sq / h^2 + extra) > 1.
    void check_cfl(const VolBounds& vb, double extra_rate = 0.0) const;

    std::vector<double> x_row() const;

private:
    double T_ = 1.0;
    int nt_ = 1;
    int nx_ = 2;
    double w_ = 1.0;
    int substeps_ = 1;
};

/// Dense time-by-space array. Row i sits at time i * row_dt.
class ValueField {
public:
    ValueField() = default;
    ValueField(int rows, int cols, double row_dt, double fill = 0.0)
        : rows_(rows), cols_(cols), row_dt_(row_dt),
          data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double row_dt() const { return row_dt_; }

    double& operator()(int i, int j) { return data_[idx(i, j)]; }
    double operator()(int i, int j) const { return data_[idx(i, j)]; }
    std::span<double> row(int i) { return {data_.data() + idx(i, 0), std::size_t(cols_)}; }
    std::span<const double> row(int i) const {
        return {data_.data() + idx(i, 0), std::size_t(cols_)};
    }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// Keeps every `stride`-th row.
    ValueField subsample(int stride) const;

private:
    std::size_t idx(int i, int j) const { return std::size_t(i) * cols_ + j; }
    int rows_ = 0;
    int cols_ = 0;
    double row_dt_ = 0.0;
    std::vector<double> data_;
};

/// Terminal payoff catalog.
struct PayoffSpec {
    enum class Kind { affine, quadratic, abs, call, bounded_lipschitz_sin };

    Kind kind = Kind::affine;
    // affine: c0 + c1 x; quadratic: c0 + c1 x + c2 x^2; abs: c0 + c1 |x|;
    // call: c1 max(x - c0, 0); bounded_lipschitz_sin: c0 + c1 sin(c2 x)
    std::vector<double> coeffs;

    static PayoffSpec affine(double c0, double c1) { return {Kind::affine, {c0, c1}}; }
    static PayoffSpec quadratic(double c0, double c1, double c2) {
        return {Kind::quadratic, {c0, c1, c2}};
    }
    static PayoffSpec abs(double c0, double c1) { return {Kind::abs, {c0, c1}}; }
    static PayoffSpec call(double strike, double scale) { return {Kind::call, {strike, scale}}; }
    static PayoffSpec sin(double c0, double c1, double c2) {
        return {Kind::bounded_lipschitz_sin, {c0, c1, c2}};
    }

    double operator()(double x) const;
    /// +inf for the quadratic kind with c2 != 0.
    double lipschitz_bound() const;
    std::vector<double> row(const Grid& grid) const;
    void validate() const;
};

std::string to_string(PayoffSpec::Kind k);
PayoffSpec::Kind payoff_kind_from(const std::string& name);

/// One explicit step of length fine_dt:
///   u_prev = u_next + dt [ G(D2 u_next + 2 g) + f ],
/// D2 the central second difference (zero at the two edge nodes). Empty f/g
/// spans mean zero sources.
std::vector<double> step_back(std::span<const double> u_next, std::span<const double> f_row,
                              std::span<const double> g_row, const Grid& grid,
                              const VolBounds& vb);

/// G-heat equation with terminal row at T; coarse slices 0..nt.
ValueField solve_g_heat(std::span<const double> terminal, const Grid& grid, const VolBounds& vb);

/// Runs `fine_steps` heat steps backwards from `row`; returns the earliest row.
std::vector<double> heat_back(std::span<const double> row, int fine_steps, const Grid& grid,
                              const VolBounds& vb);

/// E^[phi(B_t)] for a lattice row phi sitting at coarse index i.
double expect_row(std::span<const double> row, int coarse_i, const Grid& grid,
                  const VolBounds& vb);

/// E^[payoff(B_t)]; t must be a coarse node.
double g_expectation(const PayoffSpec& payoff, double t, const Grid& grid, const VolBounds& vb);

/// E^[ loss(S(t, B_t) - E^[S(t, B_t)] + x_offset) ], where `s_row` is S(t, .)
/// and `loss` is already evaluated at time t.
double mean_functional(std::span<const double> s_row, const std::function<double(double)>& loss,
                       int coarse_i, double x_offset, const Grid& grid, const VolBounds& vb);

/// CSV with header t,x,u, time-major, 17 significant digits.
void write_field_csv(std::ostream& os, const ValueField& field, const Grid& grid);

/// printf("%.17g").
std::string fmt17(double v);

/// Central first difference (one-sided at the edges).
std::vector<double> first_difference(std::span<const double> u, double h);

}  // namespace mrgbsde
