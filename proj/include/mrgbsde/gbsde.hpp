#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrgbsde/gcore.hpp"

namespace mrgbsde {

/// m(y) = sign(y) mu(|y|), mu(u) = u (1 - ln u) on (0, 1], mu(0) = 0, mu(u) = u above 1.
double mao_m(double y);
/// Concave modulus for m: 2 rho(r / 2) with rho(u) = u (1 - ln u) up to 1/e, then u + 1/e.
/// The factor 2 covers pairs on opposite sides of 0.
double mao_modulus(double r);

/// One generator coefficient. Kinds:
///   affine         a0 + a1 y + a2 z
///   lipschitz_sin  a0 + a1 sin(y) + a2 |z|
///   mao            a0 + a1 m(y) + a2 z
struct GeneratorTerm {
    enum class Kind { affine, lipschitz_sin, mao };

    Kind kind = Kind::affine;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;

    double operator()(double y, double z) const;
    /// Lipschitz constant in y; for mao this is the slope away from 0 (|a1|),
    /// used only to size the CFL margin.
    double y_rate() const { return std::abs(a1); }
    double z_lipschitz() const { return std::abs(a2); }
    bool y_free() const { return a1 == 0.0; }
    bool z_free() const { return a2 == 0.0; }
};

std::string to_string(GeneratorTerm::Kind k);
GeneratorTerm::Kind generator_kind_from(const std::string& name);

/// Generator pair (f, g) of dY = -f dt - g d<B> + Z dB + dK.
/// gamma_poly, when non-empty, replaces the y-coefficient of an affine f by
/// gamma(t) = sum_k gamma_poly[k] t^k.
struct GeneratorSpec {
    GeneratorTerm f;
    GeneratorTerm g;
    std::vector<double> gamma_poly;

    double f_at(double t, double y, double z) const;
    double g_at(double /*t*/, double y, double z) const { return g(y, z); }
    double gamma(double t) const;

    /// Extra CFL rate contributed by the generator on a grid with spacing h.
    double cfl_rate(double h, double T, const VolBounds& vb) const;
    /// Max Lipschitz constant over (y, z) of f and sigma_high_sq g.
    double kappa(double T, const VolBounds& vb) const;
    /// max over [0, T] of the y-coefficient magnitude of f.
    double gamma_bound(double T) const;
    bool y_independent() const { return f.y_free() && gamma_poly.empty() && g.y_free(); }
    bool yz_independent() const { return y_independent() && f.z_free() && g.z_free(); }
    /// f = gamma_t y + f'(t, z), g = g(t, z).
    bool linear_in_y() const;
    void validate() const;
};

/// Row callback: at fine index k (the later slice of the step), given the row
/// u and its first difference z, fill f and g.
using RowGenerator = std::function<void(int k, std::span<const double> u,
                                        std::span<const double> z, std::span<double> f,
                                        std::span<double> g)>;

RowGenerator plain_generator(const GeneratorSpec& gen, const Grid& grid);

/// Lattice solution on fine slices k0..k1. Row r of each field is fine index k0 + r.
/// f_used/g_used/a at row r hold the values driving the step from k0+r+1 to k0+r
/// (at the last row: the terminal slice itself).
struct BsdeSolution {
    int k0 = 0;
    int substeps = 1;
    ValueField y, f_used, g_used, a;

    int k1() const { return k0 + y.rows() - 1; }
    std::span<const double> y_row(int k) const { return y.row(k - k0); }
    double y_at(int k, int j) const { return y(k - k0, j); }
    /// Coarse views (every substeps-th fine row); valid when k0 is a coarse node.
    ValueField y_field() const { return y.subsample(substeps); }
    ValueField a_field() const { return a.subsample(substeps); }
    ValueField z_field(const Grid& grid) const;
};

/// Backward sweep from `terminal` at fine index k1 down to k0.
BsdeSolution sweep(std::span<const double> terminal, int k0, int k1, const Grid& grid,
                   const VolBounds& vb, const RowGenerator& gen);

/// Plain G-BSDE on [0, T].
BsdeSolution solve_bsde(std::span<const double> terminal, const GeneratorSpec& gen,
                        const Grid& grid, const VolBounds& vb);

/// Volatility control sigma^2(t_i, x_j) on coarse steps (nt rows).
struct ControlField {
    ValueField sigma_sq;
    void validate(const VolBounds& vb) const;
};

/// K along a node path (one node index per coarse time, nt + 1 entries):
/// dK = sum over fine steps of dt [ sigma^2 a / 2 - G(a) ].
std::vector<double> realize_k(const BsdeSolution& sol, const ControlField& ctrl,
                              std::span<const int> path, const Grid& grid, const VolBounds& vb);

struct Accrual {
    bool generator = true;   // add f dt + g d<B>
    bool k_residual = true;  // subtract the K increment
};

/// Conditional sublinear expectation at coarse time t of
///   W(tau) + int_t^tau (f ds + g d<B>) - (K_tau - K_t)
/// by dynamic programming over the two extreme volatilities. sup=false gives
/// the lower expectation -E^[-.].
std::vector<double> expect_with_k(const BsdeSolution& sol, std::span<const double> terminal,
                                  int coarse_t, int coarse_tau, const Accrual& acc, bool sup,
                                  const Grid& grid, const VolBounds& vb);

struct BoundDiagnostic {
    double worst_ratio = 0.0;  // max lhs / rhs over the lattice
    bool flagged = false;      // a warning, not a failure
};

/// |Y_t|^alpha <= kappa_bound E^_t[|xi|^alpha + int_t^T |h|^alpha], h = |f(.,0,0)| + s|g(.,0,0)|.
BoundDiagnostic apriori_diagnostic(const BsdeSolution& sol, std::span<const double> terminal,
                                   const GeneratorSpec& gen, double alpha, double kappa_bound,
                                   const Grid& grid, const VolBounds& vb);

/// sup |Y1 - Y2| <= kappa_bound E^[|xi1 - xi2|].
BoundDiagnostic stability_diagnostic(const BsdeSolution& s1, const BsdeSolution& s2,
                                     std::span<const double> xi1, std::span<const double> xi2,
                                     double kappa_bound, const Grid& grid, const VolBounds& vb);

}  // namespace mrgbsde
