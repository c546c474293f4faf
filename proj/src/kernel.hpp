#pragma once

// Shared lattice update. Both forms below equal u + dt (G(D2 u + 2 g) + f);
// writing them as a max over the two volatilities of nonnegative combinations
// keeps the update monotone in floating point too. The combinations are
// clamped to the stencil range, which is a no-op in exact arithmetic and
// makes flat stencils reproduce their value bit for bit.

#include <algorithm>

#include "mrgbsde/gcore.hpp"

namespace mrgbsde::detail {

struct StepCoeffs {
    double lam_lo, lam_hi;  // fine_dt * sigma^2 / h^2
    double s_lo, s_hi;      // sigma^2
    double dt;
    double keep_lo, keep_hi, half_lo, half_hi;  // 1 - lam, lam / 2
};

inline StepCoeffs step_coeffs(const Grid& grid, const VolBounds& vb) {
    const double dt = grid.fine_dt();
    const double r = dt / (grid.h() * grid.h());
    const double lo = r * vb.sigma_low_sq, hi = r * vb.sigma_high_sq;
    return {lo, hi, vb.sigma_low_sq, vb.sigma_high_sq, dt, 1.0 - lo, 1.0 - hi, 0.5 * lo, 0.5 * hi};
}

// (1 - lam) u + lam (um + up) / 2, clamped to [min, max] of the stencil.
inline double blend(double um, double u, double up, double lam) {
    const double w = (1.0 - lam) * u + 0.5 * lam * (um + up);
    const double lo = std::min({um, u, up}), hi = std::max({um, u, up});
    return std::min(std::max(w, lo), hi);
}

inline double interior_update(double um, double u, double up, double g, double f,
                              const StepCoeffs& c) {
    const double lo = blend(um, u, up, c.lam_lo) + c.dt * c.s_lo * g;
    const double hi = blend(um, u, up, c.lam_hi) + c.dt * c.s_hi * g;
    return std::max(lo, hi) + c.dt * f;
}

inline double edge_update(double u, double g, double f, const StepCoeffs& c) {
    return u + c.dt * (std::max(c.s_lo * g, c.s_hi * g) + f);
}

// Update under one fixed volatility with an extra source term.
inline double fixed_update(double um, double u, double up, double lam, double src, double dt) {
    return blend(um, u, up, lam) + dt * src;
}

// max of the two blends; one clamp serves both since clamping is monotone.
inline double heat_node(double um, double u, double up, const StepCoeffs& c) {
    const double s = um + up;
    const double a = c.keep_lo * u + c.half_lo * s;
    const double b = c.keep_hi * u + c.half_hi * s;
    const double w = a > b ? a : b;
    const double lo = std::min(std::min(um, u), up), hi = std::max(std::max(um, u), up);
    return std::min(std::max(w, lo), hi);
}

// Zero-source heat step on nodes lo..hi (edges frozen), in place via scratch.
inline void heat_step(const double* in, double* out, int n, const StepCoeffs& c, int lo = 0, int hi = -1) {
    if (hi < 0) hi = n - 1;
    if (lo == 0) out[0] = in[0];
    if (hi == n - 1) out[n - 1] = in[n - 1];
    const int a = std::max(lo, 1), b = std::min(hi, n - 2);
    for (int j = a; j <= b; ++j) out[j] = heat_node(in[j - 1], in[j], in[j + 1], c);
}

}  // namespace mrgbsde::detail
