#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

/// E[phi(sqrt(var) Z)] by composite Simpson on z in [-12, 12].
inline double gauss(const std::function<double(double)>& phi, double var, int n = 4000) {
    const double a = -12.0, b = 12.0, h = (b - a) / n, sd = std::sqrt(var);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double z = a + k * h;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * phi(sd * z) * std::exp(-0.5 * z * z);
    }
    return s * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// E[(X - K)^+], X ~ N(0, v).
inline double bachelier_call(double K, double v) {
    const double sd = std::sqrt(v);
    return sd * std::exp(-0.5 * K * K / v) / std::sqrt(2.0 * std::numbers::pi) - K * (1.0 - norm_cdf(K / sd));
}

/// Minimal-push forward path for constant-slope affine boundaries: the
/// constraint reads lo_i <= x_i <= hi_i and each step is a clamp.
struct ClampPath {
    std::vector<double> x, kr, kl;
};

inline ClampPath clamp_forward(const std::vector<double>& s, const std::vector<double>& lo,
                               const std::vector<double>& hi) {
    const std::size_t n = s.size();
    ClampPath p{std::vector<double>(n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    double k = 0.0, kr = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cand = s[i] + k;
        const double x = std::clamp(cand, lo[i], hi[i]);
        if (x > cand) kr += x - cand;
        if (x < cand) kl += cand - x;
        k = kr - kl;
        p.x[i] = x;
        p.kr[i] = kr;
        p.kl[i] = kl;
    }
    return p;
}

/// Naive G-heat on a symmetric lattice: u(t, x) = sup over two rates, explicit,
/// with frozen edges. Returns the centre value after `steps` steps of length dt.
inline double g_heat_center(std::vector<double> u, double h, double dt, int steps, double s_lo, double s_hi) {
    const std::size_t n = u.size();
    std::vector<double> v(n);
    for (int k = 0; k < steps; ++k) {
        v[0] = u[0];
        v[n - 1] = u[n - 1];
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
            v[j] = u[j] + dt * 0.5 * std::max(s_lo * d2, s_hi * d2);
        }
        u.swap(v);
    }
    return u[n / 2];
}

/// Hand-rolled generator for property tests.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
};

}  // namespace oracle
