#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace mrgbsde {

/// Time-indexed boundary function b(i, x), strictly increasing in x with
/// c_lip |x - y| <= |b(i,x) - b(i,y)| <= C_lip |x - y| and |b(i,x)| <= M (1 + |x|).
///
/// Catalog:
///   affine_threshold   b = slope * s_i * x - thr_i
///   sin_perturbed      b = s_i x + gamma sin(s_i x) - thr_i,  |gamma| < 1
///   tabulated          piecewise linear through per-time knots
/// where s_i is an optional positive argument scale (default 1).
class BoundaryCurve {
public:
    enum class Kind { affine_threshold, sin_perturbed, tabulated };

    static BoundaryCurve affine(double slope, std::vector<double> threshold);
    static BoundaryCurve sin_perturbed(double gamma, std::vector<double> threshold);
    /// knots[i] strictly increasing, values[i] strictly increasing; slopes
    /// outside [c_lip, C_lip] are clamped after a 1e-6 relative check.
    /// Outside the knots the curve continues with tail_slope[i], or with the
    /// edge secants when tail_slope is empty.
    static BoundaryCurve tabulated(std::vector<std::vector<double>> knots,
                                   std::vector<std::vector<double>> values, double c_lip,
                                   double C_lip, std::vector<double> tail_slope = {});

    BoundaryCurve with_arg_scale(std::vector<double> scale) const;
    BoundaryCurve time_reversed() const;
    /// Restriction to indices i0..i1, re-indexed from 0.
    BoundaryCurve slice(int i0, int i1) const;

    double operator()(int i, double x) const;
    /// Root of b(i, .) bracketed from x0, to |b| <= tol.
    double root(int i, double x0, double tol) const;

    Kind kind() const { return kind_; }
    int points() const { return n_; }
    double c_lip() const { return c_; }
    double C_lip() const { return C_; }
    double M() const { return M_; }
    double slope() const { return param_; }
    double gamma() const { return param_; }
    const std::vector<double>& threshold() const { return thr_; }
    const std::vector<double>& arg_scale() const { return scale_; }

private:
    void finish();  // sets constants, runs the sampled verification
    Kind kind_ = Kind::affine_threshold;
    int n_ = 0;
    double param_ = 1.0;
    std::vector<double> thr_;
    std::vector<double> scale_;
    std::vector<std::vector<double>> knots_, values_;
    std::vector<double> left_slope_, right_slope_;
    double c_ = 1.0, C_ = 1.0, M_ = 1.0;
    double base_c_ = 1.0, base_C_ = 1.0;
};

/// l <= r with r - l >= sep > 0 on the sampled net.
struct BoundaryPair {
    BoundaryCurve lower;  // l
    BoundaryCurve upper;  // r
    double sep = 0.0;

    static BoundaryPair make(BoundaryCurve lower, BoundaryCurve upper, double sep);
    BoundaryPair time_reversed() const;
    BoundaryPair slice(int i0, int i1) const;
    double c_lip() const;
    double C_lip() const;
};

struct SkorokhodSolution {
    /// right: the increment over (t_{i-1}, t_i] belongs to x_i (forward runs);
    /// left: the increment over [t_i, t_{i+1}) belongs to x_i (backward runs).
    enum class Anchor { right, left };

    std::vector<double> t, x, k, kr, kl;
    Anchor anchor = Anchor::right;
};

/// Forward problem x = s + k, l(t, x) <= 0 <= r(t, x), k = kr - kl minimal.
/// Requires l(t_0, s_0) <= start_tol and r(t_0, s_0) >= -start_tol.
SkorokhodSolution solve_forward(std::span<const double> t, std::span<const double> s,
                                const BoundaryPair& bp, double tol, double start_tol = 0.0);

/// Backward problem x_t = a + s_T - s_t + k_T - k_t, x_T = a.
SkorokhodSolution solve_backward(std::span<const double> t, double a, std::span<const double> s,
                                 const BoundaryPair& bp, double tol, double start_tol = 0.0);

/// Only one boundary; the other side is +-infinity. `lower` selects l (push down
/// only) versus r (push up only). `backward` selects the terminal-anchored form
/// using `a`.
SkorokhodSolution solve_one_sided(std::span<const double> t, std::span<const double> s,
                                  const BoundaryCurve& curve, bool lower, bool backward, double a,
                                  double tol, double start_tol = 0.0);

struct FlatnessReport {
    double sum_r = 0.0;  // sum |r(t_i, x_i)| dkr
    double sum_l = 0.0;  // sum |l(t_i, x_i)| dkl
    double tv = 0.0;
    double max_violation = 0.0;  // largest constraint breach
    bool ok = false;
};

/// Either curve may be null (absent side).
FlatnessReport check_flatness(const SkorokhodSolution& sol, const BoundaryCurve* lower,
                              const BoundaryCurve* upper, double tol);

struct StabilityInput {
    double a = 0.0;
    std::vector<double> s;
    const BoundaryPair* bp = nullptr;
};

struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

/// sup |k1 - k2| <= 2(C/c)|a1 - a2| + 4(C/c) sup|s1 - s2| + (2/c) sup|l1 - l2| v |r1 - r2|.
BoundReport check_stability(const SkorokhodSolution& s1, const SkorokhodSolution& s2,
                            const StabilityInput& in1, const StabilityInput& in2,
                            double tol = 1e-9);

/// |k_T - k_t| <= (max(C,1)/c)(sup|l(.,0)| + sup|r(.,0)| + 2|a + s_T - s_t|) + tol.
BoundReport check_growth(const SkorokhodSolution& sol, double a, std::span<const double> s,
                         const BoundaryPair& bp, double tol);

void write_skorokhod_csv(std::ostream& os, const SkorokhodSolution& sol);

}  // namespace mrgbsde
