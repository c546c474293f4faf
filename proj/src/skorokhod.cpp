#include "mrgbsde/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mrgbsde/errors.hpp"
#include "mrgbsde/gcore.hpp"

namespace mrgbsde {

namespace {

void require_row(const std::vector<double>& row, const char* what) {
    if (row.empty()) throw CatalogError(std::string(what) + ": empty time row");
    for (double v : row)
        if (!std::isfinite(v)) throw CatalogError(std::string(what) + ": non-finite entry");
}

}  // namespace

BoundaryCurve BoundaryCurve::affine(double slope, std::vector<double> threshold) {
    if (!(slope > 0.0) || !std::isfinite(slope))
        throw CatalogError("affine_threshold boundary needs a positive finite slope");
    require_row(threshold, "affine_threshold");
    BoundaryCurve b;
    b.kind_ = Kind::affine_threshold;
    b.param_ = slope;
    b.n_ = int(threshold.size());
    b.thr_ = std::move(threshold);
    b.scale_.assign(b.n_, 1.0);
    b.finish();
    return b;
}

BoundaryCurve BoundaryCurve::sin_perturbed(double gamma, std::vector<double> threshold) {
    if (!(std::abs(gamma) < 1.0)) throw CatalogError("sin_perturbed boundary needs |gamma| < 1");
    require_row(threshold, "sin_perturbed");
    BoundaryCurve b;
    b.kind_ = Kind::sin_perturbed;
    b.param_ = gamma;
    b.n_ = int(threshold.size());
    b.thr_ = std::move(threshold);
    b.scale_.assign(b.n_, 1.0);
    b.finish();
    return b;
}

BoundaryCurve BoundaryCurve::tabulated(std::vector<std::vector<double>> knots,
                                       std::vector<std::vector<double>> values, double c_lip,
                                       double C_lip, std::vector<double> tail_slope) {
    if (knots.empty() || knots.size() != values.size())
        throw CatalogError("tabulated boundary: knots and values must have equal, nonzero length");
    if (!(c_lip > 0.0) || !(C_lip >= c_lip))
        throw CatalogError("tabulated boundary: need 0 < c_lip <= C_lip");
    if (!tail_slope.empty() && tail_slope.size() != knots.size())
        throw CatalogError("tabulated boundary: tail slope row has the wrong length");
    BoundaryCurve b;
    b.kind_ = Kind::tabulated;
    b.n_ = int(knots.size());
    b.c_ = c_lip;
    b.C_ = C_lip;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto& xs = knots[i];
        const auto& vs = values[i];
        if (xs.size() < 2 || xs.size() != vs.size())
            throw CatalogError("tabulated boundary: each time needs >= 2 matching knots");
        for (std::size_t q = 1; q < xs.size(); ++q) {
            const double dx = xs[q] - xs[q - 1];
            const double slope = (vs[q] - vs[q - 1]) / dx;
            if (!(dx > 0.0) || !std::isfinite(slope))
                throw CatalogError("tabulated boundary: knots must be strictly increasing");
            if (slope < c_lip * (1.0 - 1e-6) - 1e-9 || slope > C_lip * (1.0 + 1e-6) + 1e-9)
                throw CatalogError("tabulated boundary: slope " + fmt17(slope) + " at time index " +
                                   std::to_string(i) + " leaves the declared bi-Lipschitz band [" +
                                   fmt17(c_lip) + ", " + fmt17(C_lip) + "]");
            b.c_ = std::min(b.c_, slope);
            b.C_ = std::max(b.C_, slope);
        }
        const std::size_t m = xs.size();
        if (!tail_slope.empty()) {
            b.left_slope_.push_back(std::clamp(tail_slope[i], c_lip, C_lip));
            b.right_slope_.push_back(b.left_slope_.back());
            continue;
        }
        b.left_slope_.push_back(
            std::clamp((vs[1] - vs[0]) / (xs[1] - xs[0]), c_lip, C_lip));
        b.right_slope_.push_back(
            std::clamp((vs[m - 1] - vs[m - 2]) / (xs[m - 1] - xs[m - 2]), c_lip, C_lip));
    }
    b.base_c_ = b.c_;
    b.base_C_ = b.C_;
    b.knots_ = std::move(knots);
    b.values_ = std::move(values);
    b.scale_.assign(b.n_, 1.0);
    b.thr_.assign(b.n_, 0.0);
    b.finish();
    return b;
}

BoundaryCurve BoundaryCurve::with_arg_scale(std::vector<double> scale) const {
    if (int(scale.size()) != n_) throw CatalogError("argument scale row has the wrong length");
    for (double s : scale)
        if (!(s > 0.0) || !std::isfinite(s)) throw CatalogError("argument scale must be positive");
    BoundaryCurve b = *this;
    for (int i = 0; i < n_; ++i) b.scale_[i] *= scale[i];
    b.finish();
    return b;
}

BoundaryCurve BoundaryCurve::time_reversed() const {
    BoundaryCurve b = *this;
    std::reverse(b.thr_.begin(), b.thr_.end());
    std::reverse(b.scale_.begin(), b.scale_.end());
    std::reverse(b.knots_.begin(), b.knots_.end());
    std::reverse(b.values_.begin(), b.values_.end());
    std::reverse(b.left_slope_.begin(), b.left_slope_.end());
    std::reverse(b.right_slope_.begin(), b.right_slope_.end());
    return b;
}

BoundaryCurve BoundaryCurve::slice(int i0, int i1) const {
    if (i0 < 0 || i1 >= n_ || i0 > i1) throw CatalogError("boundary slice out of range");
    BoundaryCurve b = *this;
    auto cut = [&](auto& v) {
        if (!v.empty()) v = std::decay_t<decltype(v)>(v.begin() + i0, v.begin() + i1 + 1);
    };
    cut(b.thr_);
    cut(b.scale_);
    cut(b.knots_);
    cut(b.values_);
    cut(b.left_slope_);
    cut(b.right_slope_);
    b.n_ = i1 - i0 + 1;
    return b;
}

double BoundaryCurve::operator()(int i, double x) const {
    const double y = scale_[i] * x;
    switch (kind_) {
        case Kind::affine_threshold: return param_ * y - thr_[i];
        case Kind::sin_perturbed: return y + param_ * std::sin(y) - thr_[i];
        case Kind::tabulated: {
            const auto& xs = knots_[i];
            const auto& vs = values_[i];
            if (y <= xs.front()) return vs.front() + left_slope_[i] * (y - xs.front());
            if (y >= xs.back()) return vs.back() + right_slope_[i] * (y - xs.back());
            const auto it = std::upper_bound(xs.begin(), xs.end(), y);
            const std::size_t q = std::size_t(it - xs.begin());
            const double w = (y - xs[q - 1]) / (xs[q] - xs[q - 1]);
            return vs[q - 1] + w * (vs[q] - vs[q - 1]);
        }
    }
    return 0.0;
}

double BoundaryCurve::root(int i, double x0, double tol) const {
    const double b0 = (*this)(i, x0);
    if (b0 == 0.0) return x0;
    double lo, hi;
    const double span = std::abs(b0) / c_ * (1.0 + 1e-9) + 1e-300;
    if (b0 < 0.0) {
        lo = x0;
        hi = x0 + span;
        while ((*this)(i, hi) < 0.0) hi += span;
    } else {
        hi = x0;
        lo = x0 - span;
        while ((*this)(i, lo) > 0.0) lo -= span;
    }
    const double width = tol / C_;
    for (int it = 0; it < 200 && hi - lo > width; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ((*this)(i, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void BoundaryCurve::finish() {
    double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
    for (double s : scale_) {
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    double thr_max = 0.0;
    for (double v : thr_) thr_max = std::max(thr_max, std::abs(v));
    switch (kind_) {
        case Kind::affine_threshold:
            c_ = param_ * smin;
            C_ = param_ * smax;
            M_ = std::max(C_, thr_max);
            break;
        case Kind::sin_perturbed:
            c_ = (1.0 - std::abs(param_)) * smin;
            C_ = (1.0 + std::abs(param_)) * smax;
            M_ = std::max(C_, thr_max);
            break;
        case Kind::tabulated: {
            c_ = base_c_ * smin;
            C_ = base_C_ * smax;
            double m = C_;
            for (int i = 0; i < n_; ++i) m = std::max(m, std::abs((*this)(i, 0.0)));
            M_ = m;
            break;
        }
    }
    // Sampled verification of the declared constants.
    const int stride = std::max(1, n_ / 50);
    for (int i = 0; i < n_; i += stride) {
        double prev_x = -25.0, prev_b = (*this)(i, prev_x);
        for (int q = 1; q <= 100; ++q) {
            const double x = -25.0 + 0.5 * q;
            const double b = (*this)(i, x);
            const double slope = (b - prev_b) / (x - prev_x);
            if (slope < c_ * (1.0 - 1e-9) - 1e-12 || slope > C_ * (1.0 + 1e-9) + 1e-12)
                throw CatalogError("boundary catalog violation: secant slope " + fmt17(slope) +
                                   " outside [c_lip, C_lip] = [" + fmt17(c_) + ", " + fmt17(C_) +
                                   "]");
            if (std::abs(b) > M_ * (1.0 + std::abs(x)) * (1.0 + 1e-12))
                throw CatalogError("boundary catalog violation: linear growth bound M exceeded");
            prev_x = x;
            prev_b = b;
        }
    }
}

BoundaryPair BoundaryPair::make(BoundaryCurve lower, BoundaryCurve upper, double sep) {
    if (!(sep > 0.0)) throw CatalogError("BoundaryPair separation invariant: sep must be > 0");
    if (lower.points() != upper.points())
        throw CatalogError("BoundaryPair: l and r live on different time grids");
    const int n = lower.points();
    for (int i = 0; i < n; ++i) {
        for (int q = 0; q <= 200; ++q) {
            const double x = -50.0 + 0.5 * q;
            if (upper(i, x) - lower(i, x) < sep * (1.0 - 1e-12))
                throw CatalogError("BoundaryPair separation invariant violated: r - l = " +
                                   fmt17(upper(i, x) - lower(i, x)) + " < sep = " + fmt17(sep) +
                                   " at time index " + std::to_string(i) + ", x = " + fmt17(x));
        }
    }
    return {std::move(lower), std::move(upper), sep};
}

BoundaryPair BoundaryPair::time_reversed() const {
    return {lower.time_reversed(), upper.time_reversed(), sep};
}

BoundaryPair BoundaryPair::slice(int i0, int i1) const {
    return {lower.slice(i0, i1), upper.slice(i0, i1), sep};
}

double BoundaryPair::c_lip() const { return std::min(lower.c_lip(), upper.c_lip()); }
double BoundaryPair::C_lip() const { return std::max(lower.C_lip(), upper.C_lip()); }

namespace {

// Smallest d >= 0 with sign * b(i, x + sign * d) <= 0 ... returned as the
// bracket end on the admissible side, within tol / C of the root.
double push(const BoundaryCurve& b, int i, double x, double sign, double tol) {
    const double b0 = b(i, x);
    const double span = std::abs(b0) / b.c_lip() * (1.0 + 1e-9) + 1e-300;
    double lo = 0.0, hi = span;
    auto bad = [&](double d) {
        const double v = b(i, x + sign * d);
        return sign > 0 ? v < 0.0 : v > 0.0;
    };
    while (bad(hi)) hi += span;
    const double width = tol / b.C_lip();
    for (int it = 0; it < 200 && hi - lo > width; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (bad(mid) ? lo : hi) = mid;
    }
    return hi;
}

SkorokhodSolution forward_core(std::span<const double> t, std::span<const double> s,
                               const BoundaryCurve* l, const BoundaryCurve* r, double tol,
                               double start_tol) {
    const int n1 = int(s.size());
    if (n1 < 1 || int(t.size()) != n1)
        throw PreconditionError("Skorokhod input: time and path rows must have equal, nonzero length");
    if ((l && l->points() != n1) || (r && r->points() != n1))
        throw PreconditionError("Skorokhod input: boundary time grid does not match the path");
    if (!(tol > 0.0)) throw PreconditionError("Skorokhod tolerance must be positive");
    if (l && (*l)(0, s[0]) > start_tol)
        throw PreconditionError("Skorokhod start point violates l(t_0, s_0) <= 0: l = " +
                                fmt17((*l)(0, s[0])));
    if (r && (*r)(0, s[0]) < -start_tol)
        throw PreconditionError("Skorokhod start point violates r(t_0, s_0) >= 0: r = " +
                                fmt17((*r)(0, s[0])));
    SkorokhodSolution out;
    out.t.assign(t.begin(), t.end());
    out.x.assign(n1, 0.0);
    out.k.assign(n1, 0.0);
    out.kr.assign(n1, 0.0);
    out.kl.assign(n1, 0.0);
    out.x[0] = s[0];
    for (int i = 1; i < n1; ++i) {
        const double xh = s[i] + out.k[i - 1];
        double dr = 0.0, dl = 0.0;
        if (r && (*r)(i, xh) < 0.0)
            dr = push(*r, i, xh, +1.0, tol);
        else if (l && (*l)(i, xh) > 0.0)
            dl = push(*l, i, xh, -1.0, tol);
        out.kr[i] = out.kr[i - 1] + dr;
        out.kl[i] = out.kl[i - 1] + dl;
        out.k[i] = out.kr[i] - out.kl[i];
        out.x[i] = s[i] + out.k[i];
    }
    return out;
}

SkorokhodSolution backward_core(std::span<const double> t, double a, std::span<const double> s,
                                const BoundaryCurve* l, const BoundaryCurve* r, double tol,
                                double start_tol) {
    const int n1 = int(s.size());
    if (n1 < 1) throw PreconditionError("Skorokhod input: empty path");
    const int n = n1 - 1;
    std::vector<double> st(n1);
    for (int j = 0; j <= n; ++j) st[j] = a + s[n] - s[n - j];
    std::optional<BoundaryCurve> lr, rr;
    if (l) lr = l->time_reversed();
    if (r) rr = r->time_reversed();
    std::vector<double> tt(t.begin(), t.end());
    const auto fw = forward_core(tt, st, lr ? &*lr : nullptr, rr ? &*rr : nullptr, tol, start_tol);
    SkorokhodSolution out;
    out.anchor = SkorokhodSolution::Anchor::left;
    out.t.assign(t.begin(), t.end());
    out.x.resize(n1);
    out.k.resize(n1);
    out.kr.resize(n1);
    out.kl.resize(n1);
    for (int i = 0; i <= n; ++i) {
        out.x[i] = fw.x[n - i];
        out.k[i] = fw.k[n] - fw.k[n - i];
        out.kr[i] = fw.kr[n] - fw.kr[n - i];
        out.kl[i] = fw.kl[n] - fw.kl[n - i];
    }
    return out;
}

}  // namespace

SkorokhodSolution solve_forward(std::span<const double> t, std::span<const double> s,
                                const BoundaryPair& bp, double tol, double start_tol) {
    return forward_core(t, s, &bp.lower, &bp.upper, tol, start_tol);
}

SkorokhodSolution solve_backward(std::span<const double> t, double a, std::span<const double> s,
                                 const BoundaryPair& bp, double tol, double start_tol) {
    return backward_core(t, a, s, &bp.lower, &bp.upper, tol, start_tol);
}

SkorokhodSolution solve_one_sided(std::span<const double> t, std::span<const double> s,
                                  const BoundaryCurve& curve, bool lower, bool backward, double a,
                                  double tol, double start_tol) {
    const BoundaryCurve* l = lower ? &curve : nullptr;
    const BoundaryCurve* r = lower ? nullptr : &curve;
    return backward ? backward_core(t, a, s, l, r, tol, start_tol)
                    : forward_core(t, s, l, r, tol, start_tol);
}

FlatnessReport check_flatness(const SkorokhodSolution& sol, const BoundaryCurve* lower,
                              const BoundaryCurve* upper, double tol) {
    FlatnessReport rep;
    const int n = int(sol.x.size()) - 1;
    bool stray = false;
    for (int i = 0; i <= n; ++i) {
        const double lv = lower ? (*lower)(i, sol.x[i]) : -1.0;
        const double rv = upper ? (*upper)(i, sol.x[i]) : 1.0;
        rep.max_violation = std::max({rep.max_violation, lv, -rv});
        double dkr = 0.0, dkl = 0.0;
        if (sol.anchor == SkorokhodSolution::Anchor::right && i > 0) {
            dkr = sol.kr[i] - sol.kr[i - 1];
            dkl = sol.kl[i] - sol.kl[i - 1];
        } else if (sol.anchor == SkorokhodSolution::Anchor::left && i < n) {
            dkr = sol.kr[i + 1] - sol.kr[i];
            dkl = sol.kl[i + 1] - sol.kl[i];
        }
        if (dkr > 0.0) {
            rep.sum_r += std::abs(rv) * dkr;
            if (std::abs(rv) > tol) stray = true;
        }
        if (dkl > 0.0) {
            rep.sum_l += std::abs(lv) * dkl;
            if (std::abs(lv) > tol) stray = true;
        }
    }
    rep.tv = sol.kr.back() + sol.kl.back();
    rep.ok = !stray && rep.max_violation <= tol && rep.sum_r <= tol * rep.tv + 1e-15 &&
             rep.sum_l <= tol * rep.tv + 1e-15;
    return rep;
}

BoundReport check_stability(const SkorokhodSolution& s1, const SkorokhodSolution& s2,
                            const StabilityInput& in1, const StabilityInput& in2, double tol) {
    if (!in1.bp || !in2.bp) throw PreconditionError("check_stability: missing boundaries");
    const int n1 = int(s1.k.size());
    if (int(s2.k.size()) != n1 || int(in1.s.size()) != n1 || int(in2.s.size()) != n1)
        throw PreconditionError("check_stability: solutions live on different grids");
    BoundReport rep;
    for (int i = 0; i < n1; ++i) rep.lhs = std::max(rep.lhs, std::abs(s1.k[i] - s2.k[i]));
    const double c = std::min(in1.bp->c_lip(), in2.bp->c_lip());
    const double C = std::max(in1.bp->C_lip(), in2.bp->C_lip());
    double ds = 0.0;
    for (int i = 0; i < n1; ++i) ds = std::max(ds, std::abs(in1.s[i] - in2.s[i]));
    double xmin = 0.0, xmax = 0.0;
    for (const auto* sol : {&s1, &s2})
        for (double x : sol->x) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
    xmin -= 2.0;
    xmax += 2.0;
    double lbar = 0.0, rbar = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int q = 0; q <= 40; ++q) {
            const double x = xmin + (xmax - xmin) * q / 40.0;
            lbar = std::max(lbar, std::abs(in1.bp->lower(i, x) - in2.bp->lower(i, x)));
            rbar = std::max(rbar, std::abs(in1.bp->upper(i, x) - in2.bp->upper(i, x)));
        }
    rep.rhs = 2.0 * (C / c) * std::abs(in1.a - in2.a) + 4.0 * (C / c) * ds +
              (2.0 / c) * std::max(lbar, rbar);
    rep.ok = rep.lhs <= rep.rhs + tol;
    return rep;
}

BoundReport check_growth(const SkorokhodSolution& sol, double a, std::span<const double> s,
                         const BoundaryPair& bp, double tol) {
    const int n = int(sol.k.size()) - 1;
    if (int(s.size()) != n + 1) throw PreconditionError("check_growth: path length mismatch");
    const double c = bp.c_lip(), C = bp.C_lip();
    double l0 = 0.0, r0 = 0.0;
    for (int i = 0; i <= n; ++i) {
        l0 = std::max(l0, std::abs(bp.lower(i, 0.0)));
        r0 = std::max(r0, std::abs(bp.upper(i, 0.0)));
    }
    BoundReport rep;
    rep.ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double lhs = std::abs(sol.k[n] - sol.k[i]);
        const double rhs = (std::max(C, 1.0) / c) * (l0 + r0 + 2.0 * std::abs(a + s[n] - s[i])) + tol;
        if (lhs > rhs) rep.ok = false;
        if (lhs - rhs > worst) {
            worst = lhs - rhs;
            rep.lhs = lhs;
            rep.rhs = rhs;
        }
    }
    return rep;
}

void write_skorokhod_csv(std::ostream& os, const SkorokhodSolution& sol) {
    os << "t,x,k,kr,kl\n";
    for (std::size_t i = 0; i < sol.x.size(); ++i)
        os << fmt17(sol.t[i]) << ',' << fmt17(sol.x[i]) << ',' << fmt17(sol.k[i]) << ','
           << fmt17(sol.kr[i]) << ',' << fmt17(sol.kl[i]) << '\n';
}

}  // namespace mrgbsde
