#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mrgbsde/errors.hpp"
#include "mrgbsde/skorokhod.hpp"
#include "oracles.hpp"

using namespace mrgbsde;

namespace {

std::vector<double> times(int n) {
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = double(i) / n;
    return t;
}

BoundaryPair flagship_pair(int n) {
    std::vector<double> L(n + 1, 1.0), R(n + 1);
    for (int i = 0; i <= n; ++i) R[i] = 0.5 * (1.0 - double(i) / n);
    return BoundaryPair::make(BoundaryCurve::affine(1.0, L), BoundaryCurve::affine(1.0, R), 0.5);
}

}  // namespace

TEST_CASE("backward flagship: A^R grows like t / 2") {
    const int n = 1000;
    const auto bp = flagship_pair(n);
    const std::vector<double> s(n + 1, 0.0);
    const auto sol = solve_backward(times(n), 0.0, s, bp, 1e-12);
    CHECK(sol.anchor == SkorokhodSolution::Anchor::left);
    for (int i = 0; i <= n; ++i) {
        CHECK(std::abs(sol.kr[i] - 0.5 * i / n) <= 1e-8);
        CHECK(sol.kl[i] == 0.0);
    }
    const auto fl = check_flatness(sol, &bp.lower, &bp.upper, 1e-8);
    CHECK(fl.sum_r <= 1e-8);
    CHECK(fl.sum_l <= 1e-8);
    CHECK(fl.ok);
}

TEST_CASE("property: affine forward problems match the clamp recursion") {
    oracle::Gen gen(21);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = gen.integer(5, 120);
        const double kappa = gen.uniform(0.5, 2.0);
        std::vector<double> tr(n + 1), tl(n + 1), lo(n + 1), hi(n + 1), s(n + 1);
        for (int i = 0; i <= n; ++i) {
            tr[i] = gen.uniform(-0.3, 0.3);
            tl[i] = tr[i] + kappa * gen.uniform(0.4, 1.0);
            lo[i] = tr[i] / kappa;
            hi[i] = tl[i] / kappa;
        }
        const auto bp = BoundaryPair::make(BoundaryCurve::affine(kappa, tl), BoundaryCurve::affine(kappa, tr), 0.39 * kappa);
        s[0] = 0.5 * (lo[0] + hi[0]);
        for (int i = 1; i <= n; ++i) s[i] = s[i - 1] + 0.3 * gen.normal();
        const auto sol = solve_forward(times(n), s, bp, 1e-13);
        const auto ref = oracle::clamp_forward(s, lo, hi);
        for (int i = 0; i <= n; ++i) {
            CHECK(sol.x[i] == doctest::Approx(ref.x[i]).epsilon(1e-9));
            CHECK(sol.kr[i] == doctest::Approx(ref.kr[i]).epsilon(1e-9));
            CHECK(sol.kl[i] == doctest::Approx(ref.kl[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("one-sided problem is the running maximum") {
    const int n = 300;
    oracle::Gen gen(5);
    std::vector<double> thr(n + 1), s(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) thr[i] = 0.2 * std::sin(6.0 * i / n);
    const auto r = BoundaryCurve::affine(1.0, thr);
    s[0] = 1.0;
    for (int i = 1; i <= n; ++i) s[i] = s[i - 1] + 0.1 * gen.normal();
    const auto sol = solve_one_sided(times(n), s, r, false, false, 0.0, 1e-13);
    double run = 0.0;
    for (int i = 0; i <= n; ++i) {
        run = std::max(run, thr[i] - s[i]);
        CHECK(sol.k[i] == doctest::Approx(run).epsilon(1e-9));
    }
}

TEST_CASE("property: stability and growth bounds on random backward problems") {
    oracle::Gen gen(33);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 60;
        const double kappa = gen.uniform(0.5, 2.0), gap = gen.uniform(0.3, 1.0);
        std::vector<double> tr(n + 1), tl(n + 1), tr2(n + 1), tl2(n + 1), s1(n + 1, 0.0), s2(n + 1, 0.0);
        const double d = gen.uniform(-0.05, 0.05);
        for (int i = 0; i <= n; ++i) {
            tr[i] = 0.2 * std::cos(3.0 * i / n + trial);
            tl[i] = tr[i] + kappa * gap;
            tr2[i] = tr[i] + d;
            tl2[i] = tl[i] + d;
        }
        const auto bp1 = BoundaryPair::make(BoundaryCurve::affine(kappa, tl), BoundaryCurve::affine(kappa, tr), 0.9 * kappa * gap);
        const auto bp2 = BoundaryPair::make(BoundaryCurve::affine(kappa, tl2), BoundaryCurve::affine(kappa, tr2), 0.9 * kappa * gap);
        for (int i = 1; i <= n; ++i) {
            s1[i] = s1[i - 1] + 0.2 * gen.normal();
            s2[i] = s1[i] + 0.01 * gen.normal();
        }
        const double a1 = 0.5 * (tr[n] + tl[n]) / kappa, a2 = 0.5 * (tr2[n] + tl2[n]) / kappa;
        const auto x1 = solve_backward(times(n), a1, s1, bp1, 1e-12);
        const auto x2 = solve_backward(times(n), a2, s2, bp2, 1e-12);
        CHECK(check_stability(x1, x2, {a1, s1, &bp1}, {a2, s2, &bp2}).ok);
        CHECK(check_growth(x1, a1, s1, bp1, 1e-9).ok);
        for (int i = 0; i <= n; ++i) {
            CHECK(x1.x[i] == doctest::Approx(a1 + s1[n] - s1[i] + x1.k[n] - x1.k[i]).epsilon(1e-12));
            CHECK(bp1.lower(i, x1.x[i]) <= 1e-10);
            CHECK(bp1.upper(i, x1.x[i]) >= -1e-10);
        }
    }
}

TEST_CASE("sin boundaries keep the constraint and flatness") {
    const int n = 200;
    oracle::Gen gen(8);
    std::vector<double> tl(n + 1, 1.5), tr(n + 1, -0.5), s(n + 1, 0.0);
    const auto bp = BoundaryPair::make(BoundaryCurve::sin_perturbed(0.4, tl), BoundaryCurve::sin_perturbed(0.4, tr), 1.0);
    CHECK(bp.c_lip() == doctest::Approx(0.6));
    CHECK(bp.C_lip() == doctest::Approx(1.4));
    for (int i = 1; i <= n; ++i) s[i] = s[i - 1] + 0.3 * gen.normal();
    const auto sol = solve_backward(times(n), 0.0, s, bp, 1e-12);
    const auto fl = check_flatness(sol, &bp.lower, &bp.upper, 1e-9);
    CHECK(fl.ok);
    CHECK(fl.tv > 0.0);
}

TEST_CASE("catalog violations are rejected") {
    const std::vector<double> z(11, 0.0), one(11, 1.0);
    CHECK_THROWS_AS(BoundaryCurve::affine(-1.0, z), CatalogError);
    CHECK_THROWS_AS(BoundaryCurve::sin_perturbed(1.0, z), CatalogError);
    CHECK_THROWS_AS(BoundaryPair::make(BoundaryCurve::affine(1.0, z), BoundaryCurve::affine(1.0, z), 0.1), CatalogError);
    CHECK_THROWS_WITH_AS(BoundaryPair::make(BoundaryCurve::affine(1.0, one), BoundaryCurve::affine(1.0, z), 2.0),
                         doctest::Contains("separation"), CatalogError);
    CHECK_THROWS_AS(BoundaryPair::make(BoundaryCurve::affine(1.0, one), BoundaryCurve::affine(1.0, z), 0.0), CatalogError);
    // a knot row whose slope leaves [c, C]
    CHECK_THROWS_AS(BoundaryCurve::tabulated({{0.0, 1.0, 2.0}}, {{0.0, 1.0, 5.0}}, 0.5, 2.0), CatalogError);
}

TEST_CASE("tabulated curve interpolates and roots") {
    const auto b = BoundaryCurve::tabulated({{-1.0, 0.0, 2.0}}, {{-2.0, 0.0, 1.0}}, 0.5, 2.0);
    CHECK(b(0, -0.5) == doctest::Approx(-1.0));
    CHECK(b(0, 1.0) == doctest::Approx(0.5));
    CHECK(b(0, 4.0) == doctest::Approx(2.0));  // extrapolated with the last slope
    CHECK(std::abs(b(0, b.root(0, 3.0, 1e-12))) <= 1e-12);
    const auto t = BoundaryCurve::tabulated({{-1.0, 0.0, 2.0}}, {{-2.0, 0.0, 1.0}}, 0.5, 2.0, {1.0});
    CHECK(t(0, 4.0) == doctest::Approx(3.0));
    CHECK(t(0, -3.0) == doctest::Approx(-4.0));
}

TEST_CASE("start point outside the corridor is a precondition error") {
    const auto bp = flagship_pair(10);
    std::vector<double> s(11, 0.0);
    s[0] = -1.0;
    CHECK_THROWS_AS(solve_forward(times(10), s, bp, 1e-10), PreconditionError);
    CHECK_THROWS_AS(solve_backward(times(10), 5.0, std::vector<double>(11, 0.0), bp, 1e-10), PreconditionError);
}

TEST_CASE("csv dump") {
    const auto bp = flagship_pair(4);
    const auto sol = solve_backward(times(4), 0.0, std::vector<double>(5, 0.0), bp, 1e-12);
    std::ostringstream os;
    write_skorokhod_csv(os, sol);
    CHECK(os.str().rfind("t,x,k,kr,kl\n", 0) == 0);
}
