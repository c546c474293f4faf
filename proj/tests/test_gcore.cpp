#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mrgbsde/errors.hpp"
#include "mrgbsde/gcore.hpp"
#include "oracles.hpp"

using namespace mrgbsde;

namespace {
const VolBounds vb = VolBounds::make(0.25, 1.0);
const Grid grid = Grid::defaults(1.0, vb);
}  // namespace

TEST_CASE("vol bounds enforce the strict order") {
    CHECK_THROWS_AS(VolBounds::make(1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(VolBounds::make(2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(VolBounds::make(-0.1, 1.0), ConfigError);
    CHECK_THROWS_WITH_AS(VolBounds::make(1.0, 0.5), doctest::Contains("VolBounds invariant"), ConfigError);
    const auto c = VolBounds::classical(0.5);
    CHECK(c.sigma_low_sq == c.sigma_high_sq);
}

TEST_CASE("G is the half max over the two rates") {
    CHECK(g_eval(2.0, vb) == doctest::Approx(1.0));
    CHECK(g_eval(-2.0, vb) == doctest::Approx(-0.25));
    CHECK(g_eval(0.0, vb) == 0.0);
    CHECK_THROWS_AS(g_eval(std::nan(""), vb), DomainError);
}

TEST_CASE("default grid needs substeps for stability") {
    CHECK(grid.nt() == 200);
    CHECK(grid.nx() == 400);
    CHECK(grid.substeps() > 1);
    CHECK(grid.fine_dt() * vb.sigma_high_sq / (grid.h() * grid.h()) <= 1.0);
    CHECK_THROWS_WITH_AS(Grid::make(1.0, 200, 400, 6.0, vb, 0.0, 1), doctest::Contains("CFL"), ConfigError);
    CHECK_THROWS_AS(Grid::make(1.0, 200, 401, 6.0, vb), ConfigError);
}

TEST_CASE("lattice is symmetric around zero") {
    CHECK(grid.x(grid.center()) == 0.0);
    for (int j = 0; j < grid.cols(); ++j) CHECK(grid.x(j) == -grid.x(grid.cols() - 1 - j));
}

TEST_CASE("coarse index rejects off-grid times") {
    CHECK(grid.coarse_index(0.5) == 100);
    CHECK_THROWS_AS(grid.coarse_index(0.5012), AlignmentError);
}

TEST_CASE("convex payoffs follow the upper rate, concave ones the lower") {
    const double T = 1.0;
    CHECK(g_expectation(PayoffSpec::quadratic(0, 0, 1), T, grid, vb) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(g_expectation(PayoffSpec::quadratic(0, 0, -1), T, grid, vb) == doctest::Approx(-0.25).epsilon(1e-6));
    const double absval = oracle::gauss([](double x) { return std::abs(x); }, vb.sigma_high_sq * T);
    CHECK(g_expectation(PayoffSpec::abs(0, 1), T, grid, vb) == doctest::Approx(absval).epsilon(2e-3));
    // E^[-|B_1|] = -sigma_low sqrt(2/pi)
    const double neg = -std::sqrt(vb.sigma_low_sq * 2.0 * T / std::numbers::pi);
    CHECK(g_expectation(PayoffSpec::abs(0, -1), T, grid, vb) == doctest::Approx(neg).epsilon(5e-3));
    const double call = oracle::bachelier_call(0.3, vb.sigma_high_sq * T);
    CHECK(g_expectation(PayoffSpec::call(0.3, 1.0), T, grid, vb) == doctest::Approx(call).epsilon(2e-3));
}

TEST_CASE("engine agrees with a naive lattice") {
    const auto row = PayoffSpec::sin(0.1, 1.0, 2.0).row(grid);
    const double ref = oracle::g_heat_center(row, grid.h(), grid.fine_dt(), grid.fine_steps(),
                                             vb.sigma_low_sq, vb.sigma_high_sq);
    CHECK(expect_row(row, grid.nt(), grid, vb) == doctest::Approx(ref).epsilon(1e-12));
    const auto field = solve_g_heat(row, grid, vb);
    CHECK(field(0, grid.center()) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("property: monotone and constant preserving without tolerance") {
    oracle::Gen gen(11);
    for (int trial = 0; trial < 40; ++trial) {
        const int i = gen.integer(1, grid.nt());
        std::vector<double> X(grid.cols()), Y(grid.cols()), C(grid.cols());
        const double a = gen.uniform(-2, 2), b = gen.uniform(0.2, 3), c = gen.uniform(-10, 10);
        for (int j = 0; j < grid.cols(); ++j) {
            X[j] = a * std::sin(b * grid.x(j)) + 0.1 * grid.x(j) * grid.x(j);
            Y[j] = X[j] + (gen.uniform(0, 1) < 0.3 ? gen.uniform(0, 1) : 0.0);
            C[j] = c;
        }
        CHECK(expect_row(X, i, grid, vb) <= expect_row(Y, i, grid, vb));
        CHECK(expect_row(C, i, grid, vb) == c);
    }
}

TEST_CASE("property: sublinear") {
    oracle::Gen gen(12);
    for (int trial = 0; trial < 30; ++trial) {
        const int i = gen.integer(1, grid.nt());
        std::vector<double> X(grid.cols()), Y(grid.cols()), S(grid.cols()), L(grid.cols());
        const double a = gen.uniform(-1, 1), b = gen.uniform(-1, 1), lam = gen.uniform(0, 4);
        for (int j = 0; j < grid.cols(); ++j) {
            X[j] = a * grid.x(j) * grid.x(j) + std::cos(grid.x(j));
            Y[j] = b * std::abs(grid.x(j) - 0.3);
            S[j] = X[j] + Y[j];
            L[j] = lam * X[j];
        }
        const double ex = expect_row(X, i, grid, vb), ey = expect_row(Y, i, grid, vb);
        CHECK(expect_row(S, i, grid, vb) <= ex + ey + 1e-12);
        CHECK(expect_row(L, i, grid, vb) == doctest::Approx(lam * ex).epsilon(1e-12));
    }
}

TEST_CASE("step_back with sources") {
    const std::vector<double> zero(grid.cols(), 0.0), f(grid.cols(), 2.0), g(grid.cols(), -1.0);
    const auto u = step_back(zero, f, g, grid, vb);
    // D2 0 + 2 g = -2 => G = -0.25
    CHECK(u[grid.center()] == doctest::Approx(grid.fine_dt() * (2.0 - 0.25)));
    const auto v = step_back(zero, {}, {}, grid, vb);
    CHECK(v[grid.center()] == 0.0);
}

TEST_CASE("payoff catalog") {
    CHECK(PayoffSpec::call(1.0, 2.0)(3.0) == 4.0);
    CHECK(PayoffSpec::abs(1.0, -1.0)(-2.0) == -1.0);
    CHECK(std::isinf(PayoffSpec::quadratic(0, 0, 1).lipschitz_bound()));
    CHECK(PayoffSpec::sin(0, 2, 3).lipschitz_bound() == doctest::Approx(6.0));
    CHECK(payoff_kind_from("call") == PayoffSpec::Kind::call);
    CHECK_THROWS_AS(payoff_kind_from("digital"), ConfigError);
    CHECK_THROWS_AS((PayoffSpec{PayoffSpec::Kind::affine, {1.0}}).validate(), ConfigError);
}

TEST_CASE("first difference is exact on lines") {
    std::vector<double> u(grid.cols());
    for (int j = 0; j < grid.cols(); ++j) u[j] = 3.0 * grid.x(j) - 1.0;
    for (double z : first_difference(u, grid.h())) CHECK(z == doctest::Approx(3.0));
}

TEST_CASE("field csv") {
    const Grid g = Grid::make(1.0, 2, 4, 1.0, vb);
    ValueField f(3, g.cols(), g.dt(), 1.5);
    std::ostringstream os;
    write_field_csv(os, f, g);
    const std::string s = os.str();
    CHECK(s.rfind("t,x,u\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 3 * 5);
    CHECK(fmt17(0.1) == "0.10000000000000001");
}

TEST_CASE("mean functional centres the row") {
    const auto row = PayoffSpec::affine(2.0, 1.0).row(grid);
    const double v = mean_functional(row, [](double x) { return x; }, grid.nt(), 0.7, grid, vb);
    CHECK(v == doctest::Approx(0.7).epsilon(1e-9));
}
