#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "etahardy/error.hpp"
#include "etahardy/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace etahardy;
using namespace testsupport;

namespace {

constexpr double pi = std::numbers::pi;

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n)
{
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

double heat1(double t, double x) { return std::exp(-x * x / (4 * t)) / std::sqrt(4 * pi * t); }

// The six elements of the dihedral group of order 6: rotations by multiples of 120
// degrees and reflections in the lines at 30, 90 and 150 degrees.
std::vector<std::array<double, 4>> dihedral6()
{
    std::vector<std::array<double, 4>> out;
    for (int k = 0; k < 3; ++k) {
        double th = 2 * pi * k / 3;
        out.push_back({std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
    }
    for (double deg : {30.0, 90.0, 150.0}) {
        double phi = 2 * deg * pi / 180;
        out.push_back({std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi)});
    }
    return out;
}

KernelConfig single_time(double t)
{
    KernelConfig c;
    c.t_grid = TGrid{t, 2.0, t};
    return c;
}

SignedChamber a2_chamber(int e1, int e2) { return assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {e1, e2}); }

} // namespace

TEST_CASE("Gauss-Weierstrass kernel normalisation and mass")
{
    CHECK(gauss_kernel(1.0 / (4 * pi), Vec{0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    for (double t : {0.01, 0.1, 1.0}) {
        double mass = simpson([t](double x) { return gauss_kernel(t, Vec{x}); }, -8, 8, 40000);
        CHECK(std::abs(mass - 1) <= 1e-6);
    }
    CHECK(gauss_kernel(0.3, Vec{0.2, -0.1}) ==
          doctest::Approx(heat1(0.3, 0.2) * heat1(0.3, -0.1)).epsilon(1e-14));
}

TEST_CASE("heat semigroup by dense convolution")
{
    double t = 0.1, s = 0.1;
    for (double x : {0.0, 0.3, -0.7}) {
        double y = 0.25;
        double conv = simpson([&](double z) { return gauss_kernel(t, Vec{x - z}) * gauss_kernel(s, Vec{z - y}); }, -8, 8,
                              20000);
        double direct = gauss_kernel(t + s, Vec{x - y});
        CHECK(std::abs(conv - direct) / direct <= 1e-4);
    }
}

TEST_CASE("Poisson kernel value, mass with tail correction, and scaling")
{
    CHECK(poisson_kernel(1.0, Vec{0.0}) == doctest::Approx(1 / pi).epsilon(1e-15));
    for (double t : {0.1, 1.0}) {
        double L = 8;
        double mass = simpson([t](double x) { return poisson_kernel(t, Vec{x}); }, -L, L, 200000);
        double tail = 1 - 2 / pi * std::atan(L / t);
        CHECK(std::abs(mass + tail - 1) <= 1e-4);
    }
    // In the plane the mass outside the ball of radius R is t / sqrt(t^2 + R^2).
    double t = 0.5;
    double box = poisson_box_integral(t, Vec{0, 0}, Box::symmetric(2, Rational(8)));
    CHECK(box >= 1 - t / std::sqrt(t * t + 64) - 1e-4);
    CHECK(box <= 1 - t / std::sqrt(t * t + 128) + 1e-4);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3, 3), tt(0.05, 4);
    for (int i = 0; i < 200; ++i) {
        double tv = tt(rng);
        Vec x{u(rng), u(rng), u(rng)};
        Vec xs{x[0] / tv, x[1] / tv, x[2] / tv};
        CHECK(poisson_kernel(tv, x) == doctest::Approx(std::pow(tv, -3) * poisson_kernel(1, xs)).epsilon(1e-14));
    }
}

TEST_CASE("kernels reject non-positive times")
{
    for (double t : {0.0, -1.0}) {
        CHECK_THROWS_AS(gauss_kernel(t, Vec{0.0}), Error);
        CHECK_THROWS_AS(poisson_kernel(t, Vec{0.0}), Error);
    }
    try {
        gauss_kernel(0.0, Vec{1.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_argument);
    }
}

TEST_CASE("two-term image sums on the half line")
{
    auto odd = OrthoChamber::standard(1, 1, {1}).to_signed();
    auto even = OrthoChamber::standard(1, 1, {0}).to_signed();
    for (double t : {0.05, 1.0}) {
        double x = 0.7, y = 1.3;
        CHECK(eta_heat_kernel(t, Vec{x}, Vec{y}, odd) ==
              doctest::Approx(heat1(t, x - y) - heat1(t, x + y)).epsilon(1e-14));
        CHECK(eta_poisson_kernel(t, Vec{x}, Vec{y}, even) ==
              doctest::Approx(poisson_kernel(t, Vec{x - y}) + poisson_kernel(t, Vec{x + y})).epsilon(1e-14));
    }
}

TEST_CASE("kernels vanish exactly on walls with sign -1")
{
    auto c = OrthoChamber::standard(2, 2, {1, 0}).to_signed();
    Vec y{0.4, 1.1};
    for (double t : {0.01, 0.5, 3.0}) {
        CHECK(eta_heat_kernel(t, Vec{0.0, 0.6}, y, c) == 0.0);
        CHECK(eta_poisson_kernel(t, Vec{0.0, 0.6}, y, c) == 0.0);
        CHECK(eta_heat_kernel(t, Vec{0.3, 0.0}, y, c) != 0.0);
    }
    auto odd = OrthoChamber::standard(1, 1, {1}).to_signed();
    CHECK(eta_heat_kernel(0.2, Vec{0.0}, Vec{0.5}, odd) == 0.0);
    // Irrational reflections: cancellation up to round-off.
    auto a2 = a2_chamber(-1, -1);
    Vec on_wall{0.0, 1.0};
    double scale = eta_heat_kernel(0.5, Vec{0.5, 1.2}, y, a2_chamber(1, 1));
    CHECK(std::abs(eta_heat_kernel(0.5, on_wall, y, a2)) <= 1e-14 * scale);
}

TEST_CASE("A2 trivial-character kernel equals the explicit six-term sum")
{
    auto a2 = a2_chamber(1, 1);
    auto group = dihedral6();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2, 2), tt(0.05, 2);
    for (int i = 0; i < 100; ++i) {
        Vec x{u(rng), u(rng)}, y{u(rng), u(rng)};
        double t = tt(rng);
        double heat = 0, pois = 0;
        for (const auto& m : group) {
            Vec gx{m[0] * x[0] + m[1] * x[1], m[2] * x[0] + m[3] * x[1]};
            Vec diff{gx[0] - y[0], gx[1] - y[1]};
            heat += std::exp(-(diff[0] * diff[0] + diff[1] * diff[1]) / (4 * t)) / (4 * pi * t);
            pois += t / (2 * pi * std::pow(t * t + diff[0] * diff[0] + diff[1] * diff[1], 1.5));
        }
        CHECK(eta_heat_kernel(t, x, y, a2) == doctest::Approx(heat).epsilon(1e-12));
        CHECK(eta_poisson_kernel(t, x, y, a2) == doctest::Approx(pois).epsilon(1e-12));
    }
}

TEST_CASE("eta kernels are symmetric in x and y")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.05, 3), tt(0.05, 2);
    std::vector<SignedChamber> chambers{a2_chamber(-1, -1), a2_chamber(1, 1),
                                        OrthoChamber::standard(2, 2, {0, 1}).to_signed()};
    for (const auto& c : chambers) {
        for (int i = 0; i < 100; ++i) {
            Vec x{u(rng), u(rng)}, y{u(rng), u(rng)};
            double t = tt(rng);
            CHECK(std::abs(eta_heat_kernel(t, x, y, c) - eta_heat_kernel(t, y, x, c)) <= 1e-12);
            CHECK(std::abs(eta_poisson_kernel(t, x, y, c) - eta_poisson_kernel(t, y, x, c)) <= 1e-12);
        }
    }
}

TEST_CASE("even walls: one-sided normal derivative converges at order at least 1.8")
{
    struct Setup {
        SignedChamber chamber;
        Vec wall_point;
        int axis;
        Vec y;
    };
    std::vector<Setup> setups{{OrthoChamber::standard(1, 1, {0}).to_signed(), Vec{0.0}, 0, Vec{0.7}},
                              {OrthoChamber::standard(2, 2, {0, 1}).to_signed(), Vec{0.0, 0.6}, 0, Vec{0.5, 0.9}}};
    for (const auto& s : setups) {
        std::vector<double> errors;
        for (double h : {0.1, 0.05, 0.025}) {
            auto at = [&](double step) {
                Vec x = s.wall_point;
                x[s.axis] += step;
                return eta_heat_kernel(0.5, x, s.y, s.chamber);
            };
            errors.push_back(std::abs((-3 * at(0) + 4 * at(h) - at(2 * h)) / (2 * h)));
        }
        for (std::size_t i = 0; i + 1 < errors.size(); ++i) CHECK(std::log2(errors[i] / errors[i + 1]) >= 1.8);
    }
}

TEST_CASE("chamber semigroup property by quadrature over the chamber")
{
    double t = 0.2, s = 0.3;
    auto odd = OrthoChamber::standard(1, 1, {1}).to_signed();
    for (double x : {0.4, 1.5}) {
        double y = 0.8;
        double conv = simpson([&](double z) { return eta_heat_kernel(t, Vec{x}, Vec{z}, odd) * eta_heat_kernel(s, Vec{z}, Vec{y}, odd); },
                              0, 10, 4000);
        double direct = eta_heat_kernel(t + s, Vec{x}, Vec{y}, odd);
        CHECK(std::abs(conv - direct) / std::abs(direct) <= 1e-3);
    }
    std::vector<SignedChamber> planar{OrthoChamber::standard(2, 2, {1, 0}).to_signed(), a2_chamber(-1, -1)};
    for (const auto& c : planar) {
        Vec x = c.basepoint(), y{0.5 * c.basepoint()[0] + 0.2, 0.8 * c.basepoint()[1] + 0.3};
        REQUIRE(c.contains(y));
        double h = 0.02, conv = 0;
        for (double z0 = -6 + h / 2; z0 < 6; z0 += h)
            for (double z1 = -6 + h / 2; z1 < 6; z1 += h) {
                Vec z{z0, z1};
                if (!c.contains(z)) continue;
                conv += eta_heat_kernel(t, x, z, c) * eta_heat_kernel(s, z, y, c);
            }
        conv *= h * h;
        double direct = eta_heat_kernel(t + s, x, y, c);
        CHECK(std::abs(conv - direct) / std::abs(direct) <= 1e-3);
    }
}

TEST_CASE("maximal transform against a Riemann-sum oracle at x = 4")
{
    auto odd = OrthoChamber::standard(1, 1, {1}).to_signed();
    auto f = PCFunction::indicator(window(1), interval(1, 2));
    double oracle = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double y = 1 + (i + 0.5) / n;
        oracle += heat1(1, 4 - y) - heat1(1, 4 + y);
    }
    oracle /= n;
    auto got = maximal_transform_at(f, odd, {Vec{4.0}}, single_time(1.0), KernelMode::heat, Range::global);
    CHECK(got[0] == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("heat cell integrals agree with Gauss quadrature of the kernel")
{
    Box b(RVec{Rational(1, 4), Rational(-1, 2)}, RVec{Rational(3, 4), Rational(1)});
    for (double t : {0.01, 0.3, 2.0}) {
        Vec z{0.1, 0.2};
        double quad = simpson([&](double u) {
            return simpson([&](double v) { return gauss_kernel(t, Vec{z[0] - u, z[1] - v}); }, -0.5, 1, 600);
        }, 0.25, 0.75, 600);
        CHECK(heat_box_integral(t, z, b) == doctest::Approx(quad).epsilon(1e-7));
        double pq = simpson([&](double u) {
            return simpson([&](double v) { return poisson_kernel(t, Vec{z[0] - u, z[1] - v}); }, -0.5, 1, 2000);
        }, 0.25, 0.75, 2000);
        CHECK(poisson_box_integral(t, z, b) == doctest::Approx(pq).epsilon(1e-4));
    }
}

TEST_CASE("maximal transform of zero is zero")
{
    KernelConfig cfg;
    cfg.h = 0.25;
    for (const auto& c : small_chambers()) {
        auto m = maximal_transform(PCFunction::zero(window(c.dim())), c, cfg, KernelMode::heat, Range::global);
        CHECK_FALSE(m.points.empty());
        for (double v : m.values) CHECK(v == 0.0);
    }
    auto pm = maximal_transform(PCFunction::zero(window(2)), a2_chamber(-1, -1), cfg, KernelMode::poisson, Range::local);
    for (double v : pm.values) CHECK(v == 0.0);
}

TEST_CASE("chamber route equals the whole-space route on the extension")
{
    std::mt19937_64 rng(41);
    KernelConfig cfg;
    cfg.h = 0.125;
    for (const auto& c : small_chambers()) {
        auto f = random_pc(rng, chamber_region(c, -2, 2), 1, 6, window(c.dim()));
        auto M = maximal_transform(f, c, cfg, KernelMode::heat, Range::global);
        auto W = whole_space_maximal(eta_extend(f, c), M.points, cfg, KernelMode::heat, Range::global);
        for (std::size_t i = 0; i < M.values.size(); ++i) {
            double scale = std::max({std::abs(M.values[i]), std::abs(W.values[i]), 1e-300});
            CHECK(std::abs(M.values[i] - W.values[i]) / scale <= 1e-10);
        }
    }
    KernelConfig coarse;
    coarse.h = 0.5;
    coarse.t_grid = TGrid{1.0 / 16, 4.0, 16};
    for (const auto& c : small_chambers()) {
        auto f = random_pc(rng, chamber_region(c, -2, 2), 1, 3, window(c.dim()));
        auto M = maximal_transform(f, c, coarse, KernelMode::poisson, Range::global);
        auto W = whole_space_maximal(eta_extend(f, c), M.points, coarse, KernelMode::poisson, Range::global);
        for (std::size_t i = 0; i < M.values.size(); ++i) {
            double scale = std::max({std::abs(M.values[i]), std::abs(W.values[i]), 1e-300});
            CHECK(std::abs(M.values[i] - W.values[i]) / scale <= 1e-10);
        }
    }
}

TEST_CASE("enlarging the t-grid never decreases the maximal transform")
{
    std::mt19937_64 rng(43);
    auto c = OrthoChamber::standard(2, 1, {1});
    auto f = random_pc(rng, chamber_region(c, -2, 2), 1, 8, window(2));
    KernelConfig small, large;
    small.h = large.h = 0.25;
    small.t_grid = TGrid{1.0 / 16, 4.0, 16};
    large.t_grid = TGrid{1.0 / 64, 2.0, 64};
    for (auto range : {Range::global, Range::local}) {
        auto a = maximal_transform(f, c, small, KernelMode::heat, range);
        auto b = maximal_transform(f, c, large, KernelMode::heat, range);
        for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(b.values[i] >= a.values[i]);
    }
}

TEST_CASE("local range keeps only t below one")
{
    TGrid g;
    auto local = g.values(Range::local);
    CHECK(local.back() < 1);
    CHECK(local.size() == 10);
    CHECK(g.values(Range::global).size() == 21);
    KernelConfig cfg;
    cfg.t_grid = TGrid{1, 2, 8};
    auto c = OrthoChamber::standard(1, 1, {0});
    try {
        maximal_transform(PCFunction::zero(window(1)), c, cfg, KernelMode::heat, Range::local);
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_error);
    }
    CHECK(TGrid::parse("1/1024:2:1024").values(Range::global).size() == 21);
    CHECK_THROWS_AS(TGrid::parse("1:0.5:4"), Error);
    CHECK_THROWS_AS(TGrid::parse("1:2"), Error);
}

TEST_CASE("H1 estimate: zero, homogeneity, metadata")
{
    std::mt19937_64 rng(47);
    auto c = OrthoChamber::standard(2, 2, {1, 1});
    KernelConfig cfg;
    cfg.h = 0.25;
    CHECK(h1_norm_estimate(PCFunction::zero(window(2)), c, cfg, KernelMode::heat, Range::global).value == 0.0);
    auto f = random_pc(rng, chamber_region(c, -2, 2), 1, 8, window(2));
    auto base = h1_norm_estimate(f, c, cfg, KernelMode::heat, Range::global);
    CHECK(base.value > 0);
    CHECK(base.points == 32 * 32);
    CHECK(base.h == 0.25);
    for (Rational k : {Rational(2), Rational(-4), Rational(1, 2)})
        CHECK(h1_norm_estimate(f.scaled(Scalar(k)), c, cfg, KernelMode::heat, Range::global).value ==
              std::abs(k.to_double()) * base.value);
    CHECK(h1_norm_estimate(f.scaled(Scalar(3)), c, cfg, KernelMode::heat, Range::global).value ==
          doctest::Approx(3 * base.value).epsilon(1e-13));
}

TEST_CASE("H1 estimate of an odd atom is stable under refinement")
{
    auto c = OrthoChamber::standard(1, 1, {1});
    auto a = PCFunction(window(1), {Cell{interval(4, 5, 2), Scalar(1)}, Cell{interval(5, 6, 2), Scalar(-1)}});
    KernelConfig base;
    base.h = 1.0 / 16;
    KernelConfig finer = base;
    finer.h = 1.0 / 32;
    KernelConfig denser = base;
    denser.t_grid.ratio = std::sqrt(2.0);
    double e0 = h1_norm_estimate(a, c, base, KernelMode::heat, Range::global).value;
    double e1 = h1_norm_estimate(a, c, finer, KernelMode::heat, Range::global).value;
    double e2 = h1_norm_estimate(a, c, denser, KernelMode::heat, Range::global).value;
    CHECK(std::isfinite(e0));
    CHECK(std::abs(e1 - e0) / e0 <= 0.05);
    CHECK(std::abs(e2 - e0) / e0 <= 0.05);
}

TEST_CASE("output does not depend on the number of worker threads")
{
    std::mt19937_64 rng(53);
    auto c = OrthoChamber::standard(2, 1, {0});
    auto f = random_pc(rng, chamber_region(c, -2, 2), 2, 12, window(2));
    KernelConfig cfg;
    cfg.h = 0.25;
    setenv("ETAHARDY_THREADS", "1", 1);
    auto one = maximal_transform(f, c, cfg, KernelMode::heat, Range::global);
    auto pone = maximal_transform(f, a2_chamber(1, 1), cfg, KernelMode::heat, Range::local);
    setenv("ETAHARDY_THREADS", "7", 1);
    auto many = maximal_transform(f, c, cfg, KernelMode::heat, Range::global);
    auto pmany = maximal_transform(f, a2_chamber(1, 1), cfg, KernelMode::heat, Range::local);
    unsetenv("ETAHARDY_THREADS");
    CHECK(one.values == many.values);
    CHECK(pone.values == pmany.values);
}
