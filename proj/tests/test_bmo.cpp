#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

#include "etahardy/bmo.hpp"
#include "etahardy/error.hpp"

#include <cmath>
#include <cstdlib>

using namespace etahardy;
using namespace testsupport;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n, d); }

CubeFamily family(int d, long long radius, int min_level, int max_level)
{
    CubeFamily f;
    f.window = Box::symmetric(d, Rational(radius));
    f.min_level = min_level;
    f.max_level = max_level;
    return f;
}

PCFunction constant(int d, long long radius, const Scalar& c)
{
    Box w = Box::symmetric(d, Rational(radius));
    return PCFunction::indicator(w, w, c);
}

double brute_sup(const PCFunction& F, const CubeFamily& fam, Centering c)
{
    double best = 0;
    for (const auto& q : fam.cubes()) best = std::max(best, oscillation(F, q.cube, c).to_double());
    return best;
}

} // namespace

TEST_CASE("oscillation of a constant vanishes in both centerings")
{
    PCFunction F = constant(2, 2, Scalar(R(7, 3)));
    Cube q(RVec{R(-1, 3), R(1, 2)}, R(1, 4));
    CHECK(oscillation(F, q, Centering::mean) == Scalar(R(0)));
    CHECK(oscillation(F, q, Centering::best) == Scalar(R(0)));
    CHECK(mean_abs(F, q) == Scalar(R(7, 3)));
}

TEST_CASE("oscillation on three equal cells with values 1, 2, 10")
{
    Box w = interval(-2, 2);
    std::vector<Cell> cells{{interval(0, 1, 3), Scalar(R(1))}, {interval(1, 2, 3), Scalar(R(2))},
                            {interval(2, 3, 3), Scalar(R(10))}};
    PCFunction F(w, cells);
    Cube q(RVec{R(0)}, R(1));
    CHECK(oscillation(F, q, Centering::best) == Scalar(R(3)));
    CHECK(oscillation(F, q, Centering::mean) == Scalar(R(34, 9)));
}

TEST_CASE("oscillation counts the zero region and rejects cubes outside the window")
{
    PCFunction F = PCFunction::indicator(interval(-2, 2), interval(0, 1));
    CHECK(oscillation(F, Cube(RVec{R(-1, 2)}, R(1)), Centering::mean) == Scalar(R(1, 2)));
    CHECK(oscillation(F, Cube(RVec{R(-1, 2)}, R(1)), Centering::best) == Scalar(R(1, 2)));
    CHECK(oscillation(F, Cube(RVec{R(-1, 4)}, R(1)), Centering::best) == Scalar(R(1, 4)));
    CHECK(mean_abs(F, Cube(RVec{R(-1, 4)}, R(1))) == Scalar(R(3, 4)));
    try {
        (void)oscillation(F, Cube(RVec{R(3)}, R(1)), Centering::mean);
        FAIL("expected empty_cube");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_cube);
    }
}

TEST_CASE("best <= mean <= 2 best on random functions, exactly")
{
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pc(rng, Box::symmetric(d, R(1)), 2, 6 + t % 7, window(d, 2));
        std::uniform_int_distribution<int> pos(-8, 4);
        RVec corner(d);
        for (auto& x : corner) x = R(pos(rng), 4);
        Cube q(corner, R(1 + static_cast<long long>(rng() % 4), 4));
        Scalar best = oscillation(F, q, Centering::best);
        Scalar mean = oscillation(F, q, Centering::mean);
        REQUIRE(best.is_exact());
        CHECK(!less(mean, best));
        CHECK(!less(best * Scalar(R(2)), mean));
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("the weighted median beats random constants")
{
    std::mt19937_64 rng(12);
    for (int t = 0; t < 40; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pc(rng, Box::symmetric(d, R(1)), 2, 8, window(d, 2));
        Cube q(RVec(d, R(-3, 4)), R(3, 2));
        Scalar best = oscillation(F, q, Centering::best);
        std::uniform_int_distribution<int> val(-40, 40);
        for (int s = 0; s < 50; ++s) {
            Scalar c(R(val(rng), 8));
            Scalar dev = oscillation(F - PCFunction::indicator(F.window(), F.window(), c), q, Centering::mean);
            Scalar shifted = mean_abs(F - PCFunction::indicator(F.window(), F.window(), c), q);
            (void)dev;
            CHECK(!less(shifted, best));
        }
    }
}

TEST_CASE("constants: BMO* is zero, bmo* is the absolute value")
{
    PCFunction F = constant(1, 4, Scalar(R(-5, 2)));
    CubeFamily fam = family(1, 4, 0, 5);
    CHECK(bmo_norm(F, fam, BmoFlavor::BMOstar).value == 0);
    CHECK(bmo_norm(F, fam, BmoFlavor::BMO).value == 0);
    BmoReport r = bmo_norm(F, fam, BmoFlavor::bmostar);
    CHECK(r.value == doctest::Approx(2.5));
    CHECK(r.mean_part == doctest::Approx(2.5));
    REQUIRE(r.argmax_mean);
    CHECK(r.argmax_mean->cube.side == R(1));
}

TEST_CASE("the indicator of (0,1) has family BMO* one half")
{
    PCFunction F = PCFunction::indicator(interval(-8, 8), interval(0, 1));
    BmoReport coarse = bmo_norm(F, family(1, 8, -1, 6), BmoFlavor::BMOstar);
    CHECK(coarse.value == doctest::Approx(0.5));
    REQUIRE(coarse.argmax);
    CHECK(coarse.argmax->cube.side == R(2));
    CHECK(oscillation(F, coarse.argmax->cube, Centering::best) == Scalar(R(1, 2)));
    CHECK(coarse.value == doctest::Approx(brute_sup(F, family(1, 8, -1, 6), Centering::best)));

    BmoReport unit = bmo_norm(F, family(1, 8, 0, 6), BmoFlavor::BMOstar);
    CHECK(unit.value == doctest::Approx(1.0 / 3));
}

TEST_CASE("fast path agrees with exact per-cube oscillation")
{
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pc(rng, Box::symmetric(d, R(1)), 2, 10, window(d, 2));
        CubeFamily fam = family(d, 2, -1, 3);
        for (auto flavor : {BmoFlavor::BMO, BmoFlavor::BMOstar}) {
            BmoReport r = bmo_norm(F, fam, flavor);
            CHECK(r.value == doctest::Approx(brute_sup(F, fam, centering_of(flavor))).epsilon(1e-12));
            REQUIRE(r.argmax);
            CHECK(fam.keeps(*r.argmax));
            CHECK(r.value == doctest::Approx(oscillation(F, r.argmax->cube, centering_of(flavor)).to_double()));
        }
    }
}

TEST_CASE("arg-max is the first maximiser in enumeration order")
{
    PCFunction F = PCFunction::indicator(interval(-4, 4), interval(0, 1));
    CubeFamily fam = family(1, 4, 0, 4);
    BmoReport r = bmo_norm(F, fam, BmoFlavor::BMO);
    for (const auto& q : fam.cubes()) {
        double v = oscillation(F, q.cube, Centering::mean).to_double();
        if (v == doctest::Approx(r.value)) {
            CHECK(q.cube == r.argmax->cube);
            break;
        }
    }
}

TEST_CASE("breaking-point equivalence on random functions")
{
    std::mt19937_64 rng(14);
    for (int t = 0; t < 40; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pc(rng, Box::symmetric(d, R(2)), 1, 12, window(d, 4));
        CubeFamily fam = family(d, 4, -2, d == 1 ? 4 : 3);
        double b1 = bmo_norm(F, fam, BmoFlavor::bmostar, R(1)).value;
        double b2 = bmo_norm(F, fam, BmoFlavor::bmostar, R(2)).value;
        CHECK(b2 <= 2 * b1 + 1e-12);
        CHECK(b1 <= ((1 << d) + 1) * b2 + 1e-12);
    }
}

TEST_CASE("even extension at most doubles BMO*")
{
    std::mt19937_64 rng(15);
    for (int t = 0; t < 30; ++t) {
        const int d = 1 + t % 2;
        const int axis = static_cast<int>(rng() % d);
        PCFunction F = random_pc(rng, Box::symmetric(d, R(2)), 1, 10, window(d, 2));
        CubeFamily fam = family(d, 2, -1, 3);
        double in = bmo_norm(F, fam, BmoFlavor::BMOstar).value;
        PCFunction G = even_extend_bmo(F, axis);
        double out = bmo_norm(G, fam, BmoFlavor::BMOstar).value;
        CHECK(out <= 2 * in + 1e-12);
    }
}

TEST_CASE("even extension of a constant is the constant")
{
    PCFunction F = constant(2, 2, Scalar(R(3)));
    PCFunction G = even_extend_bmo(F, 1);
    CHECK(G.equals(F));
    CHECK(bmo_norm(G, family(2, 2, 0, 2), BmoFlavor::BMOstar).value == 0);
}

TEST_CASE("odd restriction")
{
    Box w = interval(-4, 4);
    PCFunction F = PCFunction::indicator(w, interval(0, 1)) - PCFunction::indicator(w, interval(-1, 0));
    PCFunction G = odd_restrict_bmo(F, 0);
    CHECK(G.equals(PCFunction::indicator(w, interval(0, 1))));
    CubeFamily fam = family(1, 4, -1, 5);
    double in = bmo_norm(F, fam, BmoFlavor::BMOstar).value;
    double out = bmo_norm(G, fam, BmoFlavor::BMOstar).value;
    CHECK(in == doctest::Approx(5.0 / 6));
    CHECK(out == doctest::Approx(0.5));
    CHECK(in == doctest::Approx(brute_sup(F, fam, Centering::best)));

    try {
        (void)odd_restrict_bmo(PCFunction::indicator(w, interval(0, 1)), 0);
        FAIL("expected invalid_input");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_input);
    }
}

TEST_CASE("eta BMO norm of constants")
{
    Box half(RVec{R(0)}, RVec{R(4)});
    PCFunction f = PCFunction::indicator(half, half, Scalar(R(2)));
    CubeFamily fam = family(1, 4, 0, 4);
    BmoReport triv = eta_bmo_norm(f, OrthoChamber::standard(1, 1, {0}), fam, BmoFlavor::BMOstar);
    CHECK(triv.value == 0);
    CHECK(triv.modulo_constants);
    BmoReport sgn = eta_bmo_norm(f, OrthoChamber::standard(1, 1, {1}), fam, BmoFlavor::BMOstar);
    CHECK(sgn.value > 0);
    CHECK_FALSE(sgn.modulo_constants);

    CubeFamily lopsided = fam;
    lopsided.window = Box(RVec{R(-2)}, RVec{R(4)});
    CHECK_THROWS_AS(eta_bmo_norm(f, OrthoChamber::standard(1, 1, {0}), lopsided, BmoFlavor::BMOstar), Error);
}

TEST_CASE("intrinsic M1 and M2 of constants")
{
    Box half(RVec{R(-4), R(0)}, RVec{R(4), R(4)});
    PCFunction f = PCFunction::indicator(half, half, Scalar(R(-3, 2)));
    CubeFamily fam = family(2, 4, 0, 3);
    IntrinsicReport z = intrinsic_M1_M2(f, OrthoChamber::standard(2, 1, {0}), fam, IntrinsicMode::global);
    CHECK(z.M1 == 0);
    CHECK(z.M2 == 0);
    IntrinsicReport o = intrinsic_M1_M2(f, OrthoChamber::standard(2, 1, {1}), fam, IntrinsicMode::global);
    CHECK(o.M1 == 0);
    CHECK(o.M2 == doctest::Approx(1.5));
    REQUIRE(o.argmax2);
    CHECK(o.argmax2->cube.corner[1] == R(0));

    IntrinsicReport loc = intrinsic_M1_M2(f, OrthoChamber::standard(2, 1, {0}), fam, IntrinsicMode::local);
    CHECK(loc.M1 == 0);
    CHECK(loc.M2 == doctest::Approx(1.5));
    REQUIRE(loc.argmax2);
    CHECK(!(loc.argmax2->cube.side < R(1)));
}

TEST_CASE("intrinsic cubes lie in the closed chamber and adjacency follows kappa")
{
    Box half(RVec{R(0)}, RVec{R(4)});
    PCFunction f = PCFunction::indicator(half, Box(RVec{R(1)}, RVec{R(2)}));
    OrthoChamber c = OrthoChamber::standard(1, 1, {1});
    CubeFamily fam = family(1, 4, 0, 4);
    IntrinsicReport touching = intrinsic_M1_M2(f, c, fam, IntrinsicMode::global, R(0));
    IntrinsicReport slack = intrinsic_M1_M2(f, c, fam, IntrinsicMode::global, R(1));
    CHECK(touching.M2 == 0);
    CHECK(slack.M2 > 0);
    REQUIRE(touching.argmax1);
    CHECK(c.contains_box(touching.argmax1->cube.box()));
}

TEST_CASE("enlarging the family never lowers a supremum")
{
    std::mt19937_64 rng(16);
    for (int t = 0; t < 10; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pc(rng, Box::symmetric(d, R(1)), 2, 8, window(d, 2));
        CubeFamily small = family(d, 2, 0, 2);
        CubeFamily big = family(d, 2, -1, 3);
        CubeFamily unshifted = small;
        unshifted.shifts = {R(0)};
        for (auto flavor : {BmoFlavor::BMO, BmoFlavor::BMOstar, BmoFlavor::bmostar}) {
            double a = bmo_norm(F, unshifted, flavor).value;
            double b = bmo_norm(F, small, flavor).value;
            double c = bmo_norm(F, big, flavor).value;
            if (flavor != BmoFlavor::bmostar) {
                CHECK(a <= b + 1e-12);
                CHECK(b <= c + 1e-12);
            } else {
                CHECK(a <= b + 1e-12);
            }
        }
    }
}

TEST_CASE("translating function and family together changes nothing")
{
    std::mt19937_64 rng(17);
    for (int t = 0; t < 10; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pc(rng, Box::symmetric(d, R(1)), 2, 8, window(d, 2));
        RVec shift(d);
        for (auto& x : shift) x = R(static_cast<long long>(rng() % 5) - 2);
        std::vector<Cell> moved;
        for (const auto& c : F.cells()) moved.push_back(Cell{c.box.translate(shift), c.value});
        PCFunction G(F.window().translate(shift), moved);
        CubeFamily fam = family(d, 2, 0, 3);
        CubeFamily famG = fam;
        famG.window = fam.window.translate(shift);
        for (auto flavor : {BmoFlavor::BMO, BmoFlavor::BMOstar, BmoFlavor::bmo}) {
            BmoReport a = bmo_norm(F, fam, flavor);
            BmoReport b = bmo_norm(G, famG, flavor);
            CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
        }
    }
}

TEST_CASE("cube family enumeration")
{
    CubeFamily f = family(1, 1, 0, 1);
    auto cubes = f.cubes();
    CHECK(f.size() == cubes.size());
    CHECK(cubes.front().level == 0);
    CHECK(cubes.front().cube == Cube(RVec{R(-1)}, R(1)));
    for (const auto& q : cubes) CHECK(f.window.contains(q.cube.box()));
    // Level 0: 2 unshifted, 1 + 1 shifted; level 1: 4 unshifted, 3 + 3 shifted.
    CHECK(cubes.size() == 14);
    CubeFamily shorter = f;
    shorter.shorter_than = R(1);
    CHECK(shorter.size() == 10);
    CubeFamily chamber = f;
    chamber.chamber = OrthoChamber::standard(1, 1, {0});
    for (const auto& q : chamber.cubes()) CHECK(!(q.cube.corner[0] < R(0)));
}

TEST_CASE("sample functions")
{
    SampleParams p;
    p.dim = 2;
    p.level = 4;
    p.centre = RVec{R(1), R(0)};
    Sample psi = sample_function("psi", p);
    CHECK(psi.function.evaluate(Vec{2.5, 0.0}).to_double() == 0);
    CHECK(psi.function.evaluate(Vec{1.0 + 1.0 / 32, 1.0 / 32}).to_double() ==
          doctest::Approx(-std::log(std::sqrt(2.0) / 64)));
    CHECK(psi.function.evaluate(Vec{1.3, 0.4}).to_double() == doctest::Approx(-std::log(0.5 * std::sqrt(2.0)) * 0 +
                                                                              -std::log(std::hypot(0.28125, 0.40625))));
    for (const auto& c : psi.function.cells()) {
        double r2 = 0;
        Vec mid = c.box.center();
        r2 = std::hypot(mid[0] - 1, mid[1]);
        CHECK(r2 < 1.0);
    }

    SampleParams q;
    q.level = 5;
    Sample phi = sample_function("phi", q);
    CHECK(phi.function.size() > 0);
    for (const auto& c : phi.function.cells()) {
        Vec mid = c.box.center();
        CHECK(std::abs(mid[0]) > 1);
        CHECK(std::abs(mid[0]) < 3);
        CHECK(phi.function.evaluate(Vec{-mid[0]}).to_double() == -c.value.to_double());
    }
    CHECK(phi.function.integral().to_double() == doctest::Approx(0).epsilon(1e-12));

    SampleParams b;
    b.dim = 1;
    b.level = 4;
    Sample broken = sample_function("broken_log", b);
    CHECK(broken.function.evaluate(Vec{0.3}).to_double() > 0);
    CHECK(broken.function.evaluate(Vec{-0.3}).to_double() == -broken.function.evaluate(Vec{0.3}).to_double());
    CHECK_THROWS_AS(sample_function("nope", b), Error);
    CHECK(!psi.description.empty());
}

TEST_CASE("psi has a stable family norm under refinement")
{
    for (int d = 1; d <= 2; ++d) {
        SampleParams p;
        p.dim = d;
        p.window = Box::symmetric(d, R(4));
        double prev = 0;
        for (int level = 4; level <= (d == 1 ? 7 : 5); ++level) {
            p.level = level;
            PCFunction F = sample_function("psi", p).function;
            double v = bmo_norm(F, family(d, 4, 0, level), BmoFlavor::BMO).value;
            CHECK(std::isfinite(v));
            if (prev > 0) CHECK(std::abs(v / prev - 1) <= 0.10);
            prev = v;
        }
    }
}

TEST_CASE("results do not depend on the thread count")
{
    std::mt19937_64 rng(18);
    PCFunction F = random_pc(rng, Box::symmetric(2, R(1)), 3, 40, window(2, 2));
    CubeFamily fam = family(2, 2, -1, 5);
    setenv("ETAHARDY_THREADS", "1", 1);
    BmoReport one = bmo_norm(F, fam, BmoFlavor::BMOstar);
    setenv("ETAHARDY_THREADS", "7", 1);
    BmoReport many = bmo_norm(F, fam, BmoFlavor::BMOstar);
    unsetenv("ETAHARDY_THREADS");
    CHECK(one.value == many.value);
    REQUIRE(one.argmax);
    REQUIRE(many.argmax);
    CHECK(one.argmax->cube == many.argmax->cube);
}
