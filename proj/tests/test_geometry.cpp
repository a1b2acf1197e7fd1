#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "etahardy/error.hpp"
#include "etahardy/geometry.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace etahardy;

namespace {

// The six symmetries of an equilateral triangle, written down directly.
std::vector<MatD> dihedral6()
{
    std::vector<MatD> out;
    for (int r = 0; r < 3; ++r) {
        double th = 2.0 * M_PI * r / 3.0;
        MatD rot(2);
        rot(0, 0) = std::cos(th);
        rot(0, 1) = -std::sin(th);
        rot(1, 0) = std::sin(th);
        rot(1, 1) = std::cos(th);
        out.push_back(rot);
        // mirror lines of the roots at 0, 60, 120 degrees lie at 90, 150, 30 degrees
        double two_phi = th + M_PI / 3.0;
        MatD ref(2);
        ref(0, 0) = std::cos(two_phi);
        ref(0, 1) = std::sin(two_phi);
        ref(1, 0) = std::sin(two_phi);
        ref(1, 1) = -std::cos(two_phi);
        out.push_back(ref);
    }
    return out;
}

bool same_matrix(const MatD& a, const MatD& b)
{
    for (std::size_t i = 0; i < a.a.size(); ++i)
        if (std::abs(a.a[i] - b.a[i]) > 1e-12) return false;
    return true;
}

} // namespace

TEST_CASE("reflect flips the last coordinate for e_d")
{
    Vec x{0.5, -1.25, 3.0};
    Vec r = reflect(Vec{0, 0, 1}, x);
    CHECK(r == Vec{0.5, -1.25, -3.0});
}

TEST_CASE("reflect in (1,1) sends (1,0) to (0,-1)")
{
    RVec r = reflect(RVec{1, 1}, RVec{1, 0});
    CHECK(r == RVec{0, -1});
}

TEST_CASE("reflect is an involution fixing the hyperplane")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 50; ++t) {
        Vec a{u(rng), u(rng), u(rng)};
        Vec x{u(rng), u(rng), u(rng)};
        Vec back = reflect(a, reflect(a, x));
        for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
    }
    Vec a{1, 2, 0};
    Vec h{2, -1, 5};
    CHECK(reflect(a, h) == h);
}

TEST_CASE("reflect rejects the zero vector")
{
    CHECK_THROWS_AS(reflect(Vec{0, 0}, Vec{1, 1}), Error);
}

TEST_CASE("group of R_1 has two elements")
{
    auto g = generate_group(RootSystem::orthogonal(3, 1));
    CHECK(g.size() == 2);
}

TEST_CASE("group of R_k has 2^k elements")
{
    for (int k = 1; k <= 3; ++k) CHECK(generate_group(RootSystem::orthogonal(3, k)).size() == (1u << k));
}

TEST_CASE("A2 group matches the explicit dihedral group of order 6")
{
    auto g = generate_group(RootSystem::a2());
    REQUIRE(g.size() == 6);
    for (const auto& m : dihedral6()) {
        bool found = false;
        for (const auto& e : g) found = found || same_matrix(e.matrix, m);
        CHECK(found);
    }
}

TEST_CASE("group elements are orthogonal and closed under composition")
{
    auto g = generate_group(RootSystem::a2());
    for (const auto& x : g) {
        MatD p = x.matrix.transpose() * x.matrix;
        CHECK(same_matrix(p, MatD::identity(2)));
        for (const auto& y : g) {
            MatD xy = x.matrix * y.matrix;
            bool found = false;
            for (const auto& z : g) found = found || same_matrix(z.matrix, xy);
            CHECK(found);
        }
    }
    auto q = generate_group(RootSystem::orthogonal(2, 2));
    for (const auto& x : q) CHECK((x.exact->transpose() * *x.exact) == MatQ::identity(2));
}

TEST_CASE("closure cap reports an infinite or oversized group")
{
    CHECK_THROWS_AS(generate_group(RootSystem::orthogonal(3, 3), 5), Error);
}

TEST_CASE("invalid root systems are rejected")
{
    CHECK_THROWS_AS(RootSystem::from_rational(2, {RVec{1, 0}, RVec{-1, 0}, RVec{2, 0}, RVec{-2, 0}}), Error);
    CHECK_THROWS_AS(RootSystem::from_rational(2, {RVec{1, 0}, RVec{-1, 0}, RVec{1, 1}, RVec{-1, -1}}), Error);
    CHECK_THROWS_AS(RootSystem::from_rational(2, {RVec{0, 0}}), Error);
}

TEST_CASE("simple roots of R_k are the last k basis vectors")
{
    auto sys = RootSystem::orthogonal(3, 2);
    auto ps = positive_and_simple(sys, Vec{0, 1, 1});
    CHECK(ps.positive.size() == 2);
    REQUIRE(ps.simple.size() == 2);
    CHECK(sys.roots()[ps.simple[0]] == Vec{0, 1, 0});
    CHECK(sys.roots()[ps.simple[1]] == Vec{0, 0, 1});
}

TEST_CASE("A2 has two simple roots for a generic basepoint")
{
    auto ps = positive_and_simple(RootSystem::a2(), Vec{0.3, 1.0});
    CHECK(ps.positive.size() == 3);
    CHECK(ps.simple.size() == 2);
}

TEST_CASE("basepoint on a hyperplane is degenerate")
{
    try {
        positive_and_simple(RootSystem::orthogonal(2, 1), Vec{1, 0});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_basepoint);
    }
}

TEST_CASE("chamber membership and wall flags")
{
    auto c = assign_homomorphism(RootSystem::orthogonal(3, 2), Vec{0, 1, 1}, {1, -1});
    CHECK(chamber_contains(c, Vec{-5, 0.5, 2}));
    auto loc = c.classify(Vec{-5, 0.0, 2});
    CHECK_FALSE(loc.interior);
    CHECK(loc.on_wall);
    CHECK(loc.walls == std::vector<int>{0});
    CHECK(c.orthogonal_axes() == std::vector<int>{1, 2});
    auto a2 = assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {1, 1});
    CHECK(chamber_contains(a2, Vec{0.3, 1.0}));
    CHECK_FALSE(a2.orthogonal_axes().has_value());
}

TEST_CASE("eta on R_k is the product of flipped coordinates' signs")
{
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> eta{(mask & 1) ? -1 : 1, (mask & 2) ? -1 : 1, (mask & 4) ? -1 : 1};
        auto c = assign_homomorphism(RootSystem::orthogonal(3, 3), Vec{1, 1, 1}, eta);
        REQUIRE(c.order() == 8);
        for (const auto& g : c.group()) {
            int expect = 1;
            for (int j = 0; j < 3; ++j)
                if (g.matrix(j, j) < 0) expect *= eta[j];
            CHECK(g.eta == expect);
        }
    }
}

TEST_CASE("all-plus signs give the trivial character, all-minus gives det")
{
    auto triv = assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {1, 1});
    for (const auto& g : triv.group()) CHECK(g.eta == 1);
    auto sgn = assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {-1, -1});
    for (const auto& g : sgn.group()) CHECK(g.eta == (determinant(g.matrix) > 0 ? 1 : -1));
}

TEST_CASE("mixed signs on A2 are not a homomorphism")
{
    try {
        assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {1, -1});
        FAIL("expected a conflict");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::not_a_homomorphism);
    }
}

TEST_CASE("eta is multiplicative and group elements permute the roots")
{
    auto c = assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {-1, -1});
    for (const auto& g : c.group()) {
        for (const auto& h : c.group()) {
            auto idx = c.find(g.matrix * h.matrix);
            REQUIRE(idx.has_value());
            CHECK(c.group()[*idx].eta == g.eta * h.eta);
        }
        for (const auto& a : c.system().roots()) {
            Vec ga = g.matrix.apply(a);
            bool found = false;
            for (const auto& b : c.system().roots())
                found = found || (std::abs(ga[0] - b[0]) < 1e-12 && std::abs(ga[1] - b[1]) < 1e-12);
            CHECK(found);
        }
    }
}

TEST_CASE("orbits of chamber points meet every orthant once")
{
    auto c = assign_homomorphism(RootSystem::orthogonal(3, 2), Vec{0, 1, 1}, {1, 1});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 4.0);
    for (int t = 0; t < 100; ++t) {
        Vec x{u(rng) - 2.0, u(rng), u(rng)};
        std::set<std::pair<int, int>> patterns;
        for (const auto& g : c.group()) {
            Vec y = g.matrix.apply(x);
            patterns.insert({y[1] > 0, y[2] > 0});
        }
        CHECK(patterns.size() == 4);
    }
}
