#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "etahardy/error.hpp"
#include "etahardy/verify.hpp"

#include <cmath>
#include <set>

using namespace etahardy;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n, d); }

Box line(long long a, long long b) { return Box({Rational(a)}, {Rational(b)}); }

CubeFamily family1(long long radius, int max_level)
{
    CubeFamily f;
    f.window = line(-radius, radius);
    f.max_level = max_level;
    return f;
}

AtomList single(const Atom& a, std::vector<int> eta)
{
    AtomList list;
    list.window = a.payload.window();
    list.eta = std::move(eta);
    list.terms.push_back(Term{R(1), a});
    return list;
}

} // namespace

TEST_CASE("fnv1a matches the published 64-bit test vectors")
{
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("the fingerprint is a pure function of the configuration")
{
    SuiteConfig a, b;
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint().size() == 16);
    b.seed += 1;
    CHECK(a.fingerprint() != b.fingerprint());
    b = a;
    b.kappa = R(1, 2);
    CHECK(a.fingerprint() != b.fingerprint());
    b = a;
    b.only = "bmo";
    CHECK(a.canonical() == b.canonical());
}

TEST_CASE("seeded streams depend on seed and label only")
{
    auto r1 = seeded_rng(7, "x"), r2 = seeded_rng(7, "x"), r3 = seeded_rng(7, "y"), r4 = seeded_rng(8, "x");
    auto v1 = r1();
    CHECK(v1 == r2());
    CHECK(v1 != r3());
    CHECK(v1 != r4());
}

TEST_CASE("every criterion maps to a registered check")
{
    auto names = check_names();
    CHECK(names.size() == 14);
    std::set<std::string> seen;
    for (int i = 1; i <= 11; ++i) {
        std::string n = criterion_check(i);
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
        seen.insert(n);
    }
    CHECK(seen.size() == 11);
    CHECK(check_module("bmo.ledger") == "bmo");
    CHECK_THROWS_AS(criterion_check(12), Error);
}

TEST_CASE("the only filter selects one module and rejects unknown names")
{
    SuiteConfig c;
    c.only = "geometry";
    SuiteReport r = run_suite(c);
    REQUIRE(r.checks.size() == 1);
    CHECK(r.checks[0].name == "geometry.group");
    CHECK(r.passed());
    CHECK(r.fingerprint == c.fingerprint());

    c.only = "nosuch";
    try {
        run_suite(c);
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_error);
    }
}

TEST_CASE("report serialisation keeps non-finite values readable")
{
    SuiteReport r;
    r.fingerprint = SuiteConfig{}.fingerprint();
    r.checks.push_back(CheckResult{"x.inf", "x", 0, "claim", false, INFINITY, "a | b"});
    r.checks.push_back(CheckResult{"x.one", "x", 3, "claim", true, 1.5, "fine"});
    auto j = report_to_json(r);
    CHECK(j["fingerprint"] == r.fingerprint);
    CHECK(j["checks"][0]["measured"].is_string());
    CHECK(j["checks"][1]["measured"] == 1.5);
    std::string md = report_to_markdown(r);
    CHECK(md.find("1 of 2 checks passed") != std::string::npos);
    CHECK(md.find("a \\| b") != std::string::npos);
}

TEST_CASE("pairing the constant one with atoms")
{
    OrthoChamber odd = OrthoChamber::standard(1, 1, {1});
    Box win = line(-4, 4);
    PCFunction one = PCFunction::indicator(win, line(0, 4));
    KernelConfig kc;
    kc.h = 0.25;
    kc.window = win;
    kc.t_grid = TGrid{1.0 / 64, 4.0, 64};

    SUBCASE("a mean-zero A-atom pairs to zero")
    {
        Atom a;
        a.kind = AtomKind::A;
        a.cube = Cube::dyadic({2}, 0);
        a.payload = PCFunction::from_terms(win, {Cell{Box({R(2)}, {R(5, 2)}), Scalar(R(1))},
                                                 Cell{Box({R(5, 2)}, {R(3)}), Scalar(R(-1))}});
        auto r = duality_pairing(one, single(a, {1}), odd, family1(4, 3), kc);
        CHECK(r.pairing == 0);
        CHECK(r.ratio == 0);
    }
    SUBCASE("a normalised B-atom pairs to one")
    {
        Atom b;
        b.kind = AtomKind::B;
        b.cube = Cube::dyadic({1}, 0);
        b.I1 = {0};
        b.payload = PCFunction::indicator(win, line(1, 2));
        auto r = duality_pairing(one, single(b, {1}), odd, family1(4, 3), kc);
        CHECK(r.pairing == doctest::Approx(1.0));
        CHECK(r.h1 > 0);
        CHECK(r.bmo > 0);
    }
}

TEST_CASE("random chamber atoms are admissible")
{
    auto rng = seeded_rng(11, "atoms");
    OrthoChamber c = OrthoChamber::standard(2, 1, {1});
    int drawn = 0;
    for (int i = 0; i < 200; ++i) {
        for (AtomKind k : {AtomKind::A, AtomKind::B, AtomKind::classical}) {
            auto a = random_chamber_atom(rng, c, 1, 4, k);
            if (!a) continue;
            ++drawn;
            auto v = validate_atom(*a, AtomMode::global);
            CHECK_MESSAGE(v.ok, v.clause << ": " << v.detail);
        }
    }
    CHECK(drawn > 100);
}

TEST_CASE("embedding along equal characters is the identity")
{
    auto rng = seeded_rng(3, "embed");
    OrthoChamber c = OrthoChamber::standard(1, 1, {0});
    std::optional<Atom> a;
    while (!(a = random_chamber_atom(rng, c, 1, 4, AtomKind::A))) {
    }
    AtomList list = single(*a, {0});
    CubeFamily fam = family1(4, 3);
    PCFunction g = PCFunction::indicator(line(-4, 4), line(-1, 1));
    auto r = embedding_check({0}, {0}, list, g, fam);
    CHECK(r.h1_ok);
    CHECK(r.bmo_ok);
    CHECK(r.l1_out == doctest::Approx(r.l1_in));
    CHECK(r.M2_low == r.M2_high);
}
