#include "etahardy/verify.hpp"

#include "etahardy/error.hpp"
#include "etahardy/geometry.hpp"
#include "etahardy/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace etahardy {

namespace {

std::string num(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string bits_str(const std::vector<int>& bits)
{
    std::string s = "(";
    for (std::size_t i = 0; i < bits.size(); ++i) s += (i ? "," : "") + std::to_string(bits[i]);
    return s + ")";
}

std::string chamber_str(const OrthoChamber& c)
{
    return "d=" + std::to_string(c.dim()) + " k=" + std::to_string(c.k()) + " eta=" + bits_str(c.eta_bits());
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

long long uniform(std::mt19937_64& rng, long long lo, long long hi)
{
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

Box sym(int d, long long r) { return Box::symmetric(d, Rational(r)); }

// Region [lo, hi]^d cut down to the closed chamber.
Box chamber_region(const OrthoChamber& c, long long lo, long long hi)
{
    Box b = sym(c.dim(), 1);
    for (int a = 0; a < c.dim(); ++a) {
        b.lo[a] = Rational(contains(c.axes(), a) ? std::max(lo, 0LL) : lo);
        b.hi[a] = Rational(hi);
    }
    return b;
}

std::vector<OrthoChamber> chambers_up_to(int dmax)
{
    std::vector<OrthoChamber> out;
    for (int d = 1; d <= dmax; ++d)
        for (int k = 1; k <= d; ++k)
            for (int mask = 0; mask < (1 << k); ++mask) {
                std::vector<int> bits(k);
                for (int i = 0; i < k; ++i) bits[i] = (mask >> i) & 1;
                out.push_back(OrthoChamber::standard(d, k, bits));
            }
    return out;
}

// P minus its mirror image inside Q along the axis; the result has mean zero.
PCFunction antisymmetrise(const PCFunction& p, const Cube& q, int axis)
{
    std::vector<Cell> cells = p.cells();
    Rational twice_centre = Rational(2) * q.corner[axis] + q.side;
    for (const auto& c : p.cells()) {
        Box b = c.box;
        b.lo[axis] = twice_centre - c.box.hi[axis];
        b.hi[axis] = twice_centre - c.box.lo[axis];
        cells.push_back(Cell{b, -c.value});
    }
    return PCFunction::from_terms(p.window(), std::move(cells)).canonical();
}

std::optional<Atom> normalised_atom(PCFunction payload, const Cube& q, std::vector<int> I0, std::vector<int> I1,
                                    AtomKind kind)
{
    if (payload.size() == 0) return std::nullopt;
    Rational nsq = payload.l2_squared().exact();
    Atom a{std::move(payload), Rational(1) / (q.volume() * nsq), q, std::move(I0), std::move(I1), kind};
    const AtomMode mode = is_local(kind) ? AtomMode::local : AtomMode::global;
    if (!validate_atom(a, mode).ok) return std::nullopt;
    return a;
}

// Mean-zero atom with I0 = cone on a cube in [-2, 2]^d (cone axes kept in x >= 0).
std::optional<Atom> random_cone_atom(std::mt19937_64& rng, int d, int level, long long grid, const std::vector<int>& cone)
{
    Rational side = Rational::pow2(-level);
    Rational step = side / Rational(grid);
    RVec corner(d);
    for (int a = 0; a < d; ++a) {
        long long lo = contains(cone, a) ? 0 : -(Rational(2) / step).floor();
        long long hi = ((Rational(2) - side) / step).floor();
        corner[a] = Rational(uniform(rng, lo, hi)) * step;
    }
    Cube q(corner, side);
    PCFunction p = random_pcfunction(rng, q.box(), level + 2, 3 + static_cast<int>(rng() % 4), sym(d, 8));
    p = antisymmetrise(p, q, static_cast<int>(rng() % d));
    return normalised_atom(std::move(p), q, cone, {}, AtomKind::A);
}

Rational random_weight(std::mt19937_64& rng)
{
    static const Rational w[] = {Rational(1), Rational(-1), Rational(2), Rational(-3, 2), Rational(1, 2)};
    return w[rng() % 5];
}

AtomValidation validate_term(const Term& t, AtomMode mode)
{
    if (t.is_atom()) return validate_atom(t.atom(), mode);
    if (const auto* f = std::get_if<WhitneyFamily>(&t.body)) return validate_family(*f, mode, 2);
    return validate_family(std::get<ExtendedFamily>(t.body).source, mode, 2);
}

std::string first_invalid(const AtomList& list, AtomMode mode)
{
    for (std::size_t i = 0; i < list.terms.size(); ++i) {
        auto v = validate_term(list.terms[i], mode);
        if (!v.ok) return "term " + std::to_string(i) + ": " + v.clause + " (" + v.detail + ")";
    }
    return {};
}

CubeFamily family_on(int d, long long radius, int min_level, int max_level)
{
    CubeFamily f;
    f.window = sym(d, radius);
    f.min_level = min_level;
    f.max_level = max_level;
    return f;
}

// ---------------------------------------------------------------------------------------
// Checks

using CheckFn = std::function<void(CheckResult&, const SuiteConfig&, std::mt19937_64&)>;

struct CheckEntry {
    const char* name;
    const char* module;
    int criterion;
    const char* claim;
    CheckFn run;
};

void check_group(CheckResult& r, const SuiteConfig&, std::mt19937_64&)
{
    bool ok = true;
    std::ostringstream os;
    for (int k = 1; k <= 3; ++k) {
        std::size_t n = generate_group(RootSystem::orthogonal(3, k)).size();
        os << "|W(R_" << k << ")|=" << n << " ";
        ok = ok && n == (std::size_t{1} << k);
    }
    std::size_t a2 = generate_group(RootSystem::a2()).size();
    os << "|W(A2)|=" << a2;
    ok = ok && a2 == 6;
    std::size_t checked = 0, mismatched = 0;
    auto compare = [&](const SignedChamber& c) {
        for (const auto& g : c.group()) {
            ++checked;
            if (g.eta != (determinant(g.matrix) > 0 ? 1 : -1)) ++mismatched;
        }
    };
    for (int k = 1; k <= 3; ++k) compare(assign_homomorphism(RootSystem::orthogonal(3, k), Vec{1.0, 1.0, 1.0}, std::vector<int>(k, -1)));
    compare(assign_homomorphism(RootSystem::a2(), Vec{0.3, 1.0}, {-1, -1}));
    os << "; all-minus character vs det: " << mismatched << " mismatches in " << checked << " elements";
    r.passed = ok && mismatched == 0;
    r.measured = static_cast<double>(mismatched);
    r.detail = os.str();
}

void check_identities(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    std::size_t runs = 0, failures = 0;
    std::string first;
    for (const auto& c : chambers_up_to(2)) {
        for (int t = 0; t < 50; ++t) {
            PCFunction f = random_pcfunction(rng, chamber_region(c, -3, 3), 1 + t % 2, 6, sym(c.dim(), 8));
            PCFunction F = random_pcfunction(rng, sym(c.dim(), 3), 1, 8, sym(c.dim(), 8));
            bool ok = restrict_to_chamber(eta_average(eta_extend(f, c), c), c).equals(f) &&
                      pairing_identity_defect(f, F, c).is_zero();
            ++runs;
            if (!ok && failures++ == 0) first = chamber_str(c);
        }
    }
    r.passed = failures == 0;
    r.measured = static_cast<double>(failures);
    r.detail = std::to_string(runs) + " random functions over " + std::to_string(chambers_up_to(2).size()) +
               " chambers, " + std::to_string(failures) + " failures" + (first.empty() ? "" : " (first at " + first + ")");
}

void check_kernel_boundary(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(0.05, 2.0), tt(0.05, 2.0);
    double worst = 0;
    std::size_t samples = 0;
    for (const auto& c : chambers_up_to(3)) {
        auto minus = c.minus_axes();
        if (minus.empty()) continue;
        SignedChamber s = c.to_signed();
        for (int i = 0; i < 20; ++i) {
            Vec x(c.dim()), y(c.dim());
            for (int a = 0; a < c.dim(); ++a) {
                x[a] = contains(c.axes(), a) ? pos(rng) : pos(rng) - 1;
                y[a] = contains(c.axes(), a) ? pos(rng) : pos(rng) - 1;
            }
            x[minus[rng() % minus.size()]] = 0;
            worst = std::max(worst, std::abs(eta_heat_kernel(tt(rng), x, y, s)));
            ++samples;
        }
    }
    double min_order = std::numeric_limits<double>::infinity();
    std::size_t setups = 0;
    for (const auto& c : chambers_up_to(2)) {
        auto plus = c.plus_axes();
        if (plus.empty()) continue;
        SignedChamber s = c.to_signed();
        for (int i = 0; i < 5; ++i) {
            Vec x0(c.dim()), y(c.dim());
            for (int a = 0; a < c.dim(); ++a) {
                x0[a] = pos(rng);
                y[a] = 0.3 + pos(rng) / 2;
            }
            const int axis = plus[rng() % plus.size()];
            x0[axis] = 0;
            std::vector<double> errors;
            for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
                auto at = [&](double step) {
                    Vec x = x0;
                    x[axis] += step;
                    return eta_heat_kernel(0.5, x, y, s);
                };
                errors.push_back(std::abs((-3 * at(0) + 4 * at(h) - at(2 * h)) / (2 * h)));
            }
            for (std::size_t j = 0; j + 1 < errors.size(); ++j) min_order = std::min(min_order, std::log2(errors[j] / errors[j + 1]));
            ++setups;
        }
    }
    r.passed = worst <= 1e-14 && min_order >= 1.8;
    r.measured = min_order;
    r.detail = "max |K| on minus walls " + num(worst) + " over " + std::to_string(samples) +
               " samples; normal-derivative order on plus walls >= " + num(min_order) + " over " + std::to_string(setups) +
               " setups, h in {2^-4, 2^-5, 2^-6}";
}

PCFunction random_atom_sum(std::mt19937_64& rng, const OrthoChamber& c, int count)
{
    PCFunction f = PCFunction::zero(sym(c.dim(), 8));
    int placed = 0;
    for (int attempt = 0; placed < count && attempt < 200; ++attempt) {
        auto a = random_chamber_atom(rng, c, 1 + static_cast<int>(rng() % 2), 4, AtomKind::A);
        if (!a) continue;
        AtomList one{sym(c.dim(), 8), AtomMode::global, c.eta_bits(), {Term{random_weight(rng), *a}}};
        f = f + one.reconstruct();
        ++placed;
    }
    return f.canonical();
}

void check_maximal(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    double worst = 0;
    std::size_t points = 0, functions = 0;
    for (int d = 1; d <= 2; ++d) {
        KernelConfig cfg;
        cfg.window = sym(d, 4);
        cfg.h = d == 1 ? 1.0 / 16 : 1.0 / 4;
        for (int t = 0; t < 10; ++t) {
            OrthoChamber c = OrthoChamber::standard(d, 1, {t % 2});
            PCFunction f = random_atom_sum(rng, c, 1 + t % 3);
            auto M = maximal_transform(f, c, cfg, KernelMode::heat, Range::global);
            auto W = whole_space_maximal(eta_extend(f, c), M.points, cfg, KernelMode::heat, Range::global);
            for (std::size_t i = 0; i < M.values.size(); ++i) {
                double scale = std::max({std::abs(M.values[i]), std::abs(W.values[i]), 1e-300});
                worst = std::max(worst, std::abs(M.values[i] - W.values[i]) / scale);
            }
            points += M.values.size();
            ++functions;
        }
    }
    r.passed = worst <= 1e-10;
    r.measured = worst;
    r.detail = "max relative difference " + num(worst) + " over " + std::to_string(points) + " points, " +
               std::to_string(functions) + " atom sums, heat kernel";
}

void check_whitney(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    std::size_t violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 1 + trial % 3;
        const int n = static_cast<int>(rng() % d);
        std::vector<int> walls;
        for (int a = 0; a < d; ++a)
            if (a != n && rng() % 2) walls.push_back(a);
        const int level = static_cast<int>(rng() % 3);
        Rational side = Rational::pow2(-level), step = side / Rational(8);
        RVec corner(d);
        for (int a = 0; a < d; ++a) {
            if (a == n)
                corner[a] = Rational(uniform(rng, -7, 3)) * step;
            else
                corner[a] = Rational(uniform(rng, contains(walls, a) ? 0 : -8, 16)) * step;
        }
        Cube q(corner, side);
        const int m0 = whitney_base_level(q);
        std::map<int, long long> count;
        for (const auto& c : whitney_cells(q, n, walls, m0 + (d == 3 ? 4 : 6))) ++count[c.level];
        for (const auto& [m, j] : count)
            if (m < m0 || j > ((1LL << d) - 1) * (1LL << ((m - m0) * (d - 1)))) ++violations;
    }
    std::map<int, double> worst;
    std::size_t straddling = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 3;
        const int n = d - 1;
        std::vector<int> cone;
        for (int a = 0; a < n; ++a)
            if (rng() % 2) cone.push_back(a);
        auto a = random_cone_atom(rng, d, static_cast<int>(rng() % 3), trial % 2 ? 1 : 4, cone);
        if (!a) continue;
        Term t{random_weight(rng), *a};
        auto o = split_term(t, n, AtomMode::global);
        if (o.split_case != SplitCase::straddling) continue;
        ++straddling;
        const double bound = std::sqrt(std::exp2(d) * (std::exp2(d) - 1));
        worst[d] = std::max(worst[d], o.emitted_l1 / (bound * std::abs(t.coefficient())));
    }
    double measured = 0;
    std::ostringstream os;
    os << "500 cubes, " << violations << " count violations; case-3 coefficient sum / bound over " << straddling
       << " straddling atoms:";
    for (const auto& [d, w] : worst) {
        os << " d=" << d << " max " << num(w);
        measured = std::max(measured, w);
    }
    r.passed = violations == 0 && measured <= 1 + 1e-12;
    r.measured = measured;
    r.detail = os.str();
}

void check_decomposition(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    int runs = 0;
    std::size_t failures = 0;
    double worst = 0;
    std::string first;
    while (runs < 100) {
        const int d = 1 + runs % 2;
        const int k = 1 + static_cast<int>(rng() % d);
        std::vector<int> bits(k);
        for (auto& b : bits) b = static_cast<int>(rng() % 2);
        OrthoChamber c = OrthoChamber::standard(d, k, bits);
        AtomList list{sym(d, 8), AtomMode::global, {}, {}};
        for (int i = 0; i < 3; ++i)
            if (auto a = random_cone_atom(rng, d, static_cast<int>(rng() % 3), 1, c.plus_axes())) {
                a->kind = AtomKind::classical;
                a->I0.clear();
                list.terms.push_back(Term{random_weight(rng), *a});
            }
        if (list.terms.empty()) continue;
        ++runs;
        auto dec = decompose_eta(list, c, AtomMode::global);
        worst = std::max(worst, dec.l1_out / (dec.constant * dec.l1_in));
        std::string why;
        if (!dec.atoms.reconstruct().equals(restrict_to_chamber(list.reconstruct(), c)))
            why = "reconstruction differs";
        else if (auto bad = first_invalid(dec.atoms, AtomMode::global); !bad.empty())
            why = bad;
        else if (dec.l1_out > dec.constant * dec.l1_in * (1 + 1e-12))
            why = "l1 growth " + num(dec.l1_out / dec.l1_in);
        if (!why.empty() && failures++ == 0) first = chamber_str(c) + ": " + why;
    }
    r.passed = failures == 0;
    r.measured = worst;
    r.detail = "100 lists, " + std::to_string(failures) + " failures, max l1_out / (C l1_in) = " + num(worst) +
               (first.empty() ? "" : "; first failure " + first);
}

void check_extension(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    auto chambers = chambers_up_to(3);
    std::size_t a_atoms = 0, a_fail = 0, b_atoms = 0, b_mean = 0, b_invalid = 0, over3 = 0, over5 = 0;
    double worst = 0;
    for (int t = 0; a_atoms < 100 && t < 5000; ++t) {
        const OrthoChamber& c = chambers[rng() % chambers.size()];
        auto a = random_chamber_atom(rng, c, static_cast<int>(rng() % 3), 4, AtomKind::A);
        if (!a) continue;
        ++a_atoms;
        auto e = extend_atoms(AtomList{sym(c.dim(), 8), AtomMode::global, c.eta_bits(), {Term{Rational(1), *a}}}, c);
        if (e.atoms.terms.size() != c.order() || !first_invalid(e.atoms, AtomMode::global).empty()) ++a_fail;
    }
    for (int t = 0; b_atoms < 100 && t < 5000; ++t) {
        const OrthoChamber& c = chambers[rng() % chambers.size()];
        if (c.minus_axes().empty()) continue;
        auto b = random_chamber_atom(rng, c, static_cast<int>(rng() % 3), 4, AtomKind::B);
        if (!b) continue;
        ++b_atoms;
        auto e = extend_atoms(AtomList{sym(c.dim(), 8), AtomMode::global, c.eta_bits(), {Term{Rational(1), *b}}}, c);
        if (!first_invalid(e.atoms, AtomMode::global).empty()) ++b_invalid;
        const double cap3 = std::pow(3.0, c.dim()), cap5 = std::pow(5.0, c.dim());
        for (const auto& rec : e.b_records) {
            if (!rec.mean_zero) ++b_mean;
            double ratio = rec.volume_ratio.to_double();
            worst = std::max(worst, ratio / cap3);
            if (ratio > cap3) ++over3;
            if (!(ratio < cap5)) ++over5;
        }
    }
    r.passed = a_fail == 0 && b_mean == 0 && b_invalid == 0 && over3 == 0;
    r.measured = worst;
    r.detail = std::to_string(a_atoms) + " A-atoms (" + std::to_string(a_fail) + " without exactly 2^k valid images); " +
               std::to_string(b_atoms) + " B-atoms: " + std::to_string(b_mean) + " non-mean-zero, " +
               std::to_string(b_invalid) + " invalid, " + std::to_string(over3) + " with |Q_J|/|Q| > 3^d (max ratio/3^d " +
               num(worst) + "), " + std::to_string(over5) + " with ratio >= 5^d";
}

void check_bmo_ledger(CheckResult& r, const SuiteConfig& cfg, std::mt19937_64& rng)
{
    std::size_t cube_fail = 0;
    for (int t = 0; t < 200; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pcfunction(rng, sym(d, 1), 2, 6 + t % 7, sym(d, 2));
        RVec corner(d);
        for (auto& x : corner) x = Rational(uniform(rng, -8, 4), 4);
        Cube q(corner, Rational(1 + uniform(rng, 0, 3), 4));
        Scalar best = oscillation(F, q, Centering::best), mean = oscillation(F, q, Centering::mean);
        if (less(mean, best) || less(best * Scalar(2), mean)) ++cube_fail;
    }
    double bp = 0, even_ratio = 0;
    for (int t = 0; t < 100; ++t) {
        const int d = 1 + t % 2;
        PCFunction F = random_pcfunction(rng, sym(d, 2), 1, 12, sym(d, 4));
        CubeFamily fam = family_on(d, 4, -2, std::min(cfg.levels, d == 1 ? 5 : 3));
        double b1 = bmo_norm(F, fam, BmoFlavor::bmostar, Rational(1)).value;
        double b2 = bmo_norm(F, fam, BmoFlavor::bmostar, Rational(2)).value;
        bp = std::max({bp, b2 / (2 * b1), b1 / (((1 << d) + 1) * b2)});
    }
    for (int t = 0; t < 100; ++t) {
        const int d = 1 + t % 2;
        const int axis = static_cast<int>(rng() % d);
        PCFunction F = random_pcfunction(rng, sym(d, 2), 1, 10, sym(d, 2));
        CubeFamily fam = family_on(d, 2, -1, std::min(cfg.levels, 3));
        double in = bmo_norm(F, fam, BmoFlavor::BMOstar).value;
        double out = bmo_norm(even_extend_bmo(F, axis), fam, BmoFlavor::BMOstar).value;
        even_ratio = std::max(even_ratio, in > 0 ? out / (2 * in) : (out > 0 ? INFINITY : 0.0));
    }
    r.passed = cube_fail == 0 && bp <= 1 + 1e-12 && even_ratio <= 1 + 1e-12;
    r.measured = std::max(bp, even_ratio);
    r.detail = "200 cubes with best <= mean <= 2 best violated " + std::to_string(cube_fail) +
               " times; breaking-point ratios (max over both inequalities, 100 functions) " + num(bp) +
               "; even-extension ratio out/(2 in) over 100 functions " + num(even_ratio);
}

void check_intrinsic_band(CheckResult& r, const SuiteConfig& cfg, std::mt19937_64& rng)
{
    std::vector<OrthoChamber> configs{OrthoChamber::standard(1, 1, {0}), OrthoChamber::standard(1, 1, {1}),
                                      OrthoChamber::standard(2, 1, {1}), OrthoChamber::standard(2, 2, {1, 0})};
    double worst = 0;
    std::ostringstream os;
    for (const auto& c : configs) {
        const int d = c.dim();
        CubeFamily fam = family_on(d, 4, 0, std::min(cfg.levels, 5));
        double lo = INFINITY, hi = 0;
        for (int t = 0; t < 50; ++t) {
            PCFunction f = random_pcfunction(rng, chamber_region(c, -2, 2), 1, 8, sym(d, 4));
            double norm = eta_bmo_norm(f, c, fam, BmoFlavor::BMO).value;
            if (norm == 0) continue;
            auto m = intrinsic_M1_M2(f, c, fam, IntrinsicMode::global, cfg.kappa);
            double ratio = (m.M1 + m.M2) / norm;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        double width = hi / lo;
        worst = std::max(worst, width);
        os << chamber_str(c) << ": [" << num(lo) << ", " << num(hi) << "] width " << num(width) << "; ";
    }
    r.passed = worst <= 50;
    r.measured = worst;
    r.detail = os.str() + "worst width " + num(worst);
}

void check_distinctness(CheckResult& r, const SuiteConfig&, std::mt19937_64&)
{
    std::vector<int> levels{5, 6, 7, 8};
    double growth = INFINITY, variation = 0;
    std::ostringstream os;
    for (int d = 1; d <= 2; ++d) {
        auto p = distinctness_probe(d, {0}, {1}, levels);
        growth = std::min(growth, p.min_growth);
        variation = std::max(variation, p.matched_variation);
        os << "d=" << d << " mismatched";
        for (double v : p.mismatched) os << " " << num(v);
        os << ", matched";
        for (double v : p.matched) os << " " << num(v);
        os << "; ";
    }
    r.passed = growth >= 0.6 && variation <= 0.1;
    r.measured = growth;
    r.detail = os.str() + "min growth per level " + num(growth) + ", matched variation " + num(variation);
}

void check_duality(CheckResult& r, const SuiteConfig& cfg, std::mt19937_64& rng)
{
    KernelConfig kernel;
    kernel.h = cfg.h;
    kernel.t_grid = cfg.t_grid;
    double worst_change = 0;
    bool finite = true;
    std::ostringstream os;
    for (const auto& c : chambers_up_to(2)) {
        const int d = c.dim();
        kernel.window = sym(d, cfg.window);
        std::vector<AtomList> fs;
        std::vector<double> h1;
        for (int attempt = 0; fs.size() < 5 && attempt < 500; ++attempt) {
            AtomKind kind = !c.minus_axes().empty() && rng() % 2 ? AtomKind::B : AtomKind::A;
            auto a = random_chamber_atom(rng, c, 1 + static_cast<int>(rng() % 2), 4, kind);
            if (!a) continue;
            fs.push_back(AtomList{sym(d, 8), AtomMode::global, c.eta_bits(), {Term{Rational(1), *a}}});
            h1.push_back(h1_norm_estimate(fs.back().reconstruct(), c, kernel, KernelMode::heat, Range::global).value);
        }
        double max6 = 0, max7 = 0;
        for (int bi = 0; bi < 20; ++bi) {
            PCFunction b = random_pcfunction(rng, chamber_region(c, -1, 1), 1 + bi % 2, 6, sym(d, 8));
            double n6 = eta_bmo_norm(b, c, family_on(d, 2, 0, cfg.levels - 1), BmoFlavor::BMO).value;
            double n7 = eta_bmo_norm(b, c, family_on(d, 2, 0, cfg.levels), BmoFlavor::BMO).value;
            for (std::size_t fi = 0; fi < fs.size(); ++fi) {
                double pairing = std::abs(b.inner(fs[fi].reconstruct()).to_double());
                if (pairing == 0) continue;
                max6 = std::max(max6, pairing / (n6 * h1[fi]));
                max7 = std::max(max7, pairing / (n7 * h1[fi]));
            }
        }
        finite = finite && std::isfinite(max6) && std::isfinite(max7);
        double change = max6 > 0 ? std::abs(max7 / max6 - 1) : 0;
        worst_change = std::max(worst_change, change);
        os << chamber_str(c) << ": max " << num(max6) << " -> " << num(max7) << "; ";
    }
    r.passed = finite && worst_change <= 0.2;
    r.measured = worst_change;
    r.detail = os.str() + "worst relative change L=" + std::to_string(cfg.levels - 1) + "->" + std::to_string(cfg.levels) +
               " " + num(worst_change);
}

void check_embedding(CheckResult& r, const SuiteConfig& cfg, std::mt19937_64& rng)
{
    struct Case {
        int d;
        std::vector<int> e1, e2;
    };
    std::vector<Case> cases{{1, {0}, {1}}, {1, {1}, {1}}, {2, {0}, {1}}, {2, {0, 0}, {0, 1}}, {2, {0, 1}, {1, 1}}, {2, {0, 0}, {1, 1}}};
    std::size_t failures = 0, runs = 0;
    double worst = 0;
    std::string first;
    for (const auto& cs : cases) {
        OrthoChamber c1 = OrthoChamber::standard(cs.d, static_cast<int>(cs.e1.size()), cs.e1);
        CubeFamily fam = family_on(cs.d, 4, 0, std::min(cfg.levels, 4));
        for (int t = 0; t < 10; ++t) {
            AtomList f{sym(cs.d, 8), AtomMode::global, cs.e1, {}};
            for (int attempt = 0; f.terms.size() < 2 && attempt < 200; ++attempt) {
                AtomKind kind = !c1.minus_axes().empty() && rng() % 2 ? AtomKind::B : AtomKind::A;
                if (auto a = random_chamber_atom(rng, c1, static_cast<int>(rng() % 3), 4, kind))
                    f.terms.push_back(Term{random_weight(rng), *a});
            }
            PCFunction g = t % 3 == 0 ? PCFunction::indicator(sym(cs.d, 4), chamber_region(c1, -4, 4), Scalar(Rational(3, 2)))
                                      : random_pcfunction(rng, chamber_region(c1, -2, 2), 1, 8, sym(cs.d, 4));
            auto e = embedding_check(cs.e1, cs.e2, f, g, fam, cfg.kappa);
            ++runs;
            worst = std::max(worst, e.l1_in > 0 ? e.l1_out / (e.constant * e.l1_in) : 0.0);
            if (!(e.h1_ok && e.bmo_ok) && failures++ == 0) first = bits_str(cs.e1) + " <= " + bits_str(cs.e2) + ": " + e.detail;
        }
    }
    r.passed = failures == 0;
    r.measured = worst;
    r.detail = std::to_string(runs) + " embeddings, " + std::to_string(failures) + " failures, max l1_out/(C l1_in) " +
               num(worst) + (first.empty() ? "" : "; first failure " + first);
}

void check_truncation(CheckResult& r, const SuiteConfig& cfg, std::mt19937_64& rng)
{
    std::vector<OrthoChamber> configs{OrthoChamber::standard(1, 1, {1}), OrthoChamber::standard(2, 1, {1}),
                                      OrthoChamber::standard(2, 2, {1, 1}), OrthoChamber::standard(2, 2, {1, 0})};
    double worst = 0;
    std::ostringstream os;
    for (const auto& c : configs) {
        const int d = c.dim();
        CubeFamily fam = family_on(d, 4, 0, std::min(cfg.levels, 5));
        double hi = 0;
        for (int t = 0; t < 20; ++t) {
            PCFunction f = random_pcfunction(rng, chamber_region(c, -2, 2), 1, 8, sym(d, 4));
            double norm = eta_bmo_norm(f, c, fam, BmoFlavor::BMO).value;
            PCFunction T = eta_extend(f, c);
            for (int axis : c.minus_axes()) T = odd_restrict_bmo(T, axis);
            double ratio = bmo_norm(T, fam, BmoFlavor::BMO).value / norm;
            hi = std::max(hi, ratio);
        }
        worst = std::max(worst, hi);
        os << chamber_str(c) << ": max ratio " << num(hi) << "; ";
    }
    r.passed = std::isfinite(worst);
    r.measured = worst;
    r.detail = os.str() + "truncated norm / eta norm, worst " + num(worst);
}

void check_corollaries(CheckResult& r, const SuiteConfig&, std::mt19937_64& rng)
{
    std::size_t b_atoms = 0, lists = 0;
    for (int t = 0; lists < 40 && t < 400; ++t) {
        const int d = 1 + t % 2;
        const int k = 1 + static_cast<int>(rng() % d);
        OrthoChamber c = OrthoChamber::standard(d, k, std::vector<int>(k, 0));
        AtomList list{sym(d, 8), AtomMode::global, {}, {}};
        for (int i = 0; i < 3; ++i)
            if (auto a = random_cone_atom(rng, d, static_cast<int>(rng() % 3), 1, {})) {
                a->kind = AtomKind::classical;
                a->I0.clear();
                list.terms.push_back(Term{random_weight(rng), *a});
            }
        if (list.terms.empty()) continue;
        ++lists;
        for (const auto& term : decompose_eta(list, c, AtomMode::global).atoms.terms)
            if (!term.is_atom() || term.atom().kind == AtomKind::B) ++b_atoms;
    }
    Cube big(RVec{Rational(1)}, Rational(2));
    Atom large{PCFunction::indicator(sym(1, 8), big.box()), Rational(1, 4), big, {}, {0}, AtomKind::localB};
    bool accepted = validate_atom(large, AtomMode::local).ok;
    r.passed = b_atoms == 0 && accepted;
    r.measured = static_cast<double>(b_atoms);
    r.detail = std::to_string(lists) + " trivial-character decompositions produced " + std::to_string(b_atoms) +
               " B-atoms; local atom with l(Q) = 2 " + (accepted ? "accepted" : "rejected");
}

const std::vector<CheckEntry>& registry()
{
    static const std::vector<CheckEntry> entries{
        {"geometry.group", "geometry", 1,
         "W(R_k) has 2^k elements, the A2 group has 6, and the all-minus character equals det", check_group},
        {"gridfn.identities", "gridfn", 2, "averaging inverts extension on the chamber and the pairing identity is exact",
         check_identities},
        {"kernels.boundary", "kernels", 3,
         "the eta heat kernel vanishes on minus walls and has zero normal derivative on plus walls", check_kernel_boundary},
        {"kernels.maximal", "kernels", 4, "the chamber maximal function equals the whole-space one of the extension",
         check_maximal},
        {"atoms.whitney", "atoms", 5, "Whitney cell counts and the straddling coefficient bound", check_whitney},
        {"atoms.decomposition", "atoms", 6, "eta decompositions reconstruct exactly with valid atoms and bounded l1",
         check_decomposition},
        {"atoms.extension", "atoms", 7, "extended A-atoms give 2^k classical atoms; extended B-atoms are mean zero on cubes at most 3^d times larger",
         check_extension},
        {"bmo.ledger", "bmo", 8, "centering, breaking-point and even-extension constants", check_bmo_ledger},
        {"bmo.intrinsic_band", "bmo", 9, "M1 + M2 is equivalent to the eta-BMO norm", check_intrinsic_band},
        {"verify.distinctness", "verify", 10, "a truncated logarithm on a wall separates the two characters",
         check_distinctness},
        {"verify.duality", "verify", 11, "the pairing with eta-BMO functions is bounded on eta-H1", check_duality},
        {"verify.embedding", "verify", 0, "H1 and BMO embeddings along the componentwise order of characters",
         check_embedding},
        {"bmo.truncation", "bmo", 0, "truncating an odd extension to the minus half-spaces keeps the norm bounded",
         check_truncation},
        {"atoms.corollaries", "atoms", 0, "trivial-character decompositions need no B-atoms; local atoms may be large",
         check_corollaries},
    };
    return entries;
}

const CheckEntry& entry_of(const std::string& name)
{
    for (const auto& s : registry())
        if (name == s.name) return s;
    throw Error(ErrorCode::invalid_argument, "unknown check '" + name + "'");
}

} // namespace

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::mt19937_64 seeded_rng(std::uint64_t seed, const std::string& label)
{
    return std::mt19937_64(seed ^ fnv1a(label));
}

std::string SuiteConfig::canonical() const
{
    char h_text[40];
    std::snprintf(h_text, sizeof h_text, "%.17g", h);
    std::ostringstream os;
    os << "seed=" << seed << ";levels=" << levels << ";kappa=" << kappa.str() << ";h=" << h_text << ";window=" << window
       << ";t_grid=" << t_grid.str();
    return os.str();
}

std::string SuiteConfig::fingerprint() const
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

bool SuiteReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

PCFunction random_pcfunction(std::mt19937_64& rng, const Box& region, int level, int n, const Box& window)
{
    const int d = region.dim();
    Rational side = Rational::pow2(-level);
    std::vector<long long> lo(d), count(d);
    for (int a = 0; a < d; ++a) {
        lo[a] = (region.lo[a] / side).ceil();
        count[a] = (region.hi[a] / side).floor() - lo[a];
        if (count[a] <= 0) return PCFunction::zero(window);
    }
    std::set<std::vector<long long>> used;
    std::vector<Cell> cells;
    for (int t = 0; t < n; ++t) {
        std::vector<long long> idx(d);
        for (int a = 0; a < d; ++a) idx[a] = lo[a] + uniform(rng, 0, count[a] - 1);
        if (!used.insert(idx).second) continue;
        RVec l(d), h(d);
        for (int a = 0; a < d; ++a) {
            l[a] = Rational(idx[a]) * side;
            h[a] = l[a] + side;
        }
        long long v = uniform(rng, -8, 8);
        if (v == 0) v = 1;
        cells.push_back(Cell{Box(l, h), Scalar(Rational(v, 2))});
    }
    return PCFunction(window, std::move(cells));
}

std::optional<Atom> random_chamber_atom(std::mt19937_64& rng, const OrthoChamber& chamber, int level, long long grid,
                                        AtomKind kind)
{
    const int d = chamber.dim();
    const auto plus = chamber.plus_axes(), minus = chamber.minus_axes();
    if (kind == AtomKind::B && minus.empty()) return std::nullopt;
    Rational side = Rational::pow2(-level), step = side / Rational(grid);
    const long long top = ((Rational(2) - side) / step).floor();
    const int near = kind == AtomKind::B ? minus[rng() % minus.size()] : -1;
    RVec corner(d);
    for (int a = 0; a < d; ++a) {
        long long lo = contains(chamber.axes(), a) ? 0 : -(Rational(2) / step).floor();
        long long hi = top;
        if (contains(minus, a)) {
            Rational clearance = kind == AtomKind::A ? side * Rational(3, 2) : kind == AtomKind::B ? side / Rational(2) : Rational(0);
            lo = (clearance / step).ceil();
            if (a == near) hi = std::min(hi, ((side * Rational(3, 2)) / step).ceil() - 1);
        }
        if (hi < lo) return std::nullopt;
        corner[a] = Rational(uniform(rng, lo, hi)) * step;
    }
    Cube q(corner, side);
    PCFunction p = random_pcfunction(rng, q.box(), level + 2, 3 + static_cast<int>(rng() % 4), sym(d, 8));
    if (kind != AtomKind::B) p = antisymmetrise(p, q, static_cast<int>(rng() % d));
    if (kind == AtomKind::classical) return normalised_atom(std::move(p), q, {}, {}, kind);
    return normalised_atom(std::move(p), q, plus, minus, kind);
}

DualityResult duality_pairing(const PCFunction& b, const AtomList& f, const OrthoChamber& chamber,
                              const CubeFamily& family, const KernelConfig& kernel)
{
    if (auto bad = first_invalid(f, f.mode); !bad.empty()) throw Error(ErrorCode::invalid_input, "atom list: " + bad);
    const bool local = f.mode == AtomMode::local;
    PCFunction F = f.reconstruct();
    DualityResult r;
    r.pairing = b.inner(F).to_double();
    r.bmo = eta_bmo_norm(b, chamber, family, local ? BmoFlavor::bmo : BmoFlavor::BMO).value;
    r.h1 = h1_norm_estimate(F, chamber, kernel, KernelMode::heat, local ? Range::local : Range::global).value;
    const double denom = r.bmo * r.h1;
    r.ratio = denom > 0 ? std::abs(r.pairing) / denom : (r.pairing == 0 ? 0.0 : INFINITY);
    return r;
}

EmbeddingResult embedding_check(const std::vector<int>& eta1, const std::vector<int>& eta2, const AtomList& f,
                                const PCFunction& g, const CubeFamily& family, const Rational& kappa)
{
    if (eta1.size() != eta2.size() || eta1.empty())
        throw Error(ErrorCode::invalid_argument, "characters must have the same nonzero length");
    for (std::size_t i = 0; i < eta1.size(); ++i)
        if (eta1[i] > eta2[i]) throw Error(ErrorCode::invalid_argument, "order violated: " + bits_str(eta1) + " is not below " + bits_str(eta2));
    const int d = f.dim();
    const int k = static_cast<int>(eta1.size());
    OrthoChamber c1 = OrthoChamber::standard(d, k, eta1), c2 = OrthoChamber::standard(d, k, eta2);
    EmbeddingResult r;
    r.constant = decomposition_constant(d, k);
    r.l1_in = f.l1();
    std::string why = first_invalid(f, f.mode);
    if (!why.empty()) throw Error(ErrorCode::invalid_input, "atom list: " + why);
    if (eta1 == eta2) {
        r.l1_out = r.l1_in;
        r.constant = 1;
        r.h1_ok = true;
    } else {
        AtomList classical = extend_atoms(f, c1).atoms;
        for (int axis : c1.plus_axes()) classical = even_restrict(classical, axis);
        r.l1_in = classical.l1();
        Decomposition dec = decompose_eta(classical, c2, f.mode);
        r.l1_out = dec.l1_out;
        if (!dec.atoms.reconstruct().equals(f.reconstruct()))
            why = "re-decomposition does not reconstruct f";
        else if (auto bad = first_invalid(dec.atoms, f.mode); !bad.empty())
            why = bad;
        else if (dec.l1_out > r.constant * r.l1_in * (1 + 1e-12))
            why = "l1 growth " + num(dec.l1_out / r.l1_in) + " exceeds " + num(r.constant);
        r.h1_ok = why.empty();
    }
    r.M2_low = intrinsic_M1_M2(g, c1, family, IntrinsicMode::global, kappa).M2;
    r.M2_high = intrinsic_M1_M2(g, c2, family, IntrinsicMode::global, kappa).M2;
    r.bmo_ok = r.M2_low <= r.M2_high + 1e-12;
    if (!r.bmo_ok && why.empty()) why = "M2 " + num(r.M2_low) + " exceeds " + num(r.M2_high);
    r.detail = why.empty() ? "ok" : why;
    return r;
}

DistinctnessResult distinctness_probe(int d, const std::vector<int>& eta1, const std::vector<int>& eta2,
                                      const std::vector<int>& levels)
{
    if (eta1.size() != eta2.size() || eta1.empty())
        throw Error(ErrorCode::invalid_argument, "characters must have the same nonzero length");
    if (eta1 == eta2) throw Error(ErrorCode::invalid_argument, "characters must differ");
    if (levels.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two levels");
    const int k = static_cast<int>(eta1.size());
    OrthoChamber c1 = OrthoChamber::standard(d, k, eta1), c2 = OrthoChamber::standard(d, k, eta2);
    int i = 0;
    while (eta1[i] == eta2[i]) ++i;
    const OrthoChamber& matched = eta1[i] == 0 ? c1 : c2;
    const OrthoChamber& mismatched = eta1[i] == 0 ? c2 : c1;
    DistinctnessResult r;
    r.wall = matched.axes()[i];
    r.levels = levels;
    SampleParams p;
    p.dim = d;
    p.window = sym(d, 4);
    p.centre = RVec(d, Rational(2));
    p.centre[r.wall] = Rational(0);
    if (d == 1) p.centre[0] = Rational(0);
    for (int level : levels) {
        p.level = level;
        PCFunction f = restrict_to_chamber(sample_function("psi", p).function, matched);
        CubeFamily fam = family_on(d, 4, 0, level);
        r.matched.push_back(eta_bmo_norm(f, matched, fam, BmoFlavor::BMO).value);
        r.mismatched.push_back(eta_bmo_norm(f, mismatched, fam, BmoFlavor::BMO).value);
    }
    r.min_growth = INFINITY;
    for (std::size_t j = 0; j + 1 < levels.size(); ++j)
        r.min_growth = std::min(r.min_growth, (r.mismatched[j + 1] - r.mismatched[j]) / (levels[j + 1] - levels[j]));
    auto [lo, hi] = std::minmax_element(r.matched.begin(), r.matched.end());
    r.matched_variation = *lo > 0 ? *hi / *lo - 1 : INFINITY;
    return r;
}

std::vector<std::string> check_names()
{
    std::vector<std::string> out;
    for (const auto& s : registry()) out.push_back(s.name);
    std::sort(out.begin(), out.end());
    return out;
}

std::string check_module(const std::string& name) { return entry_of(name).module; }

std::string criterion_check(int i)
{
    for (const auto& s : registry())
        if (s.criterion == i) return s.name;
    throw Error(ErrorCode::invalid_argument, "no acceptance criterion " + std::to_string(i));
}

CheckResult run_check(const std::string& name, const SuiteConfig& config)
{
    const CheckEntry& s = entry_of(name);
    CheckResult r;
    r.name = s.name;
    r.module = s.module;
    r.criterion = s.criterion;
    r.claim = s.claim;
    auto rng = seeded_rng(config.seed, r.name);
    try {
        s.run(r, config, rng);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
    }
    return r;
}

SuiteReport run_suite(const SuiteConfig& config)
{
    static const std::set<std::string> modules{"geometry", "gridfn", "kernels", "atoms", "bmo", "verify"};
    if (config.only && !modules.count(*config.only))
        throw Error(ErrorCode::config_error, "unknown module '" + *config.only + "' (geometry, gridfn, kernels, atoms, bmo, verify)");
    SuiteReport report;
    report.config = config;
    report.fingerprint = config.fingerprint();
    for (const auto& name : check_names())
        if (!config.only || check_module(name) == *config.only) report.checks.push_back(run_check(name, config));
    return report;
}

nlohmann::ordered_json report_to_json(const SuiteReport& report)
{
    using json = nlohmann::ordered_json;
    auto measured = [](double x) -> json {
        if (std::isfinite(x)) return x;
        return num(x);
    };
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back(json{{"name", c.name},
                              {"module", c.module},
                              {"criterion", c.criterion},
                              {"claim", c.claim},
                              {"status", c.passed ? "pass" : "fail"},
                              {"measured", measured(c.measured)},
                              {"detail", c.detail}});
    const auto& cfg = report.config;
    json config{{"seed", cfg.seed},     {"levels", cfg.levels}, {"kappa", cfg.kappa.str()},
                {"h", cfg.h},           {"window", cfg.window}, {"t_grid", cfg.t_grid.str()},
                {"only", cfg.only ? json(*cfg.only) : json(nullptr)}};
    return json{{"fingerprint", report.fingerprint}, {"config", config}, {"passed", report.passed()}, {"checks", checks}};
}

std::string report_to_markdown(const SuiteReport& report)
{
    std::ostringstream os;
    os << "# Verification report\n\n";
    os << "Fingerprint `" << report.fingerprint << "` (" << report.config.canonical() << ")\n\n";
    std::size_t passed = 0;
    for (const auto& c : report.checks) passed += c.passed;
    os << passed << " of " << report.checks.size() << " checks passed.\n\n";
    os << "| check | criterion | status | measured | detail |\n|---|---|---|---|---|\n";
    auto cell = [](const std::string& text) {
        std::string out;
        for (char ch : text) {
            if (ch == '|') out += '\\';
            out += ch;
        }
        return out;
    };
    for (const auto& c : report.checks) {
        os << "| " << c.name << " | " << (c.criterion ? std::to_string(c.criterion) : "") << " | "
           << (c.passed ? "pass" : "**fail**") << " | " << num(c.measured) << " | " << cell(c.detail) << " |\n";
    }
    return os.str();
}

} // namespace etahardy
