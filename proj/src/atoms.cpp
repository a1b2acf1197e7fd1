#include "etahardy/atoms.hpp"

#include "etahardy/error.hpp"
#include "etahardy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etahardy {

namespace {

bool has(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::vector<int> with(std::vector<int> v, int x)
{
    if (!has(v, x)) v.push_back(x);
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<int> united(std::vector<int> a, const std::vector<int>& b)
{
    for (int x : b) a = with(std::move(a), x);
    return a;
}

std::string list_str(const std::vector<int>& v)
{
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "}";
}

// Lower corner of the concentric dilation by `factor` along axis i.
Rational dilated_lo(const Cube& q, int i, const Rational& factor)
{
    return q.corner[i] + q.side * (Rational(1) - factor) / Rational(2);
}

Rational exact_value(const Scalar& s, const char* what)
{
    if (!s.is_exact()) throw Error(ErrorCode::invalid_input, std::string(what) + " must be exact");
    return s.exact();
}

double sqrt_ratio(const Rational& num_sq, const Rational& den_sq)
{
    return std::sqrt(num_sq.to_double() / den_sq.to_double());
}

AtomValidation fail(std::string clause, std::string detail) { return {false, std::move(clause), std::move(detail)}; }

std::vector<int> flip_signs(int d, const std::vector<int>& axes)
{
    std::vector<int> s(d, 1);
    for (int a : axes) s[a] = -1;
    return s;
}

Cube flip_cube(const Cube& q, const std::vector<int>& signs) { return Cube::from_box(q.box().flip(signs)); }

// Wall product of the chamber signs over the flipped axes.
int eta_of(const OrthoChamber& chamber, const std::vector<int>& flipped)
{
    int e = 1;
    for (int a : flipped) {
        auto it = std::find(chamber.axes().begin(), chamber.axes().end(), a);
        e *= chamber.wall_sign(static_cast<int>(it - chamber.axes().begin()));
    }
    return e;
}

// All subsets of axes, as lists, in binary counting order.
std::vector<std::vector<int>> subsets(const std::vector<int>& axes)
{
    std::vector<std::vector<int>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << axes.size()); ++mask) {
        std::vector<int> s;
        for (std::size_t j = 0; j < axes.size(); ++j)
            if (mask >> j & 1) s.push_back(axes[j]);
        out.push_back(std::move(s));
    }
    return out;
}

AtomKind b_kind(AtomMode mode) { return mode == AtomMode::local ? AtomKind::localB : AtomKind::B; }

// Cube of side s placed against the walls so that a Whitney piece S stays a B-atom.
Cube piece_cube(const Cube& D, const Box& S, int n, const Atom& parent, AtomMode mode)
{
    const int d = D.dim();
    auto I1n = with(parent.I1, n);
    auto valid = [&](const Cube& c) {
        if (!c.box().contains(S)) return false;
        for (int i : parent.I0)
            if (c.corner[i] < Rational(0)) return false;
        if (mode == AtomMode::local && Rational(1) < c.side) {
            for (int i : I1n)
                if (c.corner[i] < Rational(0)) return false;
            return true;
        }
        bool outside = false;
        for (int i : I1n) {
            if (dilated_lo(c, i, Rational(2)) < Rational(0)) return false;
            if (dilated_lo(c, i, Rational(4)) < Rational(0)) outside = true;
        }
        return outside;
    };
    if (valid(D)) return D;
    Rational t = D.side;
    for (int i : parent.I1) t = min(t, Rational(2) * S.lo[i]);
    RVec corner(d);
    for (int i = 0; i < d; ++i) {
        if (has(I1n, i))
            corner[i] = max(t / Rational(2), S.hi[i] - t);
        else if (has(parent.I0, i))
            corner[i] = max(Rational(0), S.hi[i] - t);
        else
            corner[i] = S.lo[i];
    }
    Cube c(std::move(corner), t);
    if (!valid(c)) throw Error(ErrorCode::invalid_geometry, "no admissible cube for Whitney piece " + S.str());
    return c;
}

Term make_term(Rational w, Atom a) { return Term{std::move(w), std::move(a)}; }

// Concrete classical atoms of E_eta(weight * atom) for one (eta, A/B) atom.
std::vector<Term> extend_atom(const Atom& a, const Rational& w, const OrthoChamber& chamber,
                              std::optional<ExtensionRecord>& record)
{
    const int d = a.dim();
    std::vector<Term> out;
    const bool local = is_local(a.kind);
    const AtomKind classical = local ? AtomKind::localClassical : AtomKind::classical;
    const bool reflect_only = a.kind == AtomKind::A || a.kind == AtomKind::localA ||
                              a.kind == AtomKind::classical || a.kind == AtomKind::localClassical ||
                              (local && Rational(1) < a.cube.side);
    if (reflect_only) {
        for (const auto& flipped : subsets(chamber.axes())) {
            auto signs = flip_signs(d, flipped);
            Atom c{a.payload.compose_flip(signs), a.gain_sq, flip_cube(a.cube, signs), {}, {}, classical};
            out.push_back(make_term(w * Rational(eta_of(chamber, flipped)), std::move(c)));
        }
        return out;
    }
    std::vector<int> J;
    for (int j : a.I1)
        if (dilated_lo(a.cube, j, Rational(4)) < Rational(0)) J.push_back(j);
    if (J.empty()) throw Error(ErrorCode::invalid_input, "B-atom with 4Q inside every minus wall");
    std::vector<Cell> terms;
    for (const auto& flipped : subsets(J)) {
        Rational s(flipped.size() % 2 ? -1 : 1);
        PCFunction image = a.payload.compose_flip(flip_signs(d, flipped));
        for (const auto& c : image.cells())
            terms.push_back(Cell{c.box, c.value * Scalar(s)});
    }
    Box window = a.payload.window();
    for (int j : J) window = window.hull(window.reflect(j));
    PCFunction PJ = PCFunction::from_terms(window, std::move(terms));
    Rational L(0);
    for (int j : J) L = max(L, Rational(2) * (a.cube.corner[j] + a.cube.side));
    RVec corner = a.cube.corner;
    for (int j : J) corner[j] = -L / Rational(2);
    Cube QJ(std::move(corner), L);
    Rational nsq = exact_value(PJ.l2_squared(), "payload");
    record = ExtensionRecord{0, J, QJ.volume() / a.cube.volume(), PJ.integral() == Scalar(Rational(0))};
    if (nsq.is_zero()) return out;
    Rational gain = Rational(1) / (QJ.volume() * nsq);
    std::vector<int> rest;
    for (int ax : chamber.axes())
        if (!has(J, ax)) rest.push_back(ax);
    for (const auto& flipped : subsets(rest)) {
        auto signs = flip_signs(d, flipped);
        Atom c{PJ.compose_flip(signs), gain, flip_cube(QJ, signs), {}, {}, classical};
        out.push_back(make_term(w * Rational(eta_of(chamber, flipped)), std::move(c)));
    }
    return out;
}

// Closed form of sum over members D of 2^(-|J(D)|/2) |D|, with J(D) the walls at distance l(D).
long double family_J_mass(const WhitneyFamily& f)
{
    const int d = f.box.dim();
    long double free_volume = 1;
    std::vector<long double> u;
    for (int a = 0; a < d; ++a) {
        if (has(f.walls, a))
            u.push_back(static_cast<long double>(f.box.hi[a].to_double()));
        else
            free_volume *= static_cast<long double>(f.box.width(a).to_double());
    }
    const long double r = 1.0L / std::sqrt(2.0L);
    long double umin = *std::min_element(u.begin(), u.end());
    long double umax = *std::max_element(u.begin(), u.end());
    auto level_term = [&](long double s) {
        long double with_r = 1, without = 1;
        for (long double ui : u) {
            long double a = std::clamp(ui - s, 0.0L, s);
            long double b = std::max(ui - 2 * s, 0.0L);
            with_r *= b + r * a;
            without *= b;
        }
        return with_r - without;
    };
    long double total = 0;
    long double s = std::exp2(std::ceil(std::log2(umax)));
    while (s > umin / 2) {
        total += level_term(s);
        s /= 2;
    }
    // Below umin/2 the level term is a polynomial in s without constant term; sum each power geometrically.
    std::vector<long double> p1{1}, p2{1};
    for (long double ui : u) {
        std::vector<long double> n1(p1.size() + 1, 0), n2(p2.size() + 1, 0);
        for (std::size_t k = 0; k < p1.size(); ++k) {
            n1[k] += p1[k] * ui;
            n1[k + 1] -= p1[k] * (2 - r);
            n2[k] += p2[k] * ui;
            n2[k + 1] -= p2[k] * 2;
        }
        p1 = std::move(n1);
        p2 = std::move(n2);
    }
    for (std::size_t k = 1; k < p1.size(); ++k)
        total += (p1[k] - p2[k]) * std::pow(s, static_cast<long double>(k)) / (1 - std::exp2(-static_cast<long double>(k)));
    return total * free_volume;
}

} // namespace

const char* to_string(AtomKind k)
{
    switch (k) {
    case AtomKind::A: return "A";
    case AtomKind::B: return "B";
    case AtomKind::localA: return "localA";
    case AtomKind::localB: return "localB";
    case AtomKind::classical: return "classical";
    case AtomKind::localClassical: return "localClassical";
    }
    return "?";
}

const char* to_string(AtomMode m) { return m == AtomMode::global ? "global" : "local"; }

AtomKind atom_kind_from_string(const std::string& s)
{
    for (auto k : {AtomKind::A, AtomKind::B, AtomKind::localA, AtomKind::localB, AtomKind::classical,
                   AtomKind::localClassical})
        if (s == to_string(k)) return k;
    throw Error(ErrorCode::invalid_input, "unknown atom kind '" + s + "'");
}

AtomMode atom_mode_from_string(const std::string& s)
{
    if (s == "global") return AtomMode::global;
    if (s == "local") return AtomMode::local;
    throw Error(ErrorCode::invalid_input, "mode must be 'global' or 'local', got '" + s + "'");
}

bool is_local(AtomKind k)
{
    return k == AtomKind::localA || k == AtomKind::localB || k == AtomKind::localClassical;
}

Rational Atom::norm_sq() const { return gain_sq * exact_value(payload.l2_squared(), "atom payload"); }

int WhitneyFamily::first_level() const
{
    int m = dyadic_level(box).value_or(0);
    Rational umin(-1);
    for (int a : walls) umin = umin < Rational(0) ? box.hi[a] : min(umin, box.hi[a]);
    while (umin / Rational(2) < Rational::pow2(-m)) ++m;
    return m;
}

std::vector<Cube> WhitneyFamily::members(int level) const
{
    const int d = box.dim();
    const Rational s = Rational::pow2(-level);
    std::vector<long long> first(d), last(d);
    for (int a = 0; a < d; ++a) {
        Rational lo = has(walls, a) ? s : box.lo[a];
        first[a] = (lo / s).ceil();
        last[a] = (box.hi[a] / s).floor() - 1;
        if (last[a] < first[a]) return {};
    }
    std::vector<Cube> out;
    std::vector<long long> idx = first;
    while (true) {
        bool touches = false;
        for (int a : walls) touches = touches || idx[a] == 1;
        if (touches) {
            RVec corner(d);
            for (int a = 0; a < d; ++a) corner[a] = Rational(idx[a]) * s;
            out.emplace_back(std::move(corner), s);
        }
        int a = d - 1;
        while (a >= 0 && ++idx[a] > last[a]) {
            idx[a] = first[a];
            --a;
        }
        if (a < 0) break;
    }
    return out;
}

Atom WhitneyFamily::member_atom(const Cube& D) const
{
    Rational v = D.volume();
    return Atom{PCFunction::indicator(box, D.box()), Rational(1) / (v * v), D, I0, I1, member_kind};
}

double Term::coefficient() const
{
    if (const auto* a = std::get_if<Atom>(&body)) {
        double c = sqrt_ratio(Rational(1), a->gain_sq) * std::abs(weight.to_double());
        return weight.sign() < 0 ? -c : c;
    }
    return weight.to_double();
}

double Term::l1() const
{
    if (std::holds_alternative<Atom>(body)) return std::abs(coefficient());
    if (const auto* f = std::get_if<WhitneyFamily>(&body)) return std::abs(weight.to_double()) * f->box.volume().to_double();
    const auto& e = std::get<ExtendedFamily>(body);
    const int d = e.source.box.dim();
    return static_cast<double>(std::abs(weight.to_double()) * std::exp2(static_cast<long double>(d + e.chamber.k())) *
                               family_J_mass(e.source));
}

double AtomList::l1() const
{
    double s = 0;
    for (const auto& t : terms) s += t.l1();
    return s;
}

PCFunction AtomList::reconstruct() const
{
    std::vector<Cell> cells;
    Box w = window;
    for (const auto& t : terms) {
        if (const auto* a = std::get_if<Atom>(&t.body)) {
            for (const auto& c : a->payload.cells()) cells.push_back(Cell{c.box, c.value * Scalar(t.weight)});
            w = w.hull(a->payload.window());
        } else if (const auto* f = std::get_if<WhitneyFamily>(&t.body)) {
            cells.push_back(Cell{f->box, Scalar(t.weight)});
        } else {
            const auto& e = std::get<ExtendedFamily>(t.body);
            for (std::size_t g = 0; g < e.chamber.order(); ++g) {
                Box b = e.source.box.flip(e.chamber.signs(g));
                cells.push_back(Cell{b, Scalar(t.weight * Rational(e.chamber.eta(g)))});
                w = w.hull(b);
            }
        }
    }
    return PCFunction::from_terms(w, std::move(cells));
}

AtomValidation validate_atom(const Atom& atom, AtomMode mode)
{
    const Cube& Q = atom.cube;
    const int d = Q.dim();
    if (atom.payload.dim() != d) return fail("dimension", "payload and cube dimensions differ");
    if (!atom.payload.is_exact()) return fail("exact", "payload must use exact values");
    if (!(Rational(0) < Q.side)) return fail("cube", "side must be positive");
    if (!(Rational(0) < atom.gain_sq)) return fail("scale", "gain_sq must be positive");
    Box qb = Q.box();
    for (const auto& c : atom.payload.cells())
        if (!c.value.is_zero() && !qb.contains(c.box))
            return fail("support", "cell " + c.box.str() + " is not inside Q = " + qb.str());
    for (int i : united(atom.I0, atom.I1))
        if (Q.corner[i] < Rational(0))
            return fail("cone", "Q leaves the half-space x_" + std::to_string(i) + " >= 0 (lo = " + Q.corner[i].str() + ")");
    Rational nsq = atom.norm_sq();
    if (Rational(1) / Q.volume() < nsq)
        return fail("size", "||a||_2^2 = " + nsq.str() + " exceeds |Q|^-1 = " + (Rational(1) / Q.volume()).str());
    Rational l1 = exact_value(atom.payload.l1(), "payload");
    if (Rational(1) < atom.gain_sq * l1 * l1) return fail("l1", "||a||_1^2 = " + (atom.gain_sq * l1 * l1).str() + " exceeds 1");
    const bool local_kind = is_local(atom.kind);
    if (local_kind != (mode == AtomMode::local))
        return fail("kind", std::string("kind ") + to_string(atom.kind) + " does not belong to " + to_string(mode) + " mode");
    const bool big = Rational(1) < Q.side;
    auto mean_zero = [&]() -> AtomValidation {
        Scalar m = atom.payload.integral();
        if (!m.is_zero()) return fail("mean", "integral of the payload is " + m.str());
        return {};
    };
    auto a_clause = [&]() -> AtomValidation {
        for (int i : atom.I1)
            if (dilated_lo(Q, i, Rational(4)) < Rational(0))
                return fail("4Q", "4Q crosses the wall x_" + std::to_string(i) + " = 0");
        return mean_zero();
    };
    auto b_clause = [&]() -> AtomValidation {
        bool outside = false;
        for (int i : atom.I1) {
            if (dilated_lo(Q, i, Rational(2)) < Rational(0))
                return fail("2Q", "2Q crosses the wall x_" + std::to_string(i) + " = 0");
            if (dilated_lo(Q, i, Rational(4)) < Rational(0)) outside = true;
        }
        if (!outside) return fail("4Q", "4Q lies inside every wall of I1 = " + list_str(atom.I1));
        return {};
    };
    switch (atom.kind) {
    case AtomKind::A: return a_clause();
    case AtomKind::B: return b_clause();
    case AtomKind::localA:
        if (big) return fail("side", "local A-atom with l(Q) = " + Q.side.str() + " > 1");
        return a_clause();
    case AtomKind::localB: return big ? AtomValidation{} : b_clause();
    case AtomKind::classical: return mean_zero();
    case AtomKind::localClassical: return big ? AtomValidation{} : mean_zero();
    }
    return {};
}

AtomValidation validate_family(const WhitneyFamily& f, AtomMode mode, int levels)
{
    if (f.walls.empty()) return fail("family", "no walls");
    for (int a : f.walls) {
        if (!has(f.I1, a)) return fail("family", "wall " + std::to_string(a) + " is not in I1");
        if (!f.box.lo[a].is_zero()) return fail("family", "box does not start at the wall x_" + std::to_string(a));
    }
    const int first = f.first_level();
    for (int a : f.I1)
        if (!has(f.walls, a) && f.box.lo[a] < Rational::pow2(1 - first))
            return fail("family", "box is too close to the wall x_" + std::to_string(a));
    for (int m = first; m < first + levels; ++m)
        for (const auto& D : f.members(m)) {
            auto v = validate_atom(f.member_atom(D), mode);
            if (!v.ok) return fail("member " + D.str() + ": " + v.clause, v.detail);
        }
    return {};
}

Atom as_large_local_atom(const Atom& a)
{
    const int d = a.dim();
    if (Rational(1) < a.norm_sq()) throw Error(ErrorCode::invalid_argument, "||a||_2 exceeds 1");
    auto support = a.payload.canonical().support_box();
    if (!support) throw Error(ErrorCode::invalid_argument, "atom has empty support");
    for (int i = 0; i < d; ++i)
        if (!(support->width(i) < Rational(1))) throw Error(ErrorCode::invalid_argument, "support does not fit in a cube of side < 1");
    Atom b = a;
    b.cube = Cube(support->lo, Rational(2));
    b.gain_sq = a.gain_sq * Rational::pow2(-d);
    b.kind = AtomKind::localB;
    return b;
}

AtomList even_restrict(const AtomList& list, int e)
{
    const int d = list.dim();
    if (e < 0 || e >= d) throw Error(ErrorCode::invalid_argument, "axis out of range");
    auto sigma = flip_signs(d, {e});
    PCFunction F = list.reconstruct();
    if (!F.compose_flip(sigma).equals(F)) throw Error(ErrorCode::invalid_input, "input is not even across x_" + std::to_string(e) + " = 0");
    AtomList out{list.window, list.mode, list.eta, {}};
    for (const auto& t : list.terms) {
        if (!t.is_atom()) throw Error(ErrorCode::invalid_input, "even_restrict takes concrete atoms only");
        const Atom& a = t.atom();
        const Rational lo = a.cube.corner[e], hi = lo + a.cube.side;
        if (Rational(0) <= lo) {
            Atom b = a;
            b.gain_sq = a.gain_sq / Rational(4);
            out.terms.push_back(make_term(t.weight / Rational(2), std::move(b)));
        } else if (hi <= Rational(0)) {
            Atom b{a.payload.compose_flip(sigma), a.gain_sq / Rational(4), flip_cube(a.cube, sigma), a.I0, a.I1, a.kind};
            out.terms.push_back(make_term(t.weight / Rational(2), std::move(b)));
        } else {
            PCFunction sym = (a.payload + a.payload.compose_flip(sigma)).halfspace(e, true).scaled(Scalar(Rational(1, 2)));
            if (sym.canonical().size() == 0) continue;
            RVec corner = a.cube.corner;
            corner[e] = Rational(0);
            Atom b{sym.with_window(a.payload.window().hull(sym.window())), a.gain_sq, Cube(corner, a.cube.side), a.I0, a.I1,
                   a.kind};
            out.terms.push_back(make_term(t.weight, std::move(b)));
        }
    }
    return out;
}

AtomList odd_extend(const AtomList& list, int e)
{
    const int d = list.dim();
    if (e < 0 || e >= d) throw Error(ErrorCode::invalid_argument, "axis out of range");
    auto sigma = flip_signs(d, {e});
    AtomList out{list.window.hull(list.window.reflect(e)), list.mode, list.eta, {}};
    for (const auto& t : list.terms) {
        if (!t.is_atom()) throw Error(ErrorCode::invalid_input, "odd_extend takes concrete atoms only");
        const Atom& a = t.atom();
        const Rational lo = a.cube.corner[e], l = a.cube.side, hi = lo + l;
        if (hi <= Rational(0)) continue;
        if (Rational(0) <= lo) {
            out.terms.push_back(t);
            Atom r{a.payload.compose_flip(sigma), a.gain_sq, flip_cube(a.cube, sigma), a.I0, a.I1, a.kind};
            out.terms.push_back(make_term(-t.weight, std::move(r)));
            continue;
        }
        PCFunction plus = a.payload.halfspace(e, true);
        PCFunction odd = plus - plus.compose_flip(sigma);
        if (odd.canonical().size() == 0) continue;
        RVec corner(d);
        for (int i = 0; i < d; ++i) corner[i] = i == e ? -l : a.cube.corner[i] - l / Rational(2);
        Atom b{odd, a.gain_sq * Rational::pow2(-(2 + d)), Cube(corner, Rational(2) * l), a.I0, a.I1, a.kind};
        out.terms.push_back(make_term(t.weight, std::move(b)));
    }
    return out;
}

int whitney_base_level(const Cube& Q) { return -ceil_log2(Q.side); }

std::vector<WhitneyCell> whitney_cells(const Cube& Q, int n, const std::vector<int>& walls, int max_level)
{
    const int d = Q.dim();
    if (n < 0 || n >= d || has(walls, n)) throw Error(ErrorCode::invalid_geometry, "split axis must be a fresh axis");
    for (int i : walls)
        if (Q.corner[i] < Rational(0)) throw Error(ErrorCode::invalid_geometry, "Q leaves the ambient cone");
    if (!(Rational(0) < Q.corner[n] + Q.side)) throw Error(ErrorCode::invalid_geometry, "Q misses the half-space");
    if (!(dilated_lo(Q, n, Rational(2)) < Rational(0)))
        throw Error(ErrorCode::invalid_geometry, "2Q already lies in the half-space");
    Box S = *Q.box().clip(n, true);
    std::vector<WhitneyCell> out;
    for (int m = whitney_base_level(Q); m <= max_level; ++m) {
        const Rational s = Rational::pow2(-m);
        if (!(max(s, S.lo[n]) < min(Rational(2) * s, S.hi[n]))) continue;
        std::vector<long long> first(d), last(d);
        for (int a = 0; a < d; ++a) {
            if (a == n) {
                first[a] = last[a] = 1;
                continue;
            }
            first[a] = (S.lo[a] / s).floor();
            last[a] = (S.hi[a] / s).ceil() - 1;
        }
        std::vector<long long> idx = first;
        while (true) {
            RVec corner(d);
            for (int a = 0; a < d; ++a) corner[a] = Rational(idx[a]) * s;
            out.push_back(WhitneyCell{m, Cube(std::move(corner), s)});
            int a = d - 1;
            while (a >= 0 && ++idx[a] > last[a]) {
                idx[a] = first[a];
                --a;
            }
            if (a < 0) break;
        }
    }
    return out;
}

SplitOutcome split_term(const Term& term, int n, AtomMode mode)
{
    SplitOutcome out;
    if (const auto* f = std::get_if<WhitneyFamily>(&term.body)) {
        if (f->box.hi[n] <= Rational(0)) {
            out.split_case = SplitCase::dropped;
            return out;
        }
        WhitneyFamily g = *f;
        g.I1 = with(g.I1, n);
        if (Rational(0) < f->box.lo[n]) {
            if (f->box.lo[n] < Rational::pow2(1 - f->first_level()))
                throw Error(ErrorCode::invalid_argument, "family box too close to the split hyperplane");
            out.split_case = SplitCase::inside;
        } else {
            g.box = *f->box.clip(n, true);
            g.walls = with(g.walls, n);
            out.split_case = SplitCase::family;
        }
        Term t{term.weight, g};
        out.emitted_l1 = t.l1();
        out.terms.push_back(std::move(t));
        return out;
    }
    if (!term.is_atom()) throw Error(ErrorCode::invalid_argument, "extended families cannot be split");
    const Atom& a = term.atom();
    const Rational lo = a.cube.corner[n], l = a.cube.side, hi = lo + l;
    auto I1n = with(a.I1, n);
    auto passthrough = [&](AtomKind kind) {
        Atom b = a;
        b.I1 = I1n;
        b.kind = kind;
        out.terms.push_back(make_term(term.weight, std::move(b)));
        out.emitted_l1 = std::abs(term.coefficient());
    };
    if (hi <= Rational(0)) {
        out.split_case = SplitCase::dropped;
        return out;
    }
    if (Rational(0) <= dilated_lo(a.cube, n, Rational(4))) {
        out.split_case = SplitCase::inside;
        passthrough(a.kind);
        return out;
    }
    if (Rational(0) <= dilated_lo(a.cube, n, Rational(2))) {
        out.split_case = SplitCase::becomes_b;
        passthrough(b_kind(mode));
        return out;
    }
    out.split_case = SplitCase::straddling;
    PCFunction plus = a.payload.halfspace(n, true);
    if (mode == AtomMode::local && Rational(1) < l) {
        if (plus.canonical().size() == 0) return out;
        RVec corner = a.cube.corner;
        corner[n] = max(lo, Rational(0));
        Atom b{plus, a.gain_sq, Cube(corner, l), a.I0, I1n, AtomKind::localB};
        out.terms.push_back(make_term(term.weight, std::move(b)));
        out.emitted_l1 = std::abs(out.terms.back().coefficient());
        return out;
    }
    auto payload_level = a.payload.finest_level();
    auto cube_level = dyadic_level(a.cube.box());
    if (!payload_level || !cube_level)
        throw Error(ErrorCode::invalid_argument, "Whitney splitting needs dyadic payload cells and cube corners");
    const int m0 = whitney_base_level(a.cube);
    const int M = std::max({m0, *payload_level, *cube_level});
    const Box Qplus = *a.cube.box().clip(n, true);
    for (const auto& cell : whitney_cells(a.cube, n, united(a.I0, a.I1), M)) {
        Box Dbox = cell.cube.box();
        PCFunction piece = plus.restrict_to(Dbox);
        Rational nsq = exact_value(piece.l2_squared(), "payload");
        if (nsq.is_zero()) continue;
        Box S = *Qplus.intersect(Dbox);
        Cube q = piece_cube(cell.cube, S, n, a, mode);
        Rational gain = Rational(1) / (cell.cube.volume() * nsq);
        Atom b{std::move(piece), gain, q, a.I0, I1n, b_kind(mode)};
        Term t = make_term(term.weight, std::move(b));
        out.emitted_l1 += std::abs(t.coefficient());
        out.terms.push_back(std::move(t));
    }
    const Rational strip = Rational::pow2(-M);
    for (const auto& c : plus.cells()) {
        if (c.value.is_zero() || !c.box.lo[n].is_zero()) continue;
        Box B = c.box;
        B.hi[n] = min(B.hi[n], strip);
        WhitneyFamily f{B, {n}, a.I0, I1n, b_kind(mode)};
        Term t{term.weight * exact_value(c.value, "payload"), f};
        out.emitted_l1 += t.l1();
        out.terms.push_back(std::move(t));
    }
    return out;
}

AtomList halfspace_split(const AtomList& list, int n, AtomMode mode)
{
    const int d = list.dim();
    if (n < 0 || n >= d) throw Error(ErrorCode::invalid_argument, "split axis out of range");
    for (std::size_t i = 0; i < list.terms.size(); ++i) {
        const auto& t = list.terms[i];
        const std::vector<int>* I0 = nullptr;
        const std::vector<int>* I1 = nullptr;
        if (const auto* a = std::get_if<Atom>(&t.body)) {
            I0 = &a->I0;
            I1 = &a->I1;
        } else if (const auto* f = std::get_if<WhitneyFamily>(&t.body)) {
            I0 = &f->I0;
            I1 = &f->I1;
        } else {
            throw Error(ErrorCode::invalid_argument, "term " + std::to_string(i) + " is already extended");
        }
        if (has(*I0, n) || has(*I1, n))
            throw Error(ErrorCode::invalid_argument,
                        "axis " + std::to_string(n) + " is already a wall of term " + std::to_string(i));
    }
    std::vector<SplitOutcome> outcomes(list.terms.size());
    parallel_for(list.terms.size(), [&](std::size_t i) { outcomes[i] = split_term(list.terms[i], n, mode); }, 4);
    AtomList out{list.window, mode, list.eta, {}};
    for (auto& o : outcomes)
        for (auto& t : o.terms) out.terms.push_back(std::move(t));
    return out;
}

double decomposition_constant(int d, int k)
{
    double cd = std::sqrt(std::exp2(d) * (std::exp2(d) - 1));
    return std::pow(1 + cd, k);
}

Decomposition decompose_eta(const AtomList& list, const OrthoChamber& chamber, AtomMode mode)
{
    const int d = list.dim();
    if (chamber.dim() != d) throw Error(ErrorCode::invalid_argument, "chamber dimension does not match");
    auto plus = chamber.plus_axes();
    std::sort(plus.begin(), plus.end());
    Decomposition out;
    out.atoms = AtomList{list.window, mode, chamber.eta_bits(), {}};
    for (std::size_t i = 0; i < list.terms.size(); ++i) {
        const auto& t = list.terms[i];
        if (!t.is_atom()) throw Error(ErrorCode::invalid_input, "term " + std::to_string(i) + " is not a concrete atom");
        Atom a = t.atom();
        if (a.kind != AtomKind::classical && a.kind != AtomKind::localClassical)
            throw Error(ErrorCode::invalid_input, "term " + std::to_string(i) + " is not a classical atom");
        for (int p : plus)
            if (a.cube.corner[p] < Rational(0))
                throw Error(ErrorCode::invalid_input,
                            "atom " + std::to_string(i) + " leaves the half-space x_" + std::to_string(p) + " >= 0");
        a.I0 = plus;
        a.I1.clear();
        if (mode == AtomMode::global)
            a.kind = AtomKind::A;
        else
            a.kind = Rational(1) < a.cube.side ? AtomKind::localB : AtomKind::localA;
        out.atoms.terms.push_back(make_term(t.weight, std::move(a)));
    }
    out.l1_in = list.l1();
    auto minus = chamber.minus_axes();
    std::sort(minus.begin(), minus.end());
    for (int n : minus) {
        out.atoms = halfspace_split(out.atoms, n, mode);
        out.step_l1.push_back(out.atoms.l1());
    }
    out.l1_out = out.atoms.l1();
    out.constant = decomposition_constant(d, chamber.k());
    return out;
}

Extension extend_atoms(const AtomList& list, const OrthoChamber& chamber)
{
    Extension out;
    out.atoms = AtomList{chamber.symmetric_hull(list.window), list.mode, chamber.eta_bits(), {}};
    for (std::size_t i = 0; i < list.terms.size(); ++i) {
        const auto& t = list.terms[i];
        if (const auto* f = std::get_if<WhitneyFamily>(&t.body)) {
            out.atoms.terms.push_back(Term{t.weight, ExtendedFamily{*f, chamber}});
            continue;
        }
        if (!t.is_atom()) throw Error(ErrorCode::invalid_input, "term " + std::to_string(i) + " is already extended");
        auto v = validate_atom(t.atom(), list.mode);
        if (!v.ok) throw Error(ErrorCode::invalid_input, "term " + std::to_string(i) + ": " + v.clause + ": " + v.detail);
        std::optional<ExtensionRecord> rec;
        for (auto& e : extend_atom(t.atom(), t.weight, chamber, rec)) out.atoms.terms.push_back(std::move(e));
        if (rec) {
            rec->term = i;
            out.b_records.push_back(*rec);
        }
    }
    return out;
}

std::vector<Term> extend_family_members(const ExtendedFamily& e, const Rational& weight, int level,
                                        std::vector<ExtensionRecord>* records)
{
    std::vector<Term> out;
    for (const auto& D : e.source.members(level)) {
        std::optional<ExtensionRecord> rec;
        for (auto& t : extend_atom(e.source.member_atom(D), weight, e.chamber, rec)) out.push_back(std::move(t));
        if (rec && records) records->push_back(*rec);
    }
    return out;
}

} // namespace etahardy
