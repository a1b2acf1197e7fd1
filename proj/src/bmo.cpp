#include "etahardy/bmo.hpp"

#include "etahardy/error.hpp"
#include "etahardy/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace etahardy {

namespace {

struct Prepared {
    int d = 0;
    std::vector<Vec> lo, hi;
    std::vector<double> value;
    CellIndex index;
    std::optional<Box> hull;
};

Prepared prepare(const PCFunction& F)
{
    Prepared p;
    p.d = F.dim();
    std::vector<Cell> kept;
    for (const auto& c : F.cells())
        if (!c.value.is_zero()) kept.push_back(c);
    for (const auto& c : kept) {
        Vec l(p.d), h(p.d);
        for (int a = 0; a < p.d; ++a) {
            l[a] = c.box.lo[a].to_double();
            h[a] = c.box.hi[a].to_double();
        }
        p.lo.push_back(std::move(l));
        p.hi.push_back(std::move(h));
        p.value.push_back(c.value.to_double());
        p.hull = p.hull ? p.hull->hull(c.box) : c.box;
    }
    p.index = CellIndex(kept);
    return p;
}

struct Part {
    double value;
    double weight;
};

struct Stats {
    double volume = 0;
    double zero = 0;
    std::vector<Part> parts;
};

void gather(const Prepared& p, const Vec& qlo, const Vec& qhi, Stats& s)
{
    s.parts.clear();
    s.volume = 1;
    for (int a = 0; a < p.d; ++a) s.volume *= qhi[a] - qlo[a];
    double covered = 0;
    if (p.hull) {
        for (std::size_t i : p.index.query(qlo, qhi)) {
            double w = 1;
            for (int a = 0; a < p.d && w > 0; ++a) w *= std::min(qhi[a], p.hi[i][a]) - std::max(qlo[a], p.lo[i][a]);
            if (w <= 0) continue;
            s.parts.push_back(Part{p.value[i], w});
            covered += w;
        }
    }
    s.zero = s.volume - covered > 1e-12 * s.volume ? s.volume - covered : 0.0;
}

double mean_of(const Stats& s)
{
    double m = 0;
    for (const auto& q : s.parts) m += q.value * q.weight;
    return m / s.volume;
}

double deviation(const Stats& s, double c)
{
    double t = s.zero * std::abs(c);
    for (const auto& q : s.parts) t += std::abs(q.value - c) * q.weight;
    return t / s.volume;
}

double weighted_median(Stats& s)
{
    auto& v = s.parts;
    if (s.zero > 0) v.push_back(Part{0.0, s.zero});
    std::sort(v.begin(), v.end(), [](const Part& a, const Part& b) { return a.value < b.value; });
    double total = 0;
    for (const auto& q : v) total += q.weight;
    double acc = 0, c = 0;
    for (const auto& q : v) {
        acc += q.weight;
        if (acc >= total / 2) {
            c = q.value;
            break;
        }
    }
    if (s.zero > 0) {
        auto it = std::find_if(v.begin(), v.end(), [&](const Part& q) { return q.value == 0.0 && q.weight == s.zero; });
        v.erase(it);
    }
    return c;
}

double osc(Stats& s, Centering c)
{
    if (s.parts.empty()) return 0;
    if (s.zero == 0 && std::all_of(s.parts.begin(), s.parts.end(), [&](const Part& q) { return q.value == s.parts[0].value; }))
        return 0;
    return deviation(s, c == Centering::mean ? mean_of(s) : weighted_median(s));
}

double mean_abs_of(const Stats& s)
{
    double t = 0;
    for (const auto& q : s.parts) t += std::abs(q.value) * q.weight;
    return t / s.volume;
}

struct Block {
    int level = 0;
    std::vector<int> shift;
    Rational side;
    RVec offset;
    double side_d = 0;
    Vec offset_d;
    std::vector<long long> first, count;
    std::size_t total = 0;
};

std::vector<Block> make_blocks(const CubeFamily& f, const std::optional<Box>& focus)
{
    const int d = f.dim();
    std::vector<Block> out;
    const std::size_t ns = f.shifts.size();
    std::size_t combos = 1;
    for (int a = 0; a < d; ++a) combos *= ns;
    for (int m = f.min_level; m <= f.max_level; ++m) {
        const Rational s = Rational::pow2(-m);
        if (f.shorter_than && !(s < *f.shorter_than)) continue;
        if (f.at_least && s < *f.at_least) continue;
        for (std::size_t c = 0; c < combos; ++c) {
            Block b;
            b.level = m;
            b.side = s;
            b.side_d = s.to_double();
            b.shift.resize(d);
            std::size_t rest = c;
            for (int a = d - 1; a >= 0; --a) {
                b.shift[a] = static_cast<int>(rest % ns);
                rest /= ns;
            }
            b.offset.resize(d);
            b.offset_d.resize(d);
            b.first.resize(d);
            b.count.resize(d);
            b.total = 1;
            for (int a = 0; a < d; ++a) {
                const Rational off = f.shifts[b.shift[a]] * s;
                b.offset[a] = off;
                b.offset_d[a] = off.to_double();
                long long lo = ((f.window.lo[a] - off) / s).ceil();
                long long hi = ((f.window.hi[a] - off) / s).floor() - 1;
                if (f.chamber) {
                    const auto& axes = f.chamber->axes();
                    if (std::find(axes.begin(), axes.end(), a) != axes.end()) lo = std::max(lo, (-off / s).ceil());
                }
                if (focus) {
                    lo = std::max(lo, ((focus->lo[a] - off) / s).floor());
                    hi = std::min(hi, ((focus->hi[a] - off) / s).ceil() - 1);
                }
                b.first[a] = lo;
                b.count[a] = std::max(0LL, hi - lo + 1);
                b.total *= static_cast<std::size_t>(b.count[a]);
            }
            if (b.total > 0) out.push_back(std::move(b));
        }
    }
    return out;
}

void decode(const Block& b, std::size_t flat, std::vector<long long>& idx)
{
    const int d = static_cast<int>(b.first.size());
    idx.resize(d);
    for (int a = d - 1; a >= 0; --a) {
        idx[a] = b.first[a] + static_cast<long long>(flat % static_cast<std::size_t>(b.count[a]));
        flat /= static_cast<std::size_t>(b.count[a]);
    }
}

FamilyCube family_cube(const Block& b, std::size_t flat)
{
    std::vector<long long> idx;
    decode(b, flat, idx);
    RVec corner(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) corner[a] = Rational(idx[a]) * b.side + b.offset[a];
    return FamilyCube{Cube(std::move(corner), b.side), b.level, b.shift};
}

double wall_distance(double lo, double side)
{
    if (lo <= 0 && 0 <= lo + side) return 0;
    return std::min(std::abs(lo), std::abs(lo + side));
}

bool adjacent(const Vec& lo, double side, const std::vector<int>& axes, double kappa)
{
    for (int a : axes)
        if (wall_distance(lo[a], side) <= kappa * side) return true;
    return false;
}

struct Pick {
    double value = -1;
    std::size_t block = 0;
    std::size_t flat = 0;
};

// Float evaluation turns exact ties into near-ties; those keep the earlier cube.
bool improves(double candidate, double incumbent)
{
    return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

// Scores every cube of the family with up to two channels (negative = not scored) and
// returns the first maximiser of each channel in enumeration order.
template <class Score>
std::array<Pick, 2> scan(const Prepared& p, const CubeFamily& family, const std::vector<Block>& blocks, Score score)
{
    std::array<Pick, 2> best;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& b = blocks[bi];
        const std::size_t chunk = 4096;
        const std::size_t nchunks = (b.total + chunk - 1) / chunk;
        std::vector<std::array<Pick, 2>> partial(nchunks);
        parallel_for(
            nchunks,
            [&](std::size_t c) {
                Stats s;
                std::vector<long long> idx;
                Vec lo(p.d), hi(p.d);
                auto& out = partial[c];
                const std::size_t end = std::min(b.total, (c + 1) * chunk);
                for (std::size_t flat = c * chunk; flat < end; ++flat) {
                    decode(b, flat, idx);
                    for (int a = 0; a < p.d; ++a) {
                        lo[a] = static_cast<double>(idx[a]) * b.side_d + b.offset_d[a];
                        hi[a] = lo[a] + b.side_d;
                    }
                    auto v = score(b, lo, hi, s);
                    for (int k = 0; k < 2; ++k)
                        if (improves(v[k], out[k].value)) out[k] = Pick{v[k], bi, flat};
                }
            },
            1);
        for (const auto& part : partial)
            for (int k = 0; k < 2; ++k)
                if (improves(part[k].value, best[k].value)) best[k] = part[k];
    }
    (void)family;
    return best;
}

std::optional<FamilyCube> picked(const std::vector<Block>& blocks, const Pick& p)
{
    if (p.value < 0) return std::nullopt;
    return family_cube(blocks[p.block], p.flat);
}

} // namespace

const char* to_string(Centering c) { return c == Centering::mean ? "mean" : "best"; }

const char* to_string(BmoFlavor f)
{
    switch (f) {
    case BmoFlavor::BMO: return "BMO";
    case BmoFlavor::BMOstar: return "BMO*";
    case BmoFlavor::bmo: return "bmo";
    case BmoFlavor::bmostar: return "bmo*";
    }
    return "?";
}

BmoFlavor bmo_flavor_from_string(const std::string& s)
{
    for (auto f : {BmoFlavor::BMO, BmoFlavor::BMOstar, BmoFlavor::bmo, BmoFlavor::bmostar})
        if (s == to_string(f)) return f;
    throw Error(ErrorCode::invalid_argument, "flavor must be one of BMO, BMO*, bmo, bmo*; got '" + s + "'");
}

Centering centering_of(BmoFlavor f)
{
    return f == BmoFlavor::BMO || f == BmoFlavor::bmo ? Centering::mean : Centering::best;
}

bool is_local(BmoFlavor f) { return f == BmoFlavor::bmo || f == BmoFlavor::bmostar; }

std::string FamilyCube::str() const
{
    std::string s = "level " + std::to_string(level) + " shift (";
    for (std::size_t a = 0; a < shift.size(); ++a) s += (a ? "," : "") + std::to_string(shift[a]);
    return s + ") " + cube.str();
}

CubeFamily CubeFamily::standard(int dim, int max_level)
{
    CubeFamily f;
    f.window = Box::symmetric(dim, Rational(8));
    f.max_level = max_level;
    return f;
}

std::vector<FamilyCube> CubeFamily::cubes(const std::optional<Box>& focus) const
{
    std::vector<FamilyCube> out;
    for (const auto& b : make_blocks(*this, focus))
        for (std::size_t i = 0; i < b.total; ++i) {
            FamilyCube q = family_cube(b, i);
            if (keeps(q)) out.push_back(std::move(q));
        }
    return out;
}

std::size_t CubeFamily::size(const std::optional<Box>& focus) const
{
    if (adjacent_to.empty()) {
        std::size_t n = 0;
        for (const auto& b : make_blocks(*this, focus)) n += b.total;
        return n;
    }
    return cubes(focus).size();
}

bool CubeFamily::keeps(const FamilyCube& q) const
{
    if (!window.contains(q.cube.box())) return false;
    if (shorter_than && !(q.cube.side < *shorter_than)) return false;
    if (at_least && q.cube.side < *at_least) return false;
    if (chamber && !chamber->contains_box(q.cube.box())) return false;
    if (adjacent_to.empty()) return true;
    for (int a : adjacent_to) {
        const Rational lo = q.cube.corner[a], hi = lo + q.cube.side;
        Rational dist = (lo <= Rational(0) && Rational(0) <= hi) ? Rational(0) : min(abs(lo), abs(hi));
        if (dist <= kappa * q.cube.side) return true;
    }
    return false;
}

std::string CubeFamily::str() const
{
    std::string s = "window " + window.str() + ", levels " + std::to_string(min_level) + ".." + std::to_string(max_level) +
                    ", shifts {";
    for (std::size_t i = 0; i < shifts.size(); ++i) s += (i ? "," : "") + shifts[i].str();
    s += "}";
    if (shorter_than) s += ", l < " + shorter_than->str();
    if (at_least) s += ", l >= " + at_least->str();
    if (!adjacent_to.empty()) s += ", adjacency kappa " + kappa.str();
    return s;
}

namespace {

struct ExactParts {
    Scalar volume;
    Scalar zero;
    std::vector<std::pair<Scalar, Scalar>> parts; // value, weight
};

ExactParts exact_parts(const PCFunction& F, const Cube& Q)
{
    Box qb = Q.box();
    auto inside = F.window().intersect(qb);
    if (!inside || inside->volume().is_zero()) throw Error(ErrorCode::empty_cube, "cube " + Q.str() + " misses the window");
    ExactParts e;
    e.volume = Scalar(Q.volume());
    Scalar covered(Rational(0));
    for (const auto& c : F.cells()) {
        auto i = c.box.intersect(qb);
        if (!i || i->volume().is_zero() || c.value.is_zero()) continue;
        Scalar w(i->volume());
        e.parts.emplace_back(c.value, w);
        covered += w;
    }
    e.zero = e.volume - covered;
    return e;
}

} // namespace

Scalar oscillation(const PCFunction& F, const Cube& Q, Centering centering)
{
    ExactParts e = exact_parts(F, Q);
    Scalar c(Rational(0));
    if (centering == Centering::mean) {
        for (const auto& [v, w] : e.parts) c += v * w;
        c = c / e.volume;
    } else {
        auto parts = e.parts;
        if (!e.zero.is_zero()) parts.emplace_back(Scalar(Rational(0)), e.zero);
        std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return less(a.first, b.first); });
        Scalar acc(Rational(0));
        for (const auto& [v, w] : parts) {
            acc += w;
            if (!less(acc * Scalar(Rational(2)), e.volume)) {
                c = v;
                break;
            }
        }
    }
    Scalar t = abs(c) * e.zero;
    for (const auto& [v, w] : e.parts) t += abs(v - c) * w;
    return t / e.volume;
}

Scalar mean_abs(const PCFunction& F, const Cube& Q)
{
    ExactParts e = exact_parts(F, Q);
    Scalar t(Rational(0));
    for (const auto& [v, w] : e.parts) t += abs(v) * w;
    return t / e.volume;
}

BmoReport bmo_norm(const PCFunction& F, const CubeFamily& family, BmoFlavor flavor, const Rational& a)
{
    if (F.dim() != family.dim()) throw Error(ErrorCode::invalid_argument, "function and family dimensions differ");
    if (!(Rational(0) < a)) throw Error(ErrorCode::invalid_argument, "breaking point must be positive");
    Prepared p = prepare(F);
    BmoReport r;
    r.flavor = flavor;
    r.breaking_point = a;
    r.family = family.str();
    if (!p.hull) return r;
    auto blocks = make_blocks(family, p.hull);
    for (const auto& b : blocks) r.cubes += b.total;
    const Centering centering = centering_of(flavor);
    const bool local = is_local(flavor);
    const auto& adj = family.adjacent_to;
    const double kappa = family.kappa.to_double();
    auto best = scan(p, family, blocks, [&](const Block& b, const Vec& lo, const Vec& hi, Stats& s) -> std::array<double, 2> {
        if (!adj.empty() && !adjacent(lo, b.side_d, adj, kappa)) return {-1, -1};
        gather(p, lo, hi, s);
        if (local && !(b.side < a)) return {-1, mean_abs_of(s)};
        return {osc(s, centering), -1};
    });
    r.argmax = picked(blocks, best[0]);
    r.argmax_mean = picked(blocks, best[1]);
    const bool exact = F.is_exact();
    r.oscillation_part = r.argmax && exact ? oscillation(F, r.argmax->cube, centering).to_double() : std::max(0.0, best[0].value);
    r.mean_part = r.argmax_mean && exact ? mean_abs(F, r.argmax_mean->cube).to_double() : std::max(0.0, best[1].value);
    r.value = r.oscillation_part + r.mean_part;
    return r;
}

BmoReport eta_bmo_norm(const PCFunction& f, const OrthoChamber& chamber, const CubeFamily& family, BmoFlavor flavor,
                       const Rational& a)
{
    if (!(chamber.symmetric_hull(family.window) == family.window))
        throw Error(ErrorCode::invalid_argument, "family window must be symmetric under the reflection group");
    PCFunction F = eta_extend(f, chamber);
    BmoReport r = bmo_norm(F, family, flavor, a);
    bool trivial = std::all_of(chamber.eta_bits().begin(), chamber.eta_bits().end(), [](int b) { return b == 0; });
    r.modulo_constants = trivial && !is_local(flavor);
    return r;
}

IntrinsicReport intrinsic_M1_M2(const PCFunction& f, const OrthoChamber& chamber, const CubeFamily& family,
                                IntrinsicMode mode, const Rational& kappa)
{
    if (f.dim() != family.dim() || chamber.dim() != family.dim())
        throw Error(ErrorCode::invalid_argument, "function, chamber and family dimensions differ");
    CubeFamily fam = family;
    fam.chamber = chamber;
    Prepared p = prepare(f);
    IntrinsicReport r;
    if (!p.hull) return r;
    auto blocks = make_blocks(fam, p.hull);
    for (const auto& b : blocks) r.cubes += b.total;
    const auto minus = chamber.minus_axes();
    const double k = kappa.to_double();
    const bool local = mode == IntrinsicMode::local;
    auto best = scan(p, fam, blocks, [&](const Block& b, const Vec& lo, const Vec& hi, Stats& s) -> std::array<double, 2> {
        const bool small = b.side < Rational(1);
        const bool adj = !minus.empty() && adjacent(lo, b.side_d, minus, k);
        const bool m1 = !local || small;
        const bool m2 = local ? (!small || adj) : adj;
        if (!m1 && !m2) return {-1, -1};
        gather(p, lo, hi, s);
        return {m1 ? osc(s, Centering::mean) : -1.0, m2 ? mean_abs_of(s) : -1.0};
    });
    r.argmax1 = picked(blocks, best[0]);
    r.argmax2 = picked(blocks, best[1]);
    const bool exact = f.is_exact();
    r.M1 = r.argmax1 && exact ? oscillation(f, r.argmax1->cube, Centering::mean).to_double() : std::max(0.0, best[0].value);
    r.M2 = r.argmax2 && exact ? mean_abs(f, r.argmax2->cube).to_double() : std::max(0.0, best[1].value);
    return r;
}

PCFunction even_extend_bmo(const PCFunction& F, int axis)
{
    if (axis < 0 || axis >= F.dim()) throw Error(ErrorCode::invalid_argument, "axis out of range");
    std::vector<int> sigma(F.dim(), 1);
    sigma[axis] = -1;
    PCFunction plus = F.halfspace(axis, true);
    Box w = F.window().hull(F.window().reflect(axis));
    return (plus.with_window(w) + plus.compose_flip(sigma).with_window(w)).canonical();
}

PCFunction odd_restrict_bmo(const PCFunction& F, int axis, double tolerance)
{
    if (axis < 0 || axis >= F.dim()) throw Error(ErrorCode::invalid_argument, "axis out of range");
    std::vector<int> sigma(F.dim(), 1);
    sigma[axis] = -1;
    PCFunction mirrored = F.compose_flip(sigma).scaled(Scalar(Rational(-1)));
    bool odd = F.is_exact() ? mirrored.equals(F) : mirrored.max_abs_difference(F) <= tolerance;
    if (!odd) throw Error(ErrorCode::invalid_input, "function is not odd across x_" + std::to_string(axis) + " = 0");
    return F.halfspace(axis, true);
}

namespace {

double log_inverse(double r) { return std::log(1 / r); }

} // namespace

Sample sample_function(const std::string& name, const SampleParams& params)
{
    const int d = params.dim;
    if (d < 1 || d > 3) throw Error(ErrorCode::invalid_argument, "sample dimension must be 1, 2 or 3");
    if (params.level < 0 || params.level > 10) throw Error(ErrorCode::invalid_argument, "sample level must be in 0..10");
    const Rational h = Rational::pow2(-params.level);
    const double hd = h.to_double();
    Box window = params.window.value_or(Box::symmetric(d, Rational(8)));
    std::vector<Cell> cells;
    std::ostringstream desc;

    if (name == "phi") {
        if (d != 1) throw Error(ErrorCode::invalid_argument, "phi is one-dimensional");
        const long long n = (Rational(2) / h).floor();
        for (long long i = 0; i < n; ++i) {
            Rational lo = Rational(1) + Rational(i) * h;
            double centre = (lo + h / Rational(2)).to_double();
            double dist = std::abs(centre - 2);
            bool touches = lo == Rational(2) || lo + h == Rational(2);
            double v = log_inverse(touches ? hd / 4 : dist);
            if (v == 0) continue;
            cells.push_back(Cell{Box(RVec{lo}, RVec{lo + h}), Scalar(v)});
            cells.push_back(Cell{Box(RVec{-(lo + h)}, RVec{-lo}), Scalar(-v)});
        }
        desc << "phi at level " << params.level << ", point values at cell centres, cells at |x| = 2 capped one level finer";
        return Sample{PCFunction(window, std::move(cells)), desc.str()};
    }

    if (name != "psi" && name != "broken_log")
        throw Error(ErrorCode::invalid_argument, "unknown sample '" + name + "' (psi, phi, broken_log)");
    RVec x0 = params.centre.empty() ? RVec(d, Rational(0)) : params.centre;
    if (static_cast<int>(x0.size()) != d) throw Error(ErrorCode::invalid_argument, "centre has the wrong dimension");
    for (const auto& x : x0)
        if (!(x / h).is_integer()) throw Error(ErrorCode::invalid_argument, "centre must lie on the sampling grid");
    const bool broken = name == "broken_log";
    if (broken && (params.axis < 0 || params.axis >= d)) throw Error(ErrorCode::invalid_argument, "axis out of range");
    const long long n = (Rational(2) / h).floor();
    std::vector<long long> idx(d, 0);
    const double finer = hd / 4 * std::sqrt(static_cast<double>(d));
    while (true) {
        RVec lo(d), hi(d);
        double r2 = 0;
        bool touches = true;
        for (int a = 0; a < d; ++a) {
            lo[a] = x0[a] - Rational(1) + Rational(idx[a]) * h;
            hi[a] = lo[a] + h;
            double c = (lo[a] + h / Rational(2) - x0[a]).to_double();
            r2 += c * c;
            touches = touches && (lo[a] == x0[a] || hi[a] == x0[a]);
        }
        double v = std::max(log_inverse(touches ? finer : std::sqrt(r2)), 0.0);
        if (broken) {
            Rational c = lo[params.axis] + h / Rational(2);
            if (c < Rational(0)) v = -v;
        }
        if (v != 0) cells.push_back(Cell{Box(lo, hi), Scalar(v)});
        int a = d - 1;
        while (a >= 0 && ++idx[a] == n) {
            idx[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    desc << name << " centred at (";
    for (int a = 0; a < d; ++a) desc << (a ? "," : "") << x0[a].str();
    desc << ") at level " << params.level << ", point values at cell centres, cells at the centre capped one level finer";
    if (broken) desc << ", sign of x_" << params.axis;
    return Sample{PCFunction(window, std::move(cells)), desc.str()};
}

} // namespace etahardy
