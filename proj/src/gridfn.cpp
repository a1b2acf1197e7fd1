#include "etahardy/gridfn.hpp"

#include "etahardy/error.hpp"

#include <algorithm>
#include <cmath>

namespace etahardy {

OrthoChamber::OrthoChamber(int dim, std::vector<int> axes, std::vector<int> eta_bits)
    : dim_(dim), axes_(std::move(axes)), eta_bits_(std::move(eta_bits))
{
    if (axes_.size() != eta_bits_.size()) throw Error(ErrorCode::invalid_argument, "one sign per wall required");
    for (std::size_t j = 0; j < axes_.size(); ++j) {
        if (axes_[j] < 0 || axes_[j] >= dim_) throw Error(ErrorCode::invalid_argument, "wall axis out of range");
        if (eta_bits_[j] != 0 && eta_bits_[j] != 1) throw Error(ErrorCode::invalid_argument, "eta entries are 0 or 1");
        for (std::size_t i = 0; i < j; ++i)
            if (axes_[i] == axes_[j]) throw Error(ErrorCode::invalid_argument, "repeated wall axis");
    }
}

OrthoChamber OrthoChamber::standard(int d, int k, std::vector<int> eta_bits)
{
    if (k < 0 || k > d) throw Error(ErrorCode::invalid_argument, "need 0 <= k <= d");
    std::vector<int> axes;
    for (int i = d - k; i < d; ++i) axes.push_back(i);
    return OrthoChamber(d, std::move(axes), std::move(eta_bits));
}

OrthoChamber OrthoChamber::from_signed(const SignedChamber& chamber)
{
    auto axes = chamber.orthogonal_axes();
    if (!axes)
        throw Error(ErrorCode::unsupported_geometry,
                    "chamber is not bounded by coordinate hyperplanes; use the sampled (evaluator) mode");
    std::vector<int> bits;
    for (int s : chamber.eta_on_generators()) bits.push_back(s < 0 ? 1 : 0);
    return OrthoChamber(chamber.dim(), *axes, std::move(bits));
}

std::vector<int> OrthoChamber::plus_axes() const
{
    std::vector<int> r;
    for (std::size_t j = 0; j < axes_.size(); ++j)
        if (!eta_bits_[j]) r.push_back(axes_[j]);
    std::sort(r.begin(), r.end());
    return r;
}

std::vector<int> OrthoChamber::minus_axes() const
{
    std::vector<int> r;
    for (std::size_t j = 0; j < axes_.size(); ++j)
        if (eta_bits_[j]) r.push_back(axes_[j]);
    std::sort(r.begin(), r.end());
    return r;
}

std::vector<int> OrthoChamber::signs(std::size_t g) const
{
    std::vector<int> s(dim_, 1);
    for (std::size_t j = 0; j < axes_.size(); ++j)
        if (g >> j & 1) s[axes_[j]] = -1;
    return s;
}

int OrthoChamber::eta(std::size_t g) const
{
    int e = 1;
    for (std::size_t j = 0; j < axes_.size(); ++j)
        if ((g >> j & 1) && eta_bits_[j]) e = -e;
    return e;
}

bool OrthoChamber::contains(const Vec& x) const
{
    return std::all_of(axes_.begin(), axes_.end(), [&](int a) { return x[a] > 0; });
}

bool OrthoChamber::contains_box(const Box& b) const
{
    return std::all_of(axes_.begin(), axes_.end(), [&](int a) { return b.lo[a].sign() >= 0; });
}

Box OrthoChamber::symmetric_hull(const Box& b) const
{
    Box h = b;
    for (std::size_t g = 1; g < order(); ++g) h = h.hull(b.flip(signs(g)));
    return h;
}

SignedChamber OrthoChamber::to_signed() const
{
    std::vector<RVec> roots;
    Vec x0(dim_, 0.0);
    for (int a : axes_) {
        RVec e(dim_, Rational(0));
        e[a] = Rational(1);
        roots.push_back(e);
        e[a] = Rational(-1);
        roots.push_back(e);
        x0[a] = 1.0;
    }
    std::vector<int> eta;
    // simple roots come out in ascending axis order
    std::vector<std::pair<int, int>> by_axis;
    for (std::size_t j = 0; j < axes_.size(); ++j) by_axis.push_back({axes_[j], eta_bits_[j] ? -1 : 1});
    std::sort(by_axis.begin(), by_axis.end());
    for (auto& p : by_axis) eta.push_back(p.second);
    return assign_homomorphism(RootSystem::from_rational(dim_, std::move(roots)), x0, eta);
}

PCFunction eta_extend(const PCFunction& f, const OrthoChamber& chamber)
{
    for (const auto& c : f.cells()) {
        if (!chamber.contains_box(c.box))
            throw Error(ErrorCode::invalid_support, "cell " + c.box.str() + " is not inside the chamber");
    }
    std::vector<Cell> cells;
    cells.reserve(f.size() * chamber.order());
    for (std::size_t g = 0; g < chamber.order(); ++g) {
        auto s = chamber.signs(g);
        Scalar sign(chamber.eta(g));
        for (const auto& c : f.cells()) cells.push_back(Cell{c.box.flip(s), c.value * sign});
    }
    return PCFunction(chamber.symmetric_hull(f.window()), std::move(cells), false);
}

PCFunction eta_extend(const PCFunction& f, const SignedChamber& chamber)
{
    return eta_extend(f, OrthoChamber::from_signed(chamber));
}

PCFunction eta_average(const PCFunction& F, const OrthoChamber& chamber)
{
    const bool exact = F.is_exact();
    Scalar inv = exact ? Scalar(Rational(1, static_cast<long long>(chamber.order())))
                       : Scalar(1.0 / static_cast<double>(chamber.order()));
    std::vector<Cell> terms;
    terms.reserve(F.size() * chamber.order());
    Box window = chamber.symmetric_hull(F.window());
    for (std::size_t g = 0; g < chamber.order(); ++g) {
        auto s = chamber.signs(g);
        Scalar w = inv * Scalar(chamber.eta(g));
        for (const auto& c : F.cells()) terms.push_back(Cell{c.box.flip(s), c.value * w});
    }
    return PCFunction::from_terms(std::move(window), std::move(terms));
}

PCFunction eta_average(const PCFunction& F, const SignedChamber& chamber)
{
    return eta_average(F, OrthoChamber::from_signed(chamber));
}

PointFunction eta_average(PointFunction F, const SignedChamber& chamber)
{
    std::vector<std::pair<MatD, int>> elems;
    for (const auto& g : chamber.group()) elems.push_back({g.matrix, g.eta});
    const double inv = 1.0 / static_cast<double>(elems.size());
    return [F = std::move(F), elems = std::move(elems), inv](const Vec& y) {
        double pos = 0, neg = 0;
        for (const auto& [m, eta] : elems) {
            double v = eta * F(m.apply(y));
            (v >= 0 ? pos : neg) += v;
        }
        return (pos + neg) * inv;
    };
}

SampledFunction eta_average(const SampledFunction& F, const PointFunction& evaluator, const SignedChamber& chamber)
{
    PointFunction avg = eta_average(evaluator, chamber);
    SampledFunction out = F;
    for (std::size_t i = 0; i < out.points.size(); ++i) out.values[i] = avg(out.points[i]);
    return out;
}

Scalar pairing_identity_defect(const PCFunction& f, const PCFunction& F, const OrthoChamber& chamber)
{
    Scalar lhs = eta_extend(f, chamber).inner(F);
    Scalar rhs = Scalar(static_cast<long long>(chamber.order())) * f.inner(eta_average(F, chamber));
    return abs(lhs - rhs);
}

bool is_eta_symmetric(const PCFunction& F, const OrthoChamber& chamber)
{
    for (std::size_t g = 1; g < chamber.order(); ++g) {
        PCFunction moved = F.compose_flip(chamber.signs(g));
        if (!moved.equals(F.scaled(Scalar(chamber.eta(g))))) return false;
    }
    return true;
}

PCFunction restrict_to_chamber(const PCFunction& F, const OrthoChamber& chamber, std::size_t g)
{
    auto s = chamber.signs(g);
    std::vector<Cell> cells;
    for (const auto& c : F.cells()) {
        std::optional<Box> b = c.box;
        for (int a : chamber.axes()) {
            if (!b) break;
            b = b->clip(a, s[a] > 0);
        }
        if (b && !b->empty()) cells.push_back(Cell{*b, c.value});
    }
    return PCFunction(F.window(), std::move(cells), false);
}

} // namespace etahardy
