#include "etahardy/pcfunction.hpp"

#include "etahardy/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace etahardy {

namespace {

using Interval = std::pair<Rational, Rational>;

struct Piece {
    std::vector<Interval> iv;
    Scalar value;
    bool operator==(const Piece&) const = default;
};

struct Item {
    const Box* box;
    Scalar value;
};

// Slab sweep along one axis; adjacent slabs with identical sub-partitions are merged.
std::vector<Piece> sweep(const std::vector<Item>& items, int axis, int d)
{
    std::vector<Rational> bp;
    bp.reserve(2 * items.size());
    for (const auto& it : items) {
        bp.push_back(it.box->lo[axis]);
        bp.push_back(it.box->hi[axis]);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return items[a].box->lo[axis] < items[b].box->lo[axis]; });

    std::vector<Piece> out;
    std::vector<Piece> prev;
    Interval prev_iv;
    bool have_prev = false;
    auto flush = [&] {
        if (!have_prev) return;
        for (auto& p : prev) {
            Piece q;
            q.iv.reserve(p.iv.size() + 1);
            q.iv.push_back(prev_iv);
            q.iv.insert(q.iv.end(), p.iv.begin(), p.iv.end());
            q.value = p.value;
            out.push_back(std::move(q));
        }
        have_prev = false;
    };

    std::vector<std::size_t> active;
    std::size_t next = 0;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const Rational& a = bp[k];
        const Rational& b = bp[k + 1];
        while (next < order.size() && items[order[next]].box->lo[axis] <= a) active.push_back(order[next++]);
        std::erase_if(active, [&](std::size_t i) { return items[i].box->hi[axis] <= a; });
        if (active.empty()) {
            flush();
            continue;
        }
        std::vector<std::size_t> sorted = active;
        std::sort(sorted.begin(), sorted.end());
        std::vector<Piece> sub;
        if (axis == d - 1) {
            Scalar sum = items[sorted[0]].value;
            for (std::size_t i = 1; i < sorted.size(); ++i) sum += items[sorted[i]].value;
            if (!sum.is_zero()) sub.push_back(Piece{{}, sum});
        } else {
            std::vector<Item> act;
            act.reserve(sorted.size());
            for (std::size_t i : sorted) act.push_back(items[i]);
            sub = sweep(act, axis + 1, d);
        }
        if (sub.empty()) {
            flush();
            continue;
        }
        if (have_prev && prev_iv.second == a && sub == prev) {
            prev_iv.second = b;
        } else {
            flush();
            prev = std::move(sub);
            prev_iv = {a, b};
            have_prev = true;
        }
    }
    flush();
    return out;
}

} // namespace

PCFunction::PCFunction(Box window, std::vector<Cell> cells, bool validate)
    : window_(std::move(window)), cells_(std::move(cells))
{
    if (!validate) return;
    for (const auto& c : cells_) {
        if (c.box.dim() != window_.dim()) throw Error(ErrorCode::invalid_input, "cell dimension differs from window");
        if (c.box.empty()) throw Error(ErrorCode::invalid_input, "empty cell " + c.box.str());
        if (!window_.contains(c.box))
            throw Error(ErrorCode::invalid_input, "cell " + c.box.str() + " outside window " + window_.str());
    }
    if (cells_.size() < 2) return;
    CellIndex index(cells_);
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const Box& b = cells_[i].box;
        Vec lo(b.dim()), hi(b.dim());
        for (int a = 0; a < b.dim(); ++a) {
            lo[a] = b.lo[a].to_double();
            hi[a] = b.hi[a].to_double();
        }
        for (std::size_t j : index.query(lo, hi))
            if (j > i && cells_[j].box.overlaps(b))
                throw Error(ErrorCode::invalid_input, "overlapping cells " + b.str() + " and " + cells_[j].box.str());
    }
}

PCFunction PCFunction::zero(Box window) { return PCFunction(std::move(window), {}, false); }

PCFunction PCFunction::from_terms(Box window, std::vector<Cell> terms)
{
    std::vector<Item> items;
    items.reserve(terms.size());
    for (const auto& t : terms) {
        if (t.box.empty() || t.value.is_zero()) continue;
        if (!window.contains(t.box))
            throw Error(ErrorCode::invalid_input, "term " + t.box.str() + " outside window " + window.str());
        items.push_back(Item{&t.box, t.value});
    }
    std::vector<Cell> cells;
    if (!items.empty()) {
        const int d = window.dim();
        for (auto& p : sweep(items, 0, d)) {
            Box b;
            b.lo.resize(d);
            b.hi.resize(d);
            for (int a = 0; a < d; ++a) {
                b.lo[a] = p.iv[a].first;
                b.hi[a] = p.iv[a].second;
            }
            cells.push_back(Cell{std::move(b), p.value});
        }
    }
    return PCFunction(std::move(window), std::move(cells), false);
}

PCFunction PCFunction::indicator(Box window, const Box& b, const Scalar& value)
{
    return PCFunction(std::move(window), {Cell{b, value}});
}

bool PCFunction::is_exact() const
{
    return std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.value.is_exact(); });
}

Scalar PCFunction::integral() const
{
    Scalar s(0);
    for (const auto& c : cells_) s += c.value * Scalar(c.box.volume());
    return s;
}

Scalar PCFunction::l1() const
{
    Scalar s(0);
    for (const auto& c : cells_) s += abs(c.value) * Scalar(c.box.volume());
    return s;
}

Scalar PCFunction::l2_squared() const
{
    Scalar s(0);
    for (const auto& c : cells_) s += c.value * c.value * Scalar(c.box.volume());
    return s;
}

Scalar PCFunction::inner(const PCFunction& g) const
{
    Scalar s(0);
    if (cells_.empty() || g.cells_.empty()) return s;
    CellIndex index(g.cells_);
    for (const auto& c : cells_) {
        Vec lo(dim()), hi(dim());
        for (int a = 0; a < dim(); ++a) {
            lo[a] = c.box.lo[a].to_double();
            hi[a] = c.box.hi[a].to_double();
        }
        for (std::size_t j : index.query(lo, hi)) {
            auto ov = c.box.intersect(g.cells_[j].box);
            if (ov) s += c.value * g.cells_[j].value * Scalar(ov->volume());
        }
    }
    return s;
}

Scalar PCFunction::evaluate(const Vec& x) const
{
    for (const auto& c : cells_)
        if (c.box.contains_point(x)) return c.value;
    return Scalar(0);
}

PCFunction PCFunction::scaled(const Scalar& c) const
{
    std::vector<Cell> cells;
    if (!c.is_zero()) {
        cells.reserve(cells_.size());
        for (const auto& cell : cells_) cells.push_back(Cell{cell.box, cell.value * c});
    }
    return PCFunction(window_, std::move(cells), false);
}

PCFunction PCFunction::restrict_to(const Box& b) const
{
    std::vector<Cell> cells;
    for (const auto& c : cells_)
        if (auto ov = c.box.intersect(b)) cells.push_back(Cell{*ov, c.value});
    return PCFunction(window_, std::move(cells), false);
}

PCFunction PCFunction::halfspace(int axis, bool positive) const
{
    std::vector<Cell> cells;
    for (const auto& c : cells_)
        if (auto ov = c.box.clip(axis, positive)) cells.push_back(Cell{*ov, c.value});
    return PCFunction(window_, std::move(cells), false);
}

PCFunction PCFunction::compose_flip(const std::vector<int>& signs) const
{
    std::vector<Cell> cells;
    cells.reserve(cells_.size());
    for (const auto& c : cells_) cells.push_back(Cell{c.box.flip(signs), c.value});
    return PCFunction(window_.flip(signs), std::move(cells), false);
}

PCFunction PCFunction::with_window(const Box& w) const
{
    for (const auto& c : cells_)
        if (!w.contains(c.box)) throw Error(ErrorCode::invalid_input, "cell " + c.box.str() + " outside new window");
    return PCFunction(w, cells_, false);
}

PCFunction PCFunction::to_float() const
{
    std::vector<Cell> cells;
    cells.reserve(cells_.size());
    for (const auto& c : cells_) cells.push_back(Cell{c.box, etahardy::to_float(c.value)});
    return PCFunction(window_, std::move(cells), false);
}

PCFunction PCFunction::canonical() const { return from_terms(window_, cells_); }

bool PCFunction::equals(const PCFunction& g) const
{
    PCFunction diff = *this - g;
    return std::all_of(diff.cells_.begin(), diff.cells_.end(), [](const Cell& c) { return c.value.is_zero(); });
}

double PCFunction::max_abs_difference(const PCFunction& g) const
{
    PCFunction diff = *this - g;
    double m = 0;
    for (const auto& c : diff.cells_) m = std::max(m, std::abs(c.value.to_double()));
    return m;
}

std::optional<Box> PCFunction::support_box() const
{
    std::optional<Box> b;
    for (const auto& c : cells_) {
        if (c.value.is_zero()) continue;
        b = b ? b->hull(c.box) : c.box;
    }
    return b;
}

std::optional<int> PCFunction::finest_level() const
{
    std::optional<int> best;
    for (const auto& c : cells_) {
        auto l = dyadic_level(c.box);
        if (!l) return std::nullopt;
        best = best ? std::max(*best, *l) : *l;
    }
    return best;
}

PCFunction operator+(const PCFunction& a, const PCFunction& b)
{
    std::vector<Cell> terms = a.cells_;
    terms.insert(terms.end(), b.cells_.begin(), b.cells_.end());
    Box w = a.dim() == 0 ? b.window_ : (b.dim() == 0 ? a.window_ : a.window_.hull(b.window_));
    return PCFunction::from_terms(std::move(w), std::move(terms));
}

PCFunction operator-(const PCFunction& a, const PCFunction& b) { return a + b.scaled(Scalar(-1)); }

CellIndex::CellIndex(const std::vector<Cell>& cells) : total_(cells.size())
{
    if (cells.empty()) return;
    dim_ = cells[0].box.dim();
    Vec lo(dim_, INFINITY), hi(dim_, -INFINITY);
    std::vector<Vec> clo(cells.size(), Vec(dim_)), chi(cells.size(), Vec(dim_));
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (int a = 0; a < dim_; ++a) {
            clo[i][a] = cells[i].box.lo[a].to_double();
            chi[i][a] = cells[i].box.hi[a].to_double();
            lo[a] = std::min(lo[a], clo[i][a]);
            hi[a] = std::max(hi[a], chi[i][a]);
        }
    int per_axis = std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(cells.size()), 1.0 / dim_))));
    per_axis = std::min(per_axis, dim_ == 1 ? 1 << 20 : (dim_ == 2 ? 2048 : 128));
    origin_ = lo;
    step_.resize(dim_);
    n_.assign(dim_, per_axis);
    std::size_t nb = 1;
    for (int a = 0; a < dim_; ++a) {
        step_[a] = std::max((hi[a] - lo[a]) / per_axis, 1e-300);
        nb *= static_cast<std::size_t>(per_axis);
    }
    buckets_.resize(nb);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::vector<int> b0(dim_), b1(dim_);
        for (int a = 0; a < dim_; ++a) {
            b0[a] = std::clamp(static_cast<int>(std::floor((clo[i][a] - origin_[a]) / step_[a])), 0, n_[a] - 1);
            b1[a] = std::clamp(static_cast<int>(std::floor((chi[i][a] - origin_[a]) / step_[a])), 0, n_[a] - 1);
        }
        std::vector<int> cur = b0;
        while (true) {
            std::size_t flat = 0;
            for (int a = 0; a < dim_; ++a) flat = flat * n_[a] + cur[a];
            buckets_[flat].push_back(i);
            int a = dim_ - 1;
            while (a >= 0 && cur[a] == b1[a]) {
                cur[a] = b0[a];
                --a;
            }
            if (a < 0) break;
            ++cur[a];
        }
    }
}

std::vector<std::size_t> CellIndex::query(const Vec& lo, const Vec& hi) const
{
    std::vector<std::size_t> out;
    if (total_ == 0) return out;
    std::vector<int> b0(dim_), b1(dim_);
    for (int a = 0; a < dim_; ++a) {
        double l = std::floor((lo[a] - origin_[a]) / step_[a]);
        double h = std::floor((hi[a] - origin_[a]) / step_[a]);
        if (h < 0 || l > n_[a] - 1) return out;
        b0[a] = static_cast<int>(std::max(l, 0.0));
        b1[a] = static_cast<int>(std::min(h, static_cast<double>(n_[a] - 1)));
    }
    std::vector<int> cur = b0;
    while (true) {
        std::size_t flat = 0;
        for (int a = 0; a < dim_; ++a) flat = flat * n_[a] + cur[a];
        out.insert(out.end(), buckets_[flat].begin(), buckets_[flat].end());
        int a = dim_ - 1;
        while (a >= 0 && cur[a] == b1[a]) {
            cur[a] = b0[a];
            --a;
        }
        if (a < 0) break;
        ++cur[a];
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Box> split_into_cubes(const Box& b)
{
    std::vector<Box> out;
    std::vector<Box> stack{b};
    while (!stack.empty()) {
        Box cur = stack.back();
        stack.pop_back();
        if (cur.is_cube()) {
            out.push_back(cur);
            continue;
        }
        int longest = 0;
        Rational shortest = cur.width(0);
        for (int a = 1; a < cur.dim(); ++a) {
            if (cur.width(longest) < cur.width(a)) longest = a;
            if (cur.width(a) < shortest) shortest = cur.width(a);
        }
        Box first = cur, rest = cur;
        first.hi[longest] = cur.lo[longest] + shortest;
        rest.lo[longest] = first.hi[longest];
        stack.push_back(rest);
        stack.push_back(first);
    }
    return out;
}

} // namespace etahardy
