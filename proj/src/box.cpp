#include "etahardy/box.hpp"

#include "etahardy/error.hpp"

#include <algorithm>
#include <sstream>

namespace etahardy {

Box::Box(RVec lo_, RVec hi_) : lo(std::move(lo_)), hi(std::move(hi_))
{
    if (lo.size() != hi.size()) throw Error(ErrorCode::invalid_argument, "box corner dimensions differ");
}

Box Box::symmetric(int dim, const Rational& radius)
{
    return Box(RVec(dim, -radius), RVec(dim, radius));
}

Rational Box::volume() const
{
    Rational v(1);
    for (int i = 0; i < dim(); ++i) v *= width(i);
    return v;
}

bool Box::empty() const
{
    for (int i = 0; i < dim(); ++i)
        if (!(lo[i] < hi[i])) return true;
    return false;
}

bool Box::contains(const Box& o) const
{
    for (int i = 0; i < dim(); ++i)
        if (o.lo[i] < lo[i] || hi[i] < o.hi[i]) return false;
    return true;
}

bool Box::overlaps(const Box& o) const
{
    for (int i = 0; i < dim(); ++i)
        if (!(lo[i] < o.hi[i] && o.lo[i] < hi[i])) return false;
    return true;
}

std::optional<Box> Box::intersect(const Box& o) const
{
    if (!overlaps(o)) return std::nullopt;
    Box r = *this;
    for (int i = 0; i < dim(); ++i) {
        r.lo[i] = max(lo[i], o.lo[i]);
        r.hi[i] = min(hi[i], o.hi[i]);
    }
    return r;
}

Box Box::hull(const Box& o) const
{
    Box r = *this;
    for (int i = 0; i < dim(); ++i) {
        r.lo[i] = min(lo[i], o.lo[i]);
        r.hi[i] = max(hi[i], o.hi[i]);
    }
    return r;
}

Box Box::reflect(int axis) const
{
    Box r = *this;
    r.lo[axis] = -hi[axis];
    r.hi[axis] = -lo[axis];
    return r;
}

Box Box::flip(const std::vector<int>& signs) const
{
    Box r = *this;
    for (int i = 0; i < dim(); ++i)
        if (signs[i] < 0) {
            r.lo[i] = -hi[i];
            r.hi[i] = -lo[i];
        }
    return r;
}

Box Box::translate(const RVec& v) const
{
    Box r = *this;
    for (int i = 0; i < dim(); ++i) {
        r.lo[i] += v[i];
        r.hi[i] += v[i];
    }
    return r;
}

std::optional<Box> Box::clip(int axis, bool positive) const
{
    Box r = *this;
    if (positive) {
        if (!(Rational(0) < hi[axis])) return std::nullopt;
        r.lo[axis] = max(lo[axis], Rational(0));
    } else {
        if (!(lo[axis] < Rational(0))) return std::nullopt;
        r.hi[axis] = min(hi[axis], Rational(0));
    }
    return r;
}

bool Box::is_cube() const
{
    for (int i = 1; i < dim(); ++i)
        if (width(i) != width(0)) return false;
    return true;
}

bool Box::contains_point(const Vec& x) const
{
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lo[i].to_double() || x[i] > hi[i].to_double()) return false;
    return true;
}

Vec Box::center() const
{
    Vec c(dim());
    for (int i = 0; i < dim(); ++i) c[i] = ((lo[i] + hi[i]) / Rational(2)).to_double();
    return c;
}

std::string Box::str() const
{
    std::ostringstream os;
    for (int i = 0; i < dim(); ++i) os << (i ? "x" : "") << "[" << lo[i] << "," << hi[i] << "]";
    return os.str();
}

Cube::Cube(RVec corner_, Rational side_) : corner(std::move(corner_)), side(side_)
{
    if (!(Rational(0) < side)) throw Error(ErrorCode::invalid_argument, "cube side must be positive");
}

Cube Cube::from_box(const Box& b)
{
    if (b.dim() == 0 || !b.is_cube()) throw Error(ErrorCode::invalid_argument, "box " + b.str() + " is not a cube");
    return Cube(b.lo, b.width(0));
}

Cube Cube::dyadic(const std::vector<long long>& corner_num, int level, long long side_num)
{
    Rational unit = Rational::pow2(-level);
    RVec c;
    for (long long n : corner_num) c.push_back(Rational(n) * unit);
    return Cube(std::move(c), Rational(side_num) * unit);
}

Box Cube::box() const
{
    RVec hi = corner;
    for (auto& h : hi) h += side;
    return Box(corner, hi);
}

Rational Cube::volume() const
{
    Rational v(1);
    for (int i = 0; i < dim(); ++i) v *= side;
    return v;
}

Cube Cube::dilate(const Rational& factor) const
{
    Rational shift = (factor - Rational(1)) * side / Rational(2);
    RVec c = corner;
    for (auto& x : c) x -= shift;
    return Cube(std::move(c), side * factor);
}

bool Cube::is_dyadic() const
{
    if (!side.dyadic_level()) return false;
    for (const auto& c : corner)
        if (!c.is_zero() && !c.dyadic_level()) return false;
    return true;
}

std::string Cube::str() const { return box().str(); }

int ceil_log2(const Rational& x)
{
    if (!(Rational(0) < x)) throw Error(ErrorCode::invalid_argument, "log2 of nonpositive value");
    int e = 0;
    while (Rational::pow2(e) < x) ++e;
    while (!(Rational::pow2(e - 1) < x)) --e;
    return e;
}

std::optional<int> dyadic_level(const Box& b)
{
    std::optional<int> best;
    auto take = [&](const Rational& r) -> bool {
        if (r.is_zero()) return true;
        auto l = r.dyadic_level();
        if (!l) return false;
        best = best ? std::max(*best, *l) : *l;
        return true;
    };
    for (int i = 0; i < b.dim(); ++i)
        if (!take(b.lo[i]) || !take(b.hi[i])) return std::nullopt;
    return best ? best : std::optional<int>(0);
}

} // namespace etahardy
