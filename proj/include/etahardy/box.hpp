#pragma once

#include "etahardy/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace etahardy {

using RVec = std::vector<Rational>;
using Vec = std::vector<double>;

// Closed axis-parallel box [lo, hi] with rational corners. Intersections and
// containment are measured up to sets of measure zero.
struct Box {
    RVec lo;
    RVec hi;

    Box() = default;
    Box(RVec lo_, RVec hi_);

    static Box symmetric(int dim, const Rational& radius);

    int dim() const { return static_cast<int>(lo.size()); }
    Rational width(int i) const { return hi[i] - lo[i]; }
    Rational volume() const;
    bool empty() const;

    bool contains(const Box& o) const;
    bool overlaps(const Box& o) const;
    std::optional<Box> intersect(const Box& o) const;
    Box hull(const Box& o) const;

    // Image under x_axis -> -x_axis.
    Box reflect(int axis) const;
    // Image under the diagonal sign matrix diag(signs).
    Box flip(const std::vector<int>& signs) const;
    Box translate(const RVec& v) const;
    // Intersection with {x_axis >= 0} (positive) or {x_axis <= 0}; nullopt if null.
    std::optional<Box> clip(int axis, bool positive) const;

    bool is_cube() const;
    bool contains_point(const Vec& x) const;
    Vec center() const;

    std::string str() const;

    friend bool operator==(const Box&, const Box&) = default;
    friend auto operator<=>(const Box&, const Box&) = default;
};

// Cube with lower corner and side; 2Q and 4Q are concentric dilations.
struct Cube {
    RVec corner;
    Rational side{1};

    Cube() = default;
    Cube(RVec corner_, Rational side_);

    static Cube from_box(const Box& b);
    static Cube dyadic(const std::vector<long long>& corner_num, int level, long long side_num = 1);

    int dim() const { return static_cast<int>(corner.size()); }
    Box box() const;
    Rational volume() const;
    Cube dilate(const Rational& factor) const;
    Cube doubled() const { return dilate(Rational(2)); }
    Cube quadrupled() const { return dilate(Rational(4)); }
    bool is_dyadic() const;
    std::string str() const;

    friend bool operator==(const Cube&, const Cube&) = default;
};

// Exponent e with 2^(e-1) < x <= 2^e for a positive rational x.
int ceil_log2(const Rational& x);

// Finest dyadic level of the coordinates of a box (lowest l with all coordinates in 2^-l Z).
std::optional<int> dyadic_level(const Box& b);

} // namespace etahardy
