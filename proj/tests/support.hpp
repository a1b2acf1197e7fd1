#pragma once

#include "etahardy/gridfn.hpp"
#include "etahardy/pcfunction.hpp"

#include <random>
#include <set>

namespace testsupport {

using namespace etahardy;

inline Box interval(long long lo_num, long long hi_num, long long den = 1)
{
    return Box(RVec{Rational(lo_num, den)}, RVec{Rational(hi_num, den)});
}

inline Box square(Rational x0, Rational x1, Rational y0, Rational y1)
{
    return Box(RVec{x0, y0}, RVec{x1, y1});
}

inline Box window(int d, long long r = 8) { return Box::symmetric(d, Rational(r)); }

// Random exact function: up to n dyadic cubes of side 2^-level inside region, small dyadic values.
inline PCFunction random_pc(std::mt19937_64& rng, const Box& region, int level, int n, const Box& win)
{
    const int d = region.dim();
    Rational side = Rational::pow2(-level);
    std::vector<long long> lo(d), count(d);
    for (int a = 0; a < d; ++a) {
        lo[a] = (region.lo[a] / side).ceil();
        count[a] = (region.hi[a] / side).floor() - lo[a];
    }
    std::set<std::vector<long long>> used;
    std::vector<Cell> cells;
    std::uniform_int_distribution<int> val(-8, 8);
    for (int t = 0; t < n; ++t) {
        std::vector<long long> idx(d);
        for (int a = 0; a < d; ++a) idx[a] = lo[a] + std::uniform_int_distribution<long long>(0, count[a] - 1)(rng);
        if (!used.insert(idx).second) continue;
        RVec l(d), h(d);
        for (int a = 0; a < d; ++a) {
            l[a] = Rational(idx[a]) * side;
            h[a] = l[a] + side;
        }
        int v = val(rng);
        if (v == 0) v = 1;
        cells.push_back(Cell{Box(l, h), Scalar(Rational(v, 2))});
    }
    return PCFunction(win, std::move(cells));
}

// Region [lo, hi]^d intersected with the closed chamber.
inline Box chamber_region(const OrthoChamber& c, long long lo, long long hi)
{
    Box b = Box::symmetric(c.dim(), Rational(1));
    for (int a = 0; a < c.dim(); ++a) {
        b.lo[a] = Rational(lo);
        b.hi[a] = Rational(hi);
    }
    for (int a : c.axes())
        if (b.lo[a] < Rational(0)) b.lo[a] = Rational(0);
    return b;
}

inline std::vector<OrthoChamber> small_chambers()
{
    std::vector<OrthoChamber> out;
    out.push_back(OrthoChamber::standard(1, 1, {0}));
    out.push_back(OrthoChamber::standard(1, 1, {1}));
    out.push_back(OrthoChamber::standard(2, 1, {0}));
    out.push_back(OrthoChamber::standard(2, 1, {1}));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out.push_back(OrthoChamber::standard(2, 2, {a, b}));
    return out;
}

} // namespace testsupport
