#pragma once

#include "etahardy/box.hpp"
#include "etahardy/rational.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace etahardy {

struct Cell {
    Box box;
    Scalar value;

    friend bool operator==(const Cell&, const Cell&) = default;
};

// Piecewise-constant function: disjoint boxes with values, zero elsewhere,
// living inside a window. Values are exact rationals or doubles per cell.
class PCFunction {
public:
    PCFunction() = default;
    // Cells must be pairwise disjoint and inside the window (checked when validate is set).
    PCFunction(Box window, std::vector<Cell> cells, bool validate = true);

    static PCFunction zero(Box window);
    // Sums possibly overlapping terms into canonical disjoint cells.
    static PCFunction from_terms(Box window, std::vector<Cell> terms);
    static PCFunction indicator(Box window, const Box& b, const Scalar& value = Scalar(1));

    int dim() const { return window_.dim(); }
    const Box& window() const { return window_; }
    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    bool is_exact() const;

    Scalar integral() const;
    Scalar l1() const;
    Scalar l2_squared() const;
    Scalar inner(const PCFunction& g) const;
    Scalar evaluate(const Vec& x) const;

    PCFunction scaled(const Scalar& c) const;
    PCFunction restrict_to(const Box& b) const;
    PCFunction halfspace(int axis, bool positive) const;
    // Composition with a diagonal sign matrix: (F o eps)(x) = F(eps x).
    PCFunction compose_flip(const std::vector<int>& signs) const;
    PCFunction with_window(const Box& w) const;
    PCFunction to_float() const;

    // Merged canonical form without zero cells; equal functions give equal canonical forms.
    PCFunction canonical() const;
    bool equals(const PCFunction& g) const;
    double max_abs_difference(const PCFunction& g) const;

    std::optional<Box> support_box() const;
    std::optional<int> finest_level() const;

    friend PCFunction operator+(const PCFunction& a, const PCFunction& b);
    friend PCFunction operator-(const PCFunction& a, const PCFunction& b);

private:
    Box window_;
    std::vector<Cell> cells_;
};

// Uniform bucket grid over cell boxes for overlap queries.
class CellIndex {
public:
    CellIndex() = default;
    explicit CellIndex(const std::vector<Cell>& cells);

    // Indices of cells whose box may overlap [lo, hi]; each index appears once, ascending.
    std::vector<std::size_t> query(const Vec& lo, const Vec& hi) const;

private:
    int dim_ = 0;
    Vec origin_;
    Vec step_;
    std::vector<int> n_;
    std::vector<std::vector<std::size_t>> buckets_;
    std::size_t total_ = 0;
};

using PointFunction = std::function<double(const Vec&)>;

// Lattice samples: values at listed points, with spacing h.
struct SampledFunction {
    double h = 0;
    Vec window_lo;
    Vec window_hi;
    std::vector<Vec> points;
    std::vector<double> values;
};

// Canonical splitting of a dyadic box into cubes with dyadic corners (greedy along the longest axis).
std::vector<Box> split_into_cubes(const Box& b);

} // namespace etahardy
