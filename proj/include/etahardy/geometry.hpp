#pragma once

#include "etahardy/box.hpp"
#include "etahardy/rational.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace etahardy {

// Dense square matrix, row-major.
template <class T>
struct Matrix {
    int n = 0;
    std::vector<T> a;

    Matrix() = default;
    explicit Matrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, T(0)) {}

    static Matrix identity(int n)
    {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    friend Matrix operator*(const Matrix& x, const Matrix& y)
    {
        Matrix r(x.n);
        for (int i = 0; i < x.n; ++i)
            for (int k = 0; k < x.n; ++k) {
                const T& xik = x(i, k);
                if (xik == T(0)) continue;
                for (int j = 0; j < x.n; ++j) r(i, j) += xik * y(k, j);
            }
        return r;
    }

    std::vector<T> apply(const std::vector<T>& v) const
    {
        std::vector<T> r(n, T(0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    Matrix transpose() const
    {
        Matrix r(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

using MatD = Matrix<double>;
using MatQ = Matrix<Rational>;

double dot(const Vec& a, const Vec& b);
Rational dot(const RVec& a, const RVec& b);

// sigma_alpha(x) = x - 2<alpha,x>/<alpha,alpha> alpha.
Vec reflect(const Vec& alpha, const Vec& x);
RVec reflect(const RVec& alpha, const RVec& x);
MatD reflection_matrix(const Vec& alpha);
MatQ reflection_matrix(const RVec& alpha);

double determinant(MatD m);
MatD to_double(const MatQ& m);

class RootSystem {
public:
    // Rational coordinates give an exact system; use from_double for generic inputs,
    // which switches to exact mode when every coordinate is a short dyadic.
    static RootSystem from_rational(int dim, std::vector<RVec> roots);
    static RootSystem from_double(int dim, std::vector<Vec> roots);
    // {+-e_i : i = d-k, ..., d-1}
    static RootSystem orthogonal(int d, int k);
    // Six roots at mutual angles of 60 degrees in the plane.
    static RootSystem a2();

    int dim() const { return dim_; }
    bool exact() const { return exact_; }
    std::size_t size() const { return roots_.size(); }
    const std::vector<Vec>& roots() const { return roots_; }
    const std::vector<RVec>& exact_roots() const { return exact_roots_; }
    // Index of the first member of every {alpha, -alpha} pair, in input order.
    std::vector<int> pair_representatives() const;

private:
    void validate() const;

    int dim_ = 0;
    bool exact_ = false;
    std::vector<Vec> roots_;
    std::vector<RVec> exact_roots_;
};

struct GroupElement {
    MatD matrix;
    std::optional<MatQ> exact;
    std::vector<int> word;
    int eta = 1;
};

inline constexpr std::size_t kDefaultGroupCap = 10000;

// Breadth-first closure of the reflections sigma_alpha; words index pair_representatives().
std::vector<GroupElement> generate_group(const RootSystem& system, std::size_t cap = kDefaultGroupCap);

struct PositiveSimple {
    std::vector<int> positive; // indices into roots()
    std::vector<int> simple;   // subset of positive
};

PositiveSimple positive_and_simple(const RootSystem& system, const Vec& x0);

struct PointLocation {
    bool interior = false;  // strictly inside C+
    bool on_wall = false;   // in the closure, on at least one wall
    std::vector<int> walls; // simple-root indices whose wall contains the point
};

class SignedChamber {
public:
    const RootSystem& system() const { return system_; }
    int dim() const { return system_.dim(); }
    const Vec& basepoint() const { return basepoint_; }
    const std::vector<int>& positive() const { return positive_; }
    const std::vector<Vec>& simple_roots() const { return simple_; }
    const std::vector<int>& eta_on_generators() const { return eta_; }
    int wall_sign(int i) const { return eta_[i]; }
    const std::vector<GroupElement>& group() const { return group_; }
    std::size_t order() const { return group_.size(); }

    bool contains(const Vec& x) const;
    PointLocation classify(const Vec& x) const;
    // Coordinate axes of the walls when every simple root is a positive multiple of a basis vector.
    std::optional<std::vector<int>> orthogonal_axes() const;
    // Index of g*h in group(), by matrix lookup.
    std::optional<std::size_t> find(const MatD& m) const;

private:
    friend SignedChamber assign_homomorphism(const RootSystem&, const Vec&, const std::vector<int>&, std::size_t);

    RootSystem system_;
    Vec basepoint_;
    std::vector<int> positive_;
    std::vector<int> simple_index_;
    std::vector<Vec> simple_;
    std::vector<RVec> simple_exact_;
    std::vector<int> eta_;
    std::vector<GroupElement> group_;
};

// Extends the wall signs along simple-reflection words; throws not-a-homomorphism
// (message carries the two conflicting words) when the signs are inconsistent.
SignedChamber assign_homomorphism(const RootSystem& system, const Vec& x0, const std::vector<int>& eta_on_generators,
                                  std::size_t cap = kDefaultGroupCap);

bool chamber_contains(const SignedChamber& chamber, const Vec& x);

std::string word_string(const std::vector<int>& word);

} // namespace etahardy
