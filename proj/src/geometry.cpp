#include "etahardy/geometry.hpp"

#include "etahardy/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace etahardy {

namespace {

constexpr double kTol = 1e-12;
constexpr double kKeyBucket = 1e-9;

using Key = std::vector<long long>;

Key float_key(const MatD& m)
{
    Key k;
    k.reserve(m.a.size());
    for (double x : m.a) k.push_back(std::llround(x / kKeyBucket));
    return k;
}

Key exact_key(const MatQ& m)
{
    Key k;
    k.reserve(2 * m.a.size());
    for (const auto& x : m.a) {
        k.push_back(x.num());
        k.push_back(x.den());
    }
    return k;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

bool close(const Vec& a, const Vec& b, double scale)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-9 * scale) return false;
    return true;
}

bool is_zero_vec(const RVec& v)
{
    return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x.is_zero(); });
}

Vec to_double(const RVec& v)
{
    Vec r;
    r.reserve(v.size());
    for (const auto& x : v) r.push_back(x.to_double());
    return r;
}

// Phase-one simplex with Bland's rule: is target a nonnegative combination of gens?
template <class T>
bool in_cone(const std::vector<std::vector<T>>& gens, const std::vector<T>& target, const T& eps)
{
    const int rows = static_cast<int>(target.size());
    const int m = static_cast<int>(gens.size());
    const int cols = m + rows;
    std::vector<std::vector<T>> tab(rows + 1, std::vector<T>(cols + 1, T(0)));
    std::vector<int> basis(rows);
    for (int i = 0; i < rows; ++i) {
        T s = target[i] < T(0) ? T(-1) : T(1);
        for (int j = 0; j < m; ++j) tab[i][j] = s * gens[j][i];
        tab[i][m + i] = T(1);
        tab[i][cols] = s * target[i];
        basis[i] = m + i;
    }
    for (int j = 0; j <= cols; ++j) {
        if (j >= m && j < cols) continue;
        for (int i = 0; i < rows; ++i) tab[rows][j] += tab[i][j];
    }
    for (int iter = 0; iter < 10000; ++iter) {
        int enter = -1;
        for (int j = 0; j < cols; ++j)
            if (tab[rows][j] > eps) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        T best{};
        for (int i = 0; i < rows; ++i) {
            if (!(tab[i][enter] > eps)) continue;
            T ratio = tab[i][cols] / tab[i][enter];
            if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave < 0) break;
        T piv = tab[leave][enter];
        for (auto& x : tab[leave]) x = x / piv;
        for (int i = 0; i <= rows; ++i) {
            if (i == leave) continue;
            T f = tab[i][enter];
            if (f == T(0)) continue;
            for (int j = 0; j <= cols; ++j) tab[i][j] = tab[i][j] - f * tab[leave][j];
        }
        basis[leave] = enter;
    }
    return !(tab[rows][cols] > eps);
}

template <class T>
int rank_of(std::vector<std::vector<T>> rows, const T& eps)
{
    int r = 0;
    const int ncols = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    for (int c = 0; c < ncols && r < static_cast<int>(rows.size()); ++c) {
        int piv = -1;
        for (int i = r; i < static_cast<int>(rows.size()); ++i) {
            T v = rows[i][c] < T(0) ? T(0) - rows[i][c] : rows[i][c];
            if (v > eps && (piv < 0 || v > (rows[piv][c] < T(0) ? T(0) - rows[piv][c] : rows[piv][c]))) piv = i;
        }
        if (piv < 0) continue;
        std::swap(rows[r], rows[piv]);
        for (int i = r + 1; i < static_cast<int>(rows.size()); ++i) {
            T f = rows[i][c] / rows[r][c];
            for (int j = c; j < ncols; ++j) rows[i][j] = rows[i][j] - f * rows[r][j];
        }
        ++r;
    }
    return r;
}

} // namespace

double dot(const Vec& a, const Vec& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rational dot(const RVec& a, const RVec& b)
{
    Rational s;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vec reflect(const Vec& alpha, const Vec& x)
{
    double aa = dot(alpha, alpha);
    if (aa == 0.0) throw Error(ErrorCode::invalid_argument, "reflection in the zero vector");
    double c = 2.0 * dot(alpha, x) / aa;
    Vec r = x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * alpha[i];
    return r;
}

RVec reflect(const RVec& alpha, const RVec& x)
{
    Rational aa = dot(alpha, alpha);
    if (aa.is_zero()) throw Error(ErrorCode::invalid_argument, "reflection in the zero vector");
    Rational c = Rational(2) * dot(alpha, x) / aa;
    RVec r = x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * alpha[i];
    return r;
}

MatD reflection_matrix(const Vec& alpha)
{
    const int n = static_cast<int>(alpha.size());
    double aa = dot(alpha, alpha);
    if (aa == 0.0) throw Error(ErrorCode::invalid_argument, "reflection in the zero vector");
    MatD m = MatD::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) -= 2.0 * alpha[i] * alpha[j] / aa;
    return m;
}

MatQ reflection_matrix(const RVec& alpha)
{
    const int n = static_cast<int>(alpha.size());
    Rational aa = dot(alpha, alpha);
    if (aa.is_zero()) throw Error(ErrorCode::invalid_argument, "reflection in the zero vector");
    MatQ m = MatQ::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) -= Rational(2) * alpha[i] * alpha[j] / aa;
    return m;
}

double determinant(MatD m)
{
    const int n = m.n;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int i = c + 1; i < n; ++i)
            if (std::abs(m(i, c)) > std::abs(m(piv, c))) piv = i;
        if (m(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
            det = -det;
        }
        det *= m(c, c);
        for (int i = c + 1; i < n; ++i) {
            double f = m(i, c) / m(c, c);
            for (int j = c; j < n; ++j) m(i, j) -= f * m(c, j);
        }
    }
    return det;
}

MatD to_double(const MatQ& m)
{
    MatD r(m.n);
    for (std::size_t i = 0; i < m.a.size(); ++i) r.a[i] = m.a[i].to_double();
    return r;
}

RootSystem RootSystem::from_rational(int dim, std::vector<RVec> roots)
{
    RootSystem s;
    s.dim_ = dim;
    s.exact_ = true;
    for (auto& r : roots) {
        if (static_cast<int>(r.size()) != dim) throw Error(ErrorCode::invalid_argument, "root has wrong dimension");
        s.roots_.push_back(to_double(r));
    }
    s.exact_roots_ = std::move(roots);
    s.validate();
    return s;
}

RootSystem RootSystem::from_double(int dim, std::vector<Vec> roots)
{
    bool dyadic = true;
    std::vector<RVec> exact;
    for (const auto& r : roots) {
        if (static_cast<int>(r.size()) != dim) throw Error(ErrorCode::invalid_argument, "root has wrong dimension");
        RVec q;
        for (double x : r) {
            if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "non-finite root coordinate");
            double scaled = std::ldexp(x, 20);
            if (scaled != std::nearbyint(scaled) || std::abs(x) > 1e6) {
                dyadic = false;
                break;
            }
            q.push_back(Rational::from_double(x));
        }
        if (!dyadic) break;
        exact.push_back(std::move(q));
    }
    if (dyadic) return from_rational(dim, std::move(exact));
    RootSystem s;
    s.dim_ = dim;
    s.exact_ = false;
    s.roots_ = std::move(roots);
    s.validate();
    return s;
}

RootSystem RootSystem::orthogonal(int d, int k)
{
    if (d < 1 || k < 0 || k > d) throw Error(ErrorCode::invalid_argument, "need 0 <= k <= d");
    std::vector<RVec> roots;
    for (int i = d - k; i < d; ++i) {
        RVec e(d, Rational(0));
        e[i] = Rational(1);
        roots.push_back(e);
        e[i] = Rational(-1);
        roots.push_back(e);
    }
    return from_rational(d, std::move(roots));
}

RootSystem RootSystem::a2()
{
    const double h = std::sqrt(3.0) / 2.0;
    return from_double(2, {{1.0, 0.0}, {-1.0, 0.0}, {0.5, h}, {-0.5, -h}, {-0.5, h}, {0.5, -h}});
}

void RootSystem::validate() const
{
    if (dim_ < 1) throw Error(ErrorCode::invalid_argument, "dimension must be positive");
    const std::size_t n = roots_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (exact_ ? is_zero_vec(exact_roots_[i]) : norm(roots_[i]) == 0.0)
            throw Error(ErrorCode::invalid_argument, "zero root");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (exact_) {
                const RVec& a = exact_roots_[i];
                const RVec& b = exact_roots_[j];
                Rational ab = dot(a, b);
                if (ab * ab == dot(a, a) * dot(b, b)) {
                    bool same = a == b;
                    RVec neg = a;
                    for (auto& x : neg) x = -x;
                    if (!same && neg != b) throw Error(ErrorCode::invalid_argument, "root system is not reduced");
                }
                RVec img = reflect(a, b);
                if (std::find(exact_roots_.begin(), exact_roots_.end(), img) == exact_roots_.end())
                    throw Error(ErrorCode::invalid_argument, "roots not closed under their reflections");
            } else {
                const Vec& a = roots_[i];
                const Vec& b = roots_[j];
                double na = norm(a), nb = norm(b);
                double cosang = dot(a, b) / (na * nb);
                if (std::abs(std::abs(cosang) - 1.0) < 1e-12) {
                    Vec neg = a;
                    for (auto& x : neg) x = -x;
                    if (!close(a, b, na) && !close(neg, b, na))
                        throw Error(ErrorCode::invalid_argument, "root system is not reduced");
                }
                Vec img = reflect(a, b);
                bool found = std::any_of(roots_.begin(), roots_.end(),
                                         [&](const Vec& r) { return close(r, img, nb); });
                if (!found) throw Error(ErrorCode::invalid_argument, "roots not closed under their reflections");
            }
        }
    }
}

std::vector<int> RootSystem::pair_representatives() const
{
    std::vector<int> reps;
    std::vector<bool> used(roots_.size(), false);
    for (std::size_t i = 0; i < roots_.size(); ++i) {
        if (used[i]) continue;
        reps.push_back(static_cast<int>(i));
        used[i] = true;
        for (std::size_t j = i + 1; j < roots_.size(); ++j) {
            Vec neg = roots_[i];
            for (auto& x : neg) x = -x;
            if (close(neg, roots_[j], norm(roots_[i]))) used[j] = true;
        }
    }
    return reps;
}

namespace {

struct Generator {
    MatD m;
    std::optional<MatQ> q;
};

std::vector<GroupElement> closure(const std::vector<Generator>& gens, int dim, bool exact, std::size_t cap,
                                  const std::vector<int>* signs)
{
    std::vector<GroupElement> elems;
    std::map<Key, std::size_t> index;
    GroupElement id;
    id.matrix = MatD::identity(dim);
    if (exact) id.exact = MatQ::identity(dim);
    index[exact ? exact_key(*id.exact) : float_key(id.matrix)] = 0;
    elems.push_back(id);
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
        std::size_t cur = queue.front();
        queue.pop_front();
        for (std::size_t g = 0; g < gens.size(); ++g) {
            GroupElement next;
            next.matrix = elems[cur].matrix * gens[g].m;
            if (exact) {
                next.exact = *elems[cur].exact * *gens[g].q;
                next.matrix = to_double(*next.exact);
            }
            next.word = elems[cur].word;
            next.word.push_back(static_cast<int>(g));
            next.eta = signs ? elems[cur].eta * (*signs)[g] : 1;
            Key key = exact ? exact_key(*next.exact) : float_key(next.matrix);
            auto it = index.find(key);
            if (it != index.end()) {
                if (signs && elems[it->second].eta != next.eta)
                    throw Error(ErrorCode::not_a_homomorphism,
                                "words " + word_string(elems[it->second].word) + " and " + word_string(next.word) +
                                    " give the same element with opposite signs");
                continue;
            }
            if (elems.size() >= cap)
                throw Error(ErrorCode::not_finite_or_too_large,
                            "group closure exceeded " + std::to_string(cap) + " elements");
            index.emplace(std::move(key), elems.size());
            queue.push_back(elems.size());
            elems.push_back(std::move(next));
        }
    }
    return elems;
}

} // namespace

std::vector<GroupElement> generate_group(const RootSystem& system, std::size_t cap)
{
    std::vector<Generator> gens;
    for (int r : system.pair_representatives()) {
        Generator g;
        if (system.exact()) {
            g.q = reflection_matrix(system.exact_roots()[r]);
            g.m = to_double(*g.q);
        } else {
            g.m = reflection_matrix(system.roots()[r]);
        }
        gens.push_back(std::move(g));
    }
    return closure(gens, system.dim(), system.exact(), cap, nullptr);
}

PositiveSimple positive_and_simple(const RootSystem& system, const Vec& x0)
{
    if (static_cast<int>(x0.size()) != system.dim())
        throw Error(ErrorCode::invalid_argument, "basepoint has wrong dimension");
    PositiveSimple ps;
    if (system.exact()) {
        RVec q;
        for (double x : x0) q.push_back(Rational::from_double(x));
        for (std::size_t i = 0; i < system.size(); ++i) {
            Rational p = dot(system.exact_roots()[i], q);
            if (p.is_zero()) throw Error(ErrorCode::degenerate_basepoint, "basepoint lies on a reflection hyperplane");
            if (p.sign() > 0) ps.positive.push_back(static_cast<int>(i));
        }
        for (int a : ps.positive) {
            std::vector<RVec> others;
            for (int b : ps.positive)
                if (b != a) others.push_back(system.exact_roots()[b]);
            if (!in_cone(others, system.exact_roots()[a], Rational(0))) ps.simple.push_back(a);
        }
    } else {
        double nx = norm(x0);
        for (std::size_t i = 0; i < system.size(); ++i) {
            double p = dot(system.roots()[i], x0);
            if (std::abs(p) <= kTol * nx * norm(system.roots()[i]))
                throw Error(ErrorCode::degenerate_basepoint, "basepoint lies on a reflection hyperplane");
            if (p > 0) ps.positive.push_back(static_cast<int>(i));
        }
        for (int a : ps.positive) {
            std::vector<Vec> others;
            for (int b : ps.positive)
                if (b != a) others.push_back(system.roots()[b]);
            if (!in_cone(others, system.roots()[a], 1e-10)) ps.simple.push_back(a);
        }
    }
    return ps;
}

SignedChamber assign_homomorphism(const RootSystem& system, const Vec& x0, const std::vector<int>& eta_on_generators,
                                  std::size_t cap)
{
    PositiveSimple ps = positive_and_simple(system, x0);
    if (eta_on_generators.size() != ps.simple.size())
        throw Error(ErrorCode::invalid_argument, "expected " + std::to_string(ps.simple.size()) +
                                                     " wall signs, got " + std::to_string(eta_on_generators.size()));
    for (int s : eta_on_generators)
        if (s != 1 && s != -1) throw Error(ErrorCode::invalid_argument, "wall signs must be +1 or -1");

    SignedChamber c;
    c.system_ = system;
    c.basepoint_ = x0;
    c.positive_ = ps.positive;
    c.simple_index_ = ps.simple;
    c.eta_ = eta_on_generators;
    std::vector<Generator> gens;
    std::vector<RVec> simple_exact;
    for (int s : ps.simple) {
        c.simple_.push_back(system.roots()[s]);
        Generator g;
        if (system.exact()) {
            c.simple_exact_.push_back(system.exact_roots()[s]);
            g.q = reflection_matrix(system.exact_roots()[s]);
            g.m = to_double(*g.q);
        } else {
            g.m = reflection_matrix(system.roots()[s]);
        }
        gens.push_back(std::move(g));
    }
    {
        std::vector<Vec> rows = c.simple_;
        if (rank_of(rows, 1e-10) != static_cast<int>(rows.size()))
            throw Error(ErrorCode::invalid_argument, "simple roots are linearly dependent");
    }
    c.group_ = closure(gens, system.dim(), system.exact(), cap, &c.eta_);
    return c;
}

bool SignedChamber::contains(const Vec& x) const { return classify(x).interior; }

PointLocation SignedChamber::classify(const Vec& x) const
{
    PointLocation loc;
    bool closure_ok = true;
    bool interior = true;
    for (std::size_t i = 0; i < simple_.size(); ++i) {
        int s = 0;
        bool done = false;
        if (system_.exact()) {
            try {
                RVec q;
                for (double v : x) q.push_back(Rational::from_double(v));
                s = dot(simple_exact_[i], q).sign();
                done = true;
            } catch (const Error&) {
            }
        }
        if (!done) {
            double p = dot(simple_[i], x);
            double tol = kTol * std::max(1.0, norm(x)) * norm(simple_[i]);
            s = std::abs(p) <= tol ? 0 : (p > 0 ? 1 : -1);
        }
        if (s < 0) closure_ok = false;
        if (s <= 0) interior = false;
        if (s == 0) loc.walls.push_back(static_cast<int>(i));
    }
    loc.interior = interior;
    loc.on_wall = closure_ok && !loc.walls.empty();
    return loc;
}

std::optional<std::vector<int>> SignedChamber::orthogonal_axes() const
{
    std::vector<int> axes;
    for (const auto& a : simple_) {
        int axis = -1;
        for (int i = 0; i < static_cast<int>(a.size()); ++i) {
            if (a[i] == 0.0) continue;
            if (axis >= 0 || a[i] < 0) return std::nullopt;
            axis = i;
        }
        axes.push_back(axis);
    }
    return axes;
}

std::optional<std::size_t> SignedChamber::find(const MatD& m) const
{
    Key k = float_key(m);
    for (std::size_t i = 0; i < group_.size(); ++i)
        if (float_key(group_[i].matrix) == k) return i;
    return std::nullopt;
}

bool chamber_contains(const SignedChamber& chamber, const Vec& x) { return chamber.contains(x); }

std::string word_string(const std::vector<int>& word)
{
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < word.size(); ++i) os << (i ? "," : "") << word[i];
    os << "]";
    return os.str();
}

} // namespace etahardy
