#include "etahardy/kernels.hpp"

#include "etahardy/error.hpp"
#include "etahardy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace etahardy {

namespace {

void require_positive_time(double t)
{
    if (!(t > 0) || !std::isfinite(t)) throw Error(ErrorCode::invalid_argument, "kernel time must be positive and finite");
}

double norm_sq(const Vec& x)
{
    double s = 0;
    for (double v : x) s += v * v;
    return s;
}

double poisson_constant(int d)
{
    return std::tgamma((d + 1) / 2.0) / std::pow(std::numbers::pi, (d + 1) / 2.0);
}

// Adds values of one sign in increasing order so that equal multisets give equal sums.
double signed_sum(std::vector<double>& pos, std::vector<double>& neg)
{
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    double p = 0, n = 0;
    for (double v : pos) p += v;
    for (double v : neg) n += v;
    return p - n;
}

template <class Kernel>
double image_sum(double t, const Vec& x, const Vec& y, const SignedChamber& chamber, Kernel kernel)
{
    require_positive_time(t);
    std::vector<double> pos, neg;
    Vec diff(x.size());
    for (const auto& g : chamber.group()) {
        Vec gx = g.matrix.apply(x);
        for (std::size_t a = 0; a < x.size(); ++a) diff[a] = gx[a] - y[a];
        double v = kernel(t, diff);
        (g.eta > 0 ? pos : neg).push_back(v);
    }
    return signed_sum(pos, neg);
}

// int_a^b of the 1D heat kernel, using erfc on the tail side to avoid cancellation.
double gauss_interval(double a, double b, double t)
{
    const double s = 2.0 * std::sqrt(t);
    const double A = a / s, B = b / s;
    if (A >= 0) return 0.5 * (std::erfc(A) - std::erfc(B));
    if (B <= 0) return 0.5 * (std::erfc(-B) - std::erfc(-A));
    return 0.5 * (std::erf(B) - std::erf(A));
}

struct GaussRule {
    std::vector<double> nodes;   // on [0, 1]
    std::vector<double> weights; // summing to 1
};

GaussRule gauss_legendre(int n)
{
    GaussRule rule;
    for (int i = 1; i <= n; ++i) {
        double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes.push_back(0.5 * (1 - x));
        rule.weights.push_back(1.0 / ((1 - x * x) * dp * dp));
    }
    return rule;
}

const GaussRule& cached_rule(int n)
{
    static const std::vector<GaussRule> rules = [] {
        std::vector<GaussRule> r(1);
        for (int k = 1; k <= 12; ++k) r.push_back(gauss_legendre(k));
        return r;
    }();
    if (n < 1 || n >= static_cast<int>(rules.size()))
        throw Error(ErrorCode::config_error, "gauss_points must lie in [1, 12]");
    return rules[n];
}

struct DBox {
    Vec lo, hi;
};

double tensor_gauss(double t, const Vec& z, const DBox& b, const GaussRule& rule)
{
    const int d = static_cast<int>(z.size());
    const int n = static_cast<int>(rule.nodes.size());
    const double c = poisson_constant(d) * t;
    double vol = 1;
    for (int a = 0; a < d; ++a) vol *= b.hi[a] - b.lo[a];
    std::vector<int> idx(d, 0);
    double sum = 0;
    while (true) {
        double r2 = 0, w = 1;
        for (int a = 0; a < d; ++a) {
            double y = b.lo[a] + rule.nodes[idx[a]] * (b.hi[a] - b.lo[a]);
            r2 += (z[a] - y) * (z[a] - y);
            w *= rule.weights[idx[a]];
        }
        sum += w * c / std::pow(t * t + r2, (d + 1) / 2.0);
        int a = 0;
        while (a < d && ++idx[a] == n) idx[a++] = 0;
        if (a == d) break;
    }
    return sum * vol;
}

double adaptive_poisson(double t, const Vec& z, const DBox& b, const GaussRule& rule, int depth)
{
    const int d = static_cast<int>(z.size());
    double diam2 = 0, dist2 = 0;
    int widest = 0;
    for (int a = 0; a < d; ++a) {
        double w = b.hi[a] - b.lo[a];
        diam2 += w * w;
        if (w > b.hi[widest] - b.lo[widest]) widest = a;
        double gap = std::max({b.lo[a] - z[a], z[a] - b.hi[a], 0.0});
        dist2 += gap * gap;
    }
    double scale = std::max(t, std::sqrt(dist2));
    if (diam2 <= scale * scale || depth >= 64) return tensor_gauss(t, z, b, rule);
    DBox left = b, right = b;
    double mid = 0.5 * (b.lo[widest] + b.hi[widest]);
    left.hi[widest] = mid;
    right.lo[widest] = mid;
    return adaptive_poisson(t, z, left, rule, depth + 1) + adaptive_poisson(t, z, right, rule, depth + 1);
}

DBox to_dbox(const Box& b)
{
    DBox out;
    for (int a = 0; a < b.dim(); ++a) {
        out.lo.push_back(b.lo[a].to_double());
        out.hi.push_back(b.hi[a].to_double());
    }
    return out;
}

double poisson_dbox(double t, const Vec& z, const DBox& b, const GaussRule& rule)
{
    const int d = static_cast<int>(z.size());
    if (d == 1)
        return (std::atan((b.hi[0] - z[0]) / t) - std::atan((b.lo[0] - z[0]) / t)) / std::numbers::pi;
    // Split at z so that the singular point sits on a corner of every piece.
    std::vector<DBox> pieces{b};
    for (int a = 0; a < d; ++a) {
        if (!(b.lo[a] < z[a] && z[a] < b.hi[a])) continue;
        std::vector<DBox> next;
        for (auto p : pieces) {
            DBox q = p;
            p.hi[a] = z[a];
            q.lo[a] = z[a];
            next.push_back(p);
            next.push_back(q);
        }
        pieces = std::move(next);
    }
    double sum = 0;
    for (const auto& p : pieces) sum += adaptive_poisson(t, z, p, rule, 0);
    return sum;
}

std::vector<double> time_values(const KernelConfig& config, Range range)
{
    if (!(config.h > 0)) throw Error(ErrorCode::config_error, "spacing h must be positive");
    auto ts = config.t_grid.values(range);
    if (ts.empty()) throw Error(ErrorCode::config_error, "the t-grid is empty for the requested range");
    return ts;
}

struct Image {
    std::vector<int> signs;
    int eta = 1;
};

struct PlainCells {
    std::vector<DBox> boxes;
    std::vector<double> values;
};

PlainCells plain_cells(const PCFunction& f)
{
    PlainCells out;
    for (const auto& c : f.cells()) {
        double v = c.value.to_double();
        if (v == 0) continue;
        out.boxes.push_back(to_dbox(c.box));
        out.values.push_back(v);
    }
    return out;
}

// Heat transform through per-axis tables: the box integral factorises over axes, so every
// image coordinate s*x_a is paired once with every distinct cell interval on axis a.
std::vector<double> separable_heat(const std::vector<Vec>& points, const std::vector<Image>& images,
                                   const PlainCells& cells, const std::vector<double>& ts)
{
    const std::size_t n_pts = points.size();
    std::vector<double> out(n_pts, 0.0);
    if (n_pts == 0 || cells.values.empty()) return out;
    const int d = static_cast<int>(points[0].size());
    const std::size_t nT = ts.size();
    const std::size_t nC = cells.values.size();

    std::vector<std::vector<std::pair<double, double>>> intervals(d);
    std::vector<std::vector<std::size_t>> cell_iv(d, std::vector<std::size_t>(nC));
    std::vector<std::vector<double>> coords(d);
    for (int a = 0; a < d; ++a) {
        auto& iv = intervals[a];
        for (const auto& b : cells.boxes) iv.emplace_back(b.lo[a], b.hi[a]);
        std::sort(iv.begin(), iv.end());
        iv.erase(std::unique(iv.begin(), iv.end()), iv.end());
        for (std::size_t c = 0; c < nC; ++c)
            cell_iv[a][c] = std::lower_bound(iv.begin(), iv.end(), std::make_pair(cells.boxes[c].lo[a], cells.boxes[c].hi[a])) - iv.begin();
        auto& xs = coords[a];
        for (const auto& p : points)
            for (const auto& im : images) xs.push_back(im.signs[a] * p[a]);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    }

    // table[a][(coord * n_iv + iv) * nT + t]
    std::vector<std::vector<double>> table(d);
    for (int a = 0; a < d; ++a) {
        const std::size_t n_iv = intervals[a].size();
        table[a].assign(coords[a].size() * n_iv * nT, 0.0);
        parallel_for(coords[a].size(), [&, a](std::size_t i) {
            double u = coords[a][i];
            for (std::size_t k = 0; k < n_iv; ++k)
                for (std::size_t j = 0; j < nT; ++j)
                    table[a][(i * n_iv + k) * nT + j] =
                        gauss_interval(intervals[a][k].first - u, intervals[a][k].second - u, ts[j]);
        }, 16);
    }

    parallel_for(n_pts, [&](std::size_t p) {
        std::vector<double> pos(nT, 0.0), neg(nT, 0.0), term(nT);
        std::vector<const double*> rows(d);
        std::vector<std::size_t> coord_index(d);
        for (const auto& im : images) {
            for (int a = 0; a < d; ++a) {
                double u = im.signs[a] * points[p][a];
                coord_index[a] = std::lower_bound(coords[a].begin(), coords[a].end(), u) - coords[a].begin();
            }
            for (std::size_t c = 0; c < nC; ++c) {
                double v = im.eta * cells.values[c];
                for (int a = 0; a < d; ++a)
                    rows[a] = &table[a][(coord_index[a] * intervals[a].size() + cell_iv[a][c]) * nT];
                auto& acc = v > 0 ? pos : neg;
                double av = std::abs(v);
                for (std::size_t j = 0; j < nT; ++j) {
                    double prod = av;
                    for (int a = 0; a < d; ++a) prod *= rows[a][j];
                    acc[j] += prod;
                }
            }
        }
        double best = 0;
        for (std::size_t j = 0; j < nT; ++j) best = std::max(best, std::abs(pos[j] - neg[j]));
        out[p] = best;
    });
    return out;
}

// Direct evaluation for any kernel: per point, per image, per cell.
std::vector<double> direct_transform(const std::vector<Vec>& points, const std::vector<MatD>& mats,
                                     const std::vector<int>& etas, const PlainCells& cells,
                                     const std::vector<double>& ts, KernelMode mode, int gauss_points)
{
    const GaussRule& rule = cached_rule(gauss_points);
    std::vector<double> out(points.size(), 0.0);
    if (cells.values.empty()) return out;
    const std::size_t nT = ts.size();
    parallel_for(points.size(), [&](std::size_t p) {
        std::vector<double> pos(nT, 0.0), neg(nT, 0.0);
        for (std::size_t g = 0; g < mats.size(); ++g) {
            Vec z = mats[g].apply(points[p]);
            for (std::size_t c = 0; c < cells.values.size(); ++c) {
                double v = etas[g] * cells.values[c];
                auto& acc = v > 0 ? pos : neg;
                for (std::size_t j = 0; j < nT; ++j) {
                    double integral;
                    if (mode == KernelMode::heat) {
                        integral = 1;
                        for (std::size_t a = 0; a < z.size(); ++a)
                            integral *= gauss_interval(cells.boxes[c].lo[a] - z[a], cells.boxes[c].hi[a] - z[a], ts[j]);
                    } else {
                        integral = poisson_dbox(ts[j], z, cells.boxes[c], rule);
                    }
                    acc[j] += std::abs(v) * integral;
                }
            }
        }
        double best = 0;
        for (std::size_t j = 0; j < nT; ++j) best = std::max(best, std::abs(pos[j] - neg[j]));
        out[p] = best;
    }, 4);
    return out;
}

std::vector<std::vector<double>> axis_centres(const Box& window, double h, const std::vector<int>& positive_axes)
{
    const int d = window.dim();
    std::vector<std::vector<double>> out(d);
    for (int a = 0; a < d; ++a) {
        double lo = window.lo[a].to_double(), hi = window.hi[a].to_double();
        if (std::find(positive_axes.begin(), positive_axes.end(), a) != positive_axes.end()) lo = std::max(lo, 0.0);
        if (hi <= lo) continue;
        auto n = static_cast<long long>(std::floor((hi - lo) / h + 1e-9));
        for (long long i = 0; i < n; ++i) out[a].push_back(lo + (i + 0.5) * h);
    }
    return out;
}

std::vector<Vec> tensor_points(const std::vector<std::vector<double>>& axes)
{
    std::vector<Vec> out;
    const std::size_t d = axes.size();
    if (d == 0) return out;
    for (const auto& ax : axes)
        if (ax.empty()) return out;
    std::vector<std::size_t> idx(d, 0);
    bool more = true;
    while (more) {
        Vec x(d);
        for (std::size_t a = 0; a < d; ++a) x[a] = axes[a][idx[a]];
        out.push_back(std::move(x));
        more = false;
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] < axes[a].size()) {
                more = true;
                break;
            }
            idx[a] = 0;
        }
    }
    return out;
}

SampledFunction make_sampled(const KernelConfig& config, int d, std::vector<Vec> points, std::vector<double> values)
{
    Box w = config.window_for(d);
    SampledFunction s;
    s.h = config.h;
    for (int a = 0; a < d; ++a) {
        s.window_lo.push_back(w.lo[a].to_double());
        s.window_hi.push_back(w.hi[a].to_double());
    }
    s.points = std::move(points);
    s.values = std::move(values);
    return s;
}

void check_dim(const PCFunction& f, int d)
{
    if (f.dim() != d) throw Error(ErrorCode::invalid_argument, "function dimension does not match the chamber");
}

H1Estimate summarise(const SampledFunction& m, const KernelConfig& config, int d, KernelMode mode, Range range)
{
    H1Estimate e;
    double cell = std::pow(config.h, d);
    for (double v : m.values) e.value += v;
    e.value *= cell;
    e.window = config.window_for(d);
    e.h = config.h;
    e.t_grid = config.t_grid;
    e.mode = mode;
    e.range = range;
    e.points = m.points.size();
    return e;
}

} // namespace

const char* to_string(KernelMode m) { return m == KernelMode::heat ? "heat" : "poisson"; }
const char* to_string(Range r) { return r == Range::global ? "global" : "local"; }

std::vector<double> TGrid::values(Range range) const
{
    if (!(t_min > 0) || !(ratio > 1) || !std::isfinite(t_max))
        throw Error(ErrorCode::config_error, "t-grid needs t_min > 0, ratio > 1 and a finite t_max");
    std::vector<double> out;
    for (int j = 0;; ++j) {
        double t = t_min * std::pow(ratio, j);
        if (t > t_max * (1 + 1e-12)) break;
        if (range == Range::local && t >= 1) break;
        out.push_back(t);
    }
    return out;
}

std::string TGrid::str() const
{
    std::ostringstream os;
    os.precision(17);
    os << t_min << ":" << ratio << ":" << t_max;
    return os.str();
}

TGrid TGrid::parse(const std::string& text)
{
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            if (item.find('/') != std::string::npos) {
                parts.push_back(Rational::parse(item).to_double());
                continue;
            }
            std::size_t pos = 0;
            double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            parts.push_back(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::config_error, "bad t-grid '" + text + "'");
        }
    }
    if (parts.size() != 3) throw Error(ErrorCode::config_error, "t-grid must have the form a:r:b, got '" + text + "'");
    TGrid g{parts[0], parts[1], parts[2]};
    g.values(Range::global);
    return g;
}

Box KernelConfig::window_for(int dim) const
{
    if (window) {
        if (window->dim() != dim) throw Error(ErrorCode::config_error, "window dimension does not match");
        return *window;
    }
    return Box::symmetric(dim, Rational(8));
}

double gauss_kernel(double t, const Vec& x)
{
    require_positive_time(t);
    const double d = static_cast<double>(x.size());
    return std::pow(4 * std::numbers::pi * t, -d / 2) * std::exp(-norm_sq(x) / (4 * t));
}

double poisson_kernel(double t, const Vec& x)
{
    require_positive_time(t);
    const int d = static_cast<int>(x.size());
    return poisson_constant(d) * t / std::pow(t * t + norm_sq(x), (d + 1) / 2.0);
}

double eta_heat_kernel(double t, const Vec& x, const Vec& y, const SignedChamber& chamber)
{
    return image_sum(t, x, y, chamber, gauss_kernel);
}

double eta_poisson_kernel(double t, const Vec& x, const Vec& y, const SignedChamber& chamber)
{
    return image_sum(t, x, y, chamber, poisson_kernel);
}

double heat_box_integral(double t, const Vec& z, const Box& b)
{
    require_positive_time(t);
    double v = 1;
    for (int a = 0; a < b.dim(); ++a) v *= gauss_interval(b.lo[a].to_double() - z[a], b.hi[a].to_double() - z[a], t);
    return v;
}

double poisson_box_integral(double t, const Vec& z, const Box& b, int gauss_points)
{
    require_positive_time(t);
    return poisson_dbox(t, z, to_dbox(b), cached_rule(gauss_points));
}

std::vector<Vec> chamber_lattice(const SignedChamber& chamber, const KernelConfig& config)
{
    if (!(config.h > 0)) throw Error(ErrorCode::config_error, "spacing h must be positive");
    const int d = chamber.dim();
    Box w = config.window_for(d);
    if (auto axes = chamber.orthogonal_axes()) return tensor_points(axis_centres(w, config.h, *axes));
    std::vector<Vec> out;
    for (auto& x : tensor_points(axis_centres(w, config.h, {})))
        if (chamber.contains(x)) out.push_back(std::move(x));
    return out;
}

SampledFunction maximal_transform(const PCFunction& f, const OrthoChamber& chamber, const KernelConfig& config,
                                  KernelMode mode, Range range)
{
    check_dim(f, chamber.dim());
    if (mode == KernelMode::poisson) return maximal_transform(f, chamber.to_signed(), config, mode, range);
    auto ts = time_values(config, range);
    auto points = tensor_points(axis_centres(config.window_for(chamber.dim()), config.h, chamber.axes()));
    std::vector<Image> images;
    for (std::size_t g = 0; g < chamber.order(); ++g) images.push_back(Image{chamber.signs(g), chamber.eta(g)});
    auto values = separable_heat(points, images, plain_cells(f), ts);
    return make_sampled(config, chamber.dim(), std::move(points), std::move(values));
}

SampledFunction maximal_transform(const PCFunction& f, const SignedChamber& chamber, const KernelConfig& config,
                                  KernelMode mode, Range range)
{
    check_dim(f, chamber.dim());
    if (mode == KernelMode::heat && chamber.orthogonal_axes())
        return maximal_transform(f, OrthoChamber::from_signed(chamber), config, mode, range);
    auto ts = time_values(config, range);
    auto points = chamber_lattice(chamber, config);
    std::vector<MatD> mats;
    std::vector<int> etas;
    for (const auto& g : chamber.group()) {
        mats.push_back(g.matrix);
        etas.push_back(g.eta);
    }
    auto values = direct_transform(points, mats, etas, plain_cells(f), ts, mode, config.gauss_points);
    return make_sampled(config, chamber.dim(), std::move(points), std::move(values));
}

std::vector<double> maximal_transform_at(const PCFunction& f, const SignedChamber& chamber, const std::vector<Vec>& points,
                                         const KernelConfig& config, KernelMode mode, Range range)
{
    check_dim(f, chamber.dim());
    auto ts = time_values(config, range);
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != chamber.dim()) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    if (mode == KernelMode::heat && chamber.orthogonal_axes()) {
        auto ortho = OrthoChamber::from_signed(chamber);
        std::vector<Image> images;
        for (std::size_t g = 0; g < ortho.order(); ++g) images.push_back(Image{ortho.signs(g), ortho.eta(g)});
        return separable_heat(points, images, plain_cells(f), ts);
    }
    std::vector<MatD> mats;
    std::vector<int> etas;
    for (const auto& g : chamber.group()) {
        mats.push_back(g.matrix);
        etas.push_back(g.eta);
    }
    return direct_transform(points, mats, etas, plain_cells(f), ts, mode, config.gauss_points);
}

SampledFunction whole_space_maximal(const PCFunction& F, const std::vector<Vec>& points, const KernelConfig& config,
                                    KernelMode mode, Range range)
{
    auto ts = time_values(config, range);
    const int d = F.dim();
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != d) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    std::vector<double> values;
    if (mode == KernelMode::heat)
        values = separable_heat(points, {Image{std::vector<int>(d, 1), 1}}, plain_cells(F), ts);
    else
        values = direct_transform(points, {MatD::identity(d)}, {1}, plain_cells(F), ts, mode, config.gauss_points);
    return make_sampled(config, d, points, std::move(values));
}

H1Estimate h1_norm_estimate(const PCFunction& f, const SignedChamber& chamber, const KernelConfig& config,
                            KernelMode mode, Range range)
{
    return summarise(maximal_transform(f, chamber, config, mode, range), config, chamber.dim(), mode, range);
}

H1Estimate h1_norm_estimate(const PCFunction& f, const OrthoChamber& chamber, const KernelConfig& config,
                            KernelMode mode, Range range)
{
    return summarise(maximal_transform(f, chamber, config, mode, range), config, chamber.dim(), mode, range);
}

} // namespace etahardy
