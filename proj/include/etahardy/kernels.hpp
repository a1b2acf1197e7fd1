#pragma once

#include "etahardy/geometry.hpp"
#include "etahardy/gridfn.hpp"
#include "etahardy/pcfunction.hpp"

#include <optional>
#include <string>
#include <vector>

namespace etahardy {

enum class KernelMode { heat, poisson };
enum class Range { global, local };

const char* to_string(KernelMode m);
const char* to_string(Range r);

// Geometric grid t_min * ratio^j <= t_max; local range keeps t < 1 only.
struct TGrid {
    double t_min = 1.0 / 1024.0;
    double ratio = 2.0;
    double t_max = 1024.0;

    std::vector<double> values(Range range) const;
    std::string str() const;
    // "a:r:b"
    static TGrid parse(const std::string& text);
};

struct KernelConfig {
    TGrid t_grid;
    double h = 1.0 / 16.0;
    // Defaults to [-8, 8]^d when unset.
    std::optional<Box> window;
    int gauss_points = 4;

    Box window_for(int dim) const;
};

double gauss_kernel(double t, const Vec& x);
double poisson_kernel(double t, const Vec& x);

// sum_g eta(g) K_t(gx - y); positive and negative parts are accumulated separately.
double eta_heat_kernel(double t, const Vec& x, const Vec& y, const SignedChamber& chamber);
double eta_poisson_kernel(double t, const Vec& x, const Vec& y, const SignedChamber& chamber);

// Exact integral of p_t(z - y) over y in a box, as a product of erf differences.
double heat_box_integral(double t, const Vec& z, const Box& b);
// Tensor Gauss-Legendre integral of P_t(z - y) over y in a box, subdivided near z.
double poisson_box_integral(double t, const Vec& z, const Box& b, int gauss_points = 4);

// Lattice of cell centres of spacing h inside the window and the open chamber.
std::vector<Vec> chamber_lattice(const SignedChamber& chamber, const KernelConfig& config);

// max over the t-grid of |int_{C+} K^eta_t(x, y) f(y) dy| at every chamber lattice point.
SampledFunction maximal_transform(const PCFunction& f, const SignedChamber& chamber, const KernelConfig& config,
                                  KernelMode mode, Range range);
SampledFunction maximal_transform(const PCFunction& f, const OrthoChamber& chamber, const KernelConfig& config,
                                  KernelMode mode, Range range);

// The same transform at arbitrary points of the chamber.
std::vector<double> maximal_transform_at(const PCFunction& f, const SignedChamber& chamber, const std::vector<Vec>& points,
                                         const KernelConfig& config, KernelMode mode, Range range);

// Whole-space maximal function of F (unsigned kernel, no images) at the given points.
SampledFunction whole_space_maximal(const PCFunction& F, const std::vector<Vec>& points, const KernelConfig& config,
                                    KernelMode mode, Range range);

struct H1Estimate {
    double value = 0;
    Box window;
    double h = 0;
    TGrid t_grid;
    KernelMode mode = KernelMode::heat;
    Range range = Range::global;
    std::size_t points = 0;
};

// Window-relative L1 lattice sum of the maximal transform.
H1Estimate h1_norm_estimate(const PCFunction& f, const SignedChamber& chamber, const KernelConfig& config,
                            KernelMode mode, Range range);
H1Estimate h1_norm_estimate(const PCFunction& f, const OrthoChamber& chamber, const KernelConfig& config,
                            KernelMode mode, Range range);

} // namespace etahardy
