#pragma once

#include "etahardy/box.hpp"
#include "etahardy/gridfn.hpp"
#include "etahardy/pcfunction.hpp"

#include <optional>
#include <string>
#include <vector>

namespace etahardy {

enum class Centering { mean, best };
enum class BmoFlavor { BMO, BMOstar, bmo, bmostar };

const char* to_string(Centering c);
const char* to_string(BmoFlavor f);
BmoFlavor bmo_flavor_from_string(const std::string& s);
Centering centering_of(BmoFlavor f);
bool is_local(BmoFlavor f);

// A cube of the family with its grid label; `shift[a]` indexes CubeFamily::shifts.
struct FamilyCube {
    Cube cube;
    int level = 0;
    std::vector<int> shift;

    std::string str() const;
};

// Dyadic cubes of side 2^-m, min_level <= m <= max_level, on grids shifted by
// shifts[j] * 2^-m per axis, lying inside the window. Optional filters narrow the set.
struct CubeFamily {
    Box window;
    int min_level = 0;
    int max_level = 7;
    std::vector<Rational> shifts{Rational(0), Rational(1, 3), Rational(-1, 3)};
    // Length filters: keep l(Q) < shorter_than and/or l(Q) >= at_least.
    std::optional<Rational> shorter_than;
    std::optional<Rational> at_least;
    // Keep cubes inside the closed chamber.
    std::optional<OrthoChamber> chamber;
    // Keep cubes with dist(Q, {x_i = 0}) <= kappa * l(Q) for some listed axis.
    std::vector<int> adjacent_to;
    Rational kappa{0};

    static CubeFamily standard(int dim, int max_level = 7);

    int dim() const { return window.dim(); }
    // Enumeration order: level, shift combination, then lexicographic grid index.
    std::vector<FamilyCube> cubes(const std::optional<Box>& focus = std::nullopt) const;
    std::size_t size(const std::optional<Box>& focus = std::nullopt) const;
    bool keeps(const FamilyCube& q) const;
    std::string str() const;
};

// (1/|Q|) int_Q |F - c| with c = F_Q (mean) or the weighted median (best); the zero
// region of F inside Q counts. Exact when F is exact.
Scalar oscillation(const PCFunction& F, const Cube& Q, Centering centering);
// (1/|Q|) int_Q |F|.
Scalar mean_abs(const PCFunction& F, const Cube& Q);

struct BmoReport {
    double value = 0;
    // Supremum of the oscillations (over l < a for the local flavours).
    double oscillation_part = 0;
    // Supremum of mean |F| over l >= a (local flavours only).
    double mean_part = 0;
    std::optional<FamilyCube> argmax;
    std::optional<FamilyCube> argmax_mean;
    BmoFlavor flavor = BmoFlavor::BMOstar;
    Rational breaking_point{1};
    bool modulo_constants = false;
    std::size_t cubes = 0;
    std::string family;
};

BmoReport bmo_norm(const PCFunction& F, const CubeFamily& family, BmoFlavor flavor,
                   const Rational& breaking_point = Rational(1));

// bmo_norm of E_eta f; the family window must be symmetric under the group.
BmoReport eta_bmo_norm(const PCFunction& f, const OrthoChamber& chamber, const CubeFamily& family, BmoFlavor flavor,
                       const Rational& breaking_point = Rational(1));

enum class IntrinsicMode { global, local };

struct IntrinsicReport {
    double M1 = 0;
    double M2 = 0;
    std::optional<FamilyCube> argmax1;
    std::optional<FamilyCube> argmax2;
    std::size_t cubes = 0;
};

// M1: mean-centred oscillation over family cubes inside the closed chamber (l < 1 in local
// mode). M2: mean |f| over cubes within kappa * l(Q) of a minus wall (with l < 1 in local
// mode), plus all cubes with l >= 1 in local mode.
IntrinsicReport intrinsic_M1_M2(const PCFunction& f, const OrthoChamber& chamber, const CubeFamily& family,
                                IntrinsicMode mode, const Rational& kappa = Rational(0));

// F 1_+ + (F 1_+) o sigma_axis.
PCFunction even_extend_bmo(const PCFunction& F, int axis);
// F 1_+ for F odd across x_axis = 0 (checked to `tolerance` in float mode).
PCFunction odd_restrict_bmo(const PCFunction& F, int axis, double tolerance = 1e-12);

struct SampleParams {
    int dim = 1;
    int level = 6;
    // Centre of the logarithmic singularity (psi, broken_log); dyadic at the given level.
    RVec centre;
    // Hyperplane x_axis = 0 for broken_log.
    int axis = 0;
    std::optional<Box> window;
};

struct Sample {
    PCFunction function;
    std::string description;
};

// psi: max(log 1/|x - x0|, 0); phi (d = 1): sgn x 1_[1,3](|x|) log 1/||x| - 2|;
// broken_log: psi with the sign of x_axis. Cell values are point values at cell centres;
// cells touching the singularity take the value at the nearest centre one level finer.
Sample sample_function(const std::string& name, const SampleParams& params);

} // namespace etahardy
