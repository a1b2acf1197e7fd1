#pragma once

#include "etahardy/atoms.hpp"
#include "etahardy/bmo.hpp"
#include "etahardy/kernels.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace etahardy {

struct SuiteConfig {
    std::uint64_t seed = 20240611;
    // Restrict the suite to checks of one module (geometry, gridfn, kernels, atoms, bmo, verify).
    std::optional<std::string> only;
    // Finest cube-family level for the BMO checks.
    int levels = 7;
    Rational kappa{0};
    // Lattice spacing and window radius for the H1 estimates of the duality check.
    double h = 0.25;
    long long window = 4;
    TGrid t_grid{1.0 / 64, 4.0, 64};

    // Stable key=value rendering of every field that influences results.
    std::string canonical() const;
    // 64-bit FNV-1a of canonical(), as 16 hex digits.
    std::string fingerprint() const;
};

struct CheckResult {
    std::string name;
    std::string module;
    // Acceptance criterion number, 0 for supplementary checks.
    int criterion = 0;
    std::string claim;
    bool passed = false;
    // Principal measured quantity (worst ratio, growth rate, constant).
    double measured = 0;
    std::string detail;
};

struct SuiteReport {
    std::string fingerprint;
    SuiteConfig config;
    std::vector<CheckResult> checks; // sorted by name

    bool passed() const;
};

std::vector<std::string> check_names();
std::string check_module(const std::string& name);
// Name of the check implementing acceptance criterion i (1..11).
std::string criterion_check(int i);
CheckResult run_check(const std::string& name, const SuiteConfig& config);
SuiteReport run_suite(const SuiteConfig& config);

nlohmann::ordered_json report_to_json(const SuiteReport& report);
std::string report_to_markdown(const SuiteReport& report);

// Deterministic per-check random source derived from the suite seed and a label.
std::mt19937_64 seeded_rng(std::uint64_t seed, const std::string& label);
std::uint64_t fnv1a(const std::string& text);

// Random exact function: up to n cells of side 2^-level inside region with values k/2,
// 0 < |k| <= 8.
PCFunction random_pcfunction(std::mt19937_64& rng, const Box& region, int level, int n, const Box& window);
// Random admissible atom for the chamber: cube of side 2^-level with corner on the grid of
// side/grid inside [0, 2]^d (shifted into the closed chamber), kind A (mean zero, 4Q clear of
// every minus wall), B (2Q clear, 4Q crossing a minus wall) or classical (mean zero, no
// constraint). Returns nullopt when the draw is not admissible.
std::optional<Atom> random_chamber_atom(std::mt19937_64& rng, const OrthoChamber& chamber, int level, long long grid,
                                        AtomKind kind);

struct DualityResult {
    double pairing = 0;
    double bmo = 0;
    double h1 = 0;
    // |pairing| / (bmo * h1); infinite when the denominator vanishes.
    double ratio = 0;
};

// L_b(f) = int_{C+} b f, exact, against the eta-BMO norm of b (bmo flavour for local lists)
// and the H1 estimate of the reconstructed f.
DualityResult duality_pairing(const PCFunction& b, const AtomList& f, const OrthoChamber& chamber,
                              const CubeFamily& family, const KernelConfig& kernel);

struct EmbeddingResult {
    bool h1_ok = false;
    double l1_in = 0;
    double l1_out = 0;
    double constant = 1;
    bool bmo_ok = false;
    double M2_low = 0;
    double M2_high = 0;
    std::string detail;
};

// eta1 <= eta2 componentwise. H1 side: the eta1 atoms are extended, restricted to the plus
// half-spaces of eta1 and decomposed for eta2. BMO side: M2 of g for eta1 is at most M2 for eta2.
EmbeddingResult embedding_check(const std::vector<int>& eta1, const std::vector<int>& eta2, const AtomList& f,
                                const PCFunction& g, const CubeFamily& family, const Rational& kappa = Rational(0));

struct DistinctnessResult {
    int wall = 0;
    std::vector<int> levels;
    std::vector<double> matched;
    std::vector<double> mismatched;
    // Smallest per-level increase of the mismatched norm.
    double min_growth = 0;
    // max/min - 1 of the matched norms.
    double matched_variation = 0;
};

// Truncated logarithm centred on the first wall where the characters differ, sampled at each
// level and measured under both characters with family depth equal to the sampling level.
DistinctnessResult distinctness_probe(int d, const std::vector<int>& eta1, const std::vector<int>& eta2,
                                      const std::vector<int>& levels);

} // namespace etahardy
