#pragma once

#include "etahardy/geometry.hpp"
#include "etahardy/pcfunction.hpp"

#include <cstddef>
#include <vector>

namespace etahardy {

// Chamber of an orthogonal system: {x : x_a > 0 for a in axes}. Wall a carries the
// sign (-1)^eta_bits[j]; a group element is a subset of axes to flip.
class OrthoChamber {
public:
    OrthoChamber() = default;
    OrthoChamber(int dim, std::vector<int> axes, std::vector<int> eta_bits);

    // Walls on the last k coordinates, as in R_k.
    static OrthoChamber standard(int d, int k, std::vector<int> eta_bits);
    // Requires simple roots that are positive multiples of basis vectors.
    static OrthoChamber from_signed(const SignedChamber& chamber);

    int dim() const { return dim_; }
    int k() const { return static_cast<int>(axes_.size()); }
    const std::vector<int>& axes() const { return axes_; }
    const std::vector<int>& eta_bits() const { return eta_bits_; }
    int wall_sign(int j) const { return eta_bits_[j] ? -1 : 1; }
    // Axes whose wall sign is +1 (I_{eta,0}) or -1 (I_{eta,1}).
    std::vector<int> plus_axes() const;
    std::vector<int> minus_axes() const;

    std::size_t order() const { return std::size_t{1} << axes_.size(); }
    // Diagonal of group element g: -1 on flipped axes.
    std::vector<int> signs(std::size_t g) const;
    int eta(std::size_t g) const;

    bool contains(const Vec& x) const;
    // Box inside the closed chamber.
    bool contains_box(const Box& b) const;
    Box symmetric_hull(const Box& b) const;

    SignedChamber to_signed() const;

private:
    int dim_ = 0;
    std::vector<int> axes_;
    std::vector<int> eta_bits_;
};

// E_eta f(gx) = eta(g) f(x); f's cells must lie in the closed chamber.
PCFunction eta_extend(const PCFunction& f, const OrthoChamber& chamber);
PCFunction eta_extend(const PCFunction& f, const SignedChamber& chamber);

// A_eta F(y) = |W|^-1 sum_g eta(g) F(gy).
PCFunction eta_average(const PCFunction& F, const OrthoChamber& chamber);
PCFunction eta_average(const PCFunction& F, const SignedChamber& chamber);
PointFunction eta_average(PointFunction F, const SignedChamber& chamber);
SampledFunction eta_average(const SampledFunction& F, const PointFunction& evaluator, const SignedChamber& chamber);

// |int E_eta f . F - |W| int f . A_eta F|; exactly zero in exact mode.
Scalar pairing_identity_defect(const PCFunction& f, const PCFunction& F, const OrthoChamber& chamber);

bool is_eta_symmetric(const PCFunction& F, const OrthoChamber& chamber);

// F restricted to the chamber g(C+).
PCFunction restrict_to_chamber(const PCFunction& F, const OrthoChamber& chamber, std::size_t g = 0);

} // namespace etahardy
