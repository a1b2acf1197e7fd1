#pragma once

#include "etahardy/box.hpp"
#include "etahardy/gridfn.hpp"
#include "etahardy/pcfunction.hpp"
#include "etahardy/rational.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace etahardy {

enum class AtomKind { A, B, localA, localB, classical, localClassical };
enum class AtomMode { global, local };

const char* to_string(AtomKind k);
const char* to_string(AtomMode m);
AtomKind atom_kind_from_string(const std::string& s);
AtomMode atom_mode_from_string(const std::string& s);
bool is_local(AtomKind k);

// The atom is sqrt(gain_sq) * payload. Keeping the square of the scale exact lets
// irrational normalisations live alongside exact rational payloads.
struct Atom {
    PCFunction payload;
    Rational gain_sq{1};
    Cube cube;
    std::vector<int> I0;
    std::vector<int> I1;
    AtomKind kind = AtomKind::A;

    int dim() const { return cube.dim(); }
    // ||atom||_2^2 = gain_sq * ||payload||_2^2.
    Rational norm_sq() const;
};

// Every Whitney cube D of the orthant {x_i > 0, i in walls} that lies inside box, each
// carrying the atom |D|^-1 1_D with coefficient weight * |D|. The members sum to
// weight * 1_box. The box has lo_i = 0 on every wall axis.
struct WhitneyFamily {
    Box box;
    std::vector<int> walls;
    std::vector<int> I0;
    std::vector<int> I1;
    AtomKind member_kind = AtomKind::B;

    // Coarsest level with members.
    int first_level() const;
    // Member cubes of side 2^-level, in lexicographic order of their corners.
    std::vector<Cube> members(int level) const;
    Atom member_atom(const Cube& d) const;
};

// Image of a Whitney family under the eta-extension; each member extends to the
// classical atoms described in extend_atoms.
struct ExtendedFamily {
    WhitneyFamily source;
    OrthoChamber chamber;
};

// lambda * atom = weight * payload for an Atom; a family contributes weight * 1_box
// (or its extension).
struct Term {
    Rational weight;
    std::variant<Atom, WhitneyFamily, ExtendedFamily> body;

    bool is_atom() const { return std::holds_alternative<Atom>(body); }
    const Atom& atom() const { return std::get<Atom>(body); }
    // Signed coefficient lambda of an Atom term.
    double coefficient() const;
    // Sum of |coefficients| carried by the term.
    double l1() const;
};

struct AtomList {
    Box window;
    AtomMode mode = AtomMode::global;
    std::vector<int> eta;
    std::vector<Term> terms;

    int dim() const { return window.dim(); }
    double l1() const;
    PCFunction reconstruct() const;
};

struct AtomValidation {
    bool ok = true;
    std::string clause;
    std::string detail;
};

AtomValidation validate_atom(const Atom& atom, AtomMode mode);
// Checks the family layout and the members of its first `levels` levels.
AtomValidation validate_family(const WhitneyFamily& family, AtomMode mode, int levels = 3);

// A local atom with ||a||_2 <= 1 whose support fits in a cube of side < 1, re-cubed on the
// side-2 cube at the support corner. The atom is rescaled by 2^(-d/2) to meet the size bound.
Atom as_large_local_atom(const Atom& atom);

// Reflection transforms on lists of concrete classical atoms.
AtomList even_restrict(const AtomList& list, int axis);
AtomList odd_extend(const AtomList& list, int axis);

struct WhitneyCell {
    int level = 0;
    Cube cube;
};

// Whitney cells D for the hyperplane x_n = 0 (side = distance = 2^-m) meeting Q in positive
// measure, for levels up to max_level.
std::vector<WhitneyCell> whitney_cells(const Cube& Q, int n, const std::vector<int>& walls, int max_level);
// m0 with 2^(-m0-1) < l(Q) <= 2^-m0.
int whitney_base_level(const Cube& Q);

enum class SplitCase { inside = 1, becomes_b = 2, straddling = 3, dropped = 4, family = 5 };

struct SplitOutcome {
    SplitCase split_case = SplitCase::inside;
    std::vector<Term> terms;
    // Sum of |coefficients| emitted for this input term.
    double emitted_l1 = 0;
};

SplitOutcome split_term(const Term& term, int n, AtomMode mode);
AtomList halfspace_split(const AtomList& list, int n, AtomMode mode);

struct Decomposition {
    AtomList atoms;
    double l1_in = 0;
    double l1_out = 0;
    // (1 + (2^d (2^d - 1))^(1/2))^k
    double constant = 1;
    std::vector<double> step_l1;
};

double decomposition_constant(int d, int k);

// Classical atoms supported in the closed half-spaces of the plus walls, split along the
// minus walls in ascending order.
Decomposition decompose_eta(const AtomList& list, const OrthoChamber& chamber, AtomMode mode);

struct ExtensionRecord {
    std::size_t term = 0;
    std::vector<int> J;
    Rational volume_ratio; // |Q_J| / |Q|
    bool mean_zero = true;
};

struct Extension {
    AtomList atoms;
    std::vector<ExtensionRecord> b_records;
};

// Classical atoms of the eta-extension of an (eta, A/B) atom list.
Extension extend_atoms(const AtomList& list, const OrthoChamber& chamber);

// Concrete extended atoms of the members of one level of an extended family.
std::vector<Term> extend_family_members(const ExtendedFamily& e, const Rational& weight, int level,
                                        std::vector<ExtensionRecord>* records = nullptr);

} // namespace etahardy
