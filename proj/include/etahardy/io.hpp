#pragma once

#include "etahardy/atoms.hpp"
#include "etahardy/box.hpp"
#include "etahardy/geometry.hpp"
#include "etahardy/pcfunction.hpp"

#include "json.hpp"

#include <string>

namespace etahardy::io {

using json = nlohmann::ordered_json;

// Parses JSON text; syntax errors become parse-error with line and column.
json parse_text(const std::string& text, const std::string& source = "input");
json read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

json rational_to_json(const Rational& r);
Rational rational_from_json(const json& j);
json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const json& j, bool float_mode);

// Dyadic cubes as {corner, level, side_num}; other cubes as {lo, side}.
json cube_to_json(const Cube& c);
Cube cube_from_json(const json& j);
// Cubes as above, other boxes as {lo, hi}.
json box_to_json(const Box& b);
Box box_from_json(const json& j);

json pcfunction_to_json(const PCFunction& f);
PCFunction pcfunction_from_json(const json& j);
// One row per exported cube: lo..., hi..., value.
std::string pcfunction_to_csv(const PCFunction& f);

struct RootSystemDescriptor {
    RootSystem system;
    Vec basepoint;
    std::vector<int> eta;
};

RootSystemDescriptor root_system_from_json(const json& j);
json root_system_to_json(const RootSystemDescriptor& d);

json chamber_to_json(const OrthoChamber& c);
OrthoChamber chamber_from_json(const json& j);

// AtomList schema: {eta, mode, window?, terms: [...]}. Atom terms carry coeff (the signed
// coefficient) and the exact pair weight/gain_sq; a term without weight uses coeff as weight
// and gain_sq = 1. Family terms have kind "whitney_family" or "extended_family".
json atomlist_to_json(const AtomList& list);
AtomList atomlist_from_json(const json& j);
json extension_record_to_json(const ExtensionRecord& r);

// Small helpers shared by the CLI.
std::vector<int> parse_int_csv(const std::string& text);
std::string sampled_to_csv(const SampledFunction& f);

} // namespace etahardy::io
