#include "etahardy/io.hpp"

#include "etahardy/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace etahardy::io {

namespace {

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const json& field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::invalid_input, std::string("missing field '") + key + "'");
    return j.at(key);
}

json int_list(const std::vector<int>& v)
{
    json a = json::array();
    for (int x : v) a.push_back(x);
    return a;
}

std::vector<int> int_list_from(const json& j, const char* key)
{
    if (!j.contains(key)) return {};
    const json& a = j.at(key);
    if (!a.is_array()) throw Error(ErrorCode::invalid_input, std::string("'") + key + "' must be an array of integers");
    std::vector<int> out;
    for (const auto& x : a) {
        if (!x.is_number_integer()) throw Error(ErrorCode::invalid_input, std::string("'") + key + "' must be an array of integers");
        out.push_back(x.get<int>());
    }
    return out;
}

void check_axes(const std::vector<int>& axes, int d, const char* what)
{
    for (int a : axes)
        if (a < 0 || a >= d)
            throw Error(ErrorCode::invalid_input, std::string(what) + " index " + std::to_string(a) + " out of range");
}

json family_to_json(const WhitneyFamily& f)
{
    json j;
    j["box"] = box_to_json(f.box);
    j["walls"] = int_list(f.walls);
    j["I0"] = int_list(f.I0);
    j["I1"] = int_list(f.I1);
    j["member_kind"] = to_string(f.member_kind);
    return j;
}

WhitneyFamily family_from_json(const json& j)
{
    WhitneyFamily f;
    f.box = box_from_json(field(j, "box"));
    f.walls = int_list_from(j, "walls");
    f.I0 = int_list_from(j, "I0");
    f.I1 = int_list_from(j, "I1");
    if (j.contains("member_kind")) f.member_kind = atom_kind_from_string(j.at("member_kind").get<std::string>());
    check_axes(f.walls, f.box.dim(), "wall");
    check_axes(f.I0, f.box.dim(), "I0");
    check_axes(f.I1, f.box.dim(), "I1");
    return f;
}

std::string format_double(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

} // namespace

json parse_text(const std::string& text, const std::string& source)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw Error(ErrorCode::parse_error, source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                                ": malformed JSON (" + e.what() + ")");
    }
}

json read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::parse_error, "cannot write '" + path + "'");
    out << text;
}

json rational_to_json(const Rational& r)
{
    if (r.is_integer()) return json(r.num());
    return json(r.str());
}

Rational rational_from_json(const json& j)
{
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) return Rational::from_double(j.get<double>());
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    throw Error(ErrorCode::invalid_input, "expected a rational, got " + j.dump());
}

json scalar_to_json(const Scalar& s)
{
    if (s.is_exact()) return rational_to_json(s.exact());
    return json(s.to_double());
}

Scalar scalar_from_json(const json& j, bool float_mode)
{
    if (float_mode) {
        if (j.is_number()) return Scalar(j.get<double>());
        if (j.is_string()) return Scalar(Rational::parse(j.get<std::string>()).to_double());
        throw Error(ErrorCode::invalid_input, "expected a number, got " + j.dump());
    }
    return Scalar(rational_from_json(j));
}

json cube_to_json(const Cube& c)
{
    json j;
    if (c.is_dyadic()) {
        int level = 0;
        for (const auto& x : c.corner)
            if (auto l = x.dyadic_level()) level = std::max(level, *l);
        if (auto l = c.side.dyadic_level()) level = std::max(level, *l);
        Rational scale = Rational::pow2(level);
        json corner = json::array();
        for (const auto& x : c.corner) corner.push_back((x * scale).num());
        j["corner"] = corner;
        j["level"] = level;
        j["side_num"] = (c.side * scale).num();
        return j;
    }
    json lo = json::array();
    for (const auto& x : c.corner) lo.push_back(x.str());
    j["lo"] = lo;
    j["side"] = c.side.str();
    return j;
}

Cube cube_from_json(const json& j)
{
    if (j.contains("corner")) {
        int level = field(j, "level").get<int>();
        Rational unit = Rational::pow2(-level);
        RVec corner;
        for (const auto& x : field(j, "corner")) corner.push_back(rational_from_json(x) * unit);
        Rational side = rational_from_json(field(j, "side_num")) * unit;
        return Cube(std::move(corner), side);
    }
    RVec lo;
    for (const auto& x : field(j, "lo")) lo.push_back(rational_from_json(x));
    return Cube(std::move(lo), rational_from_json(field(j, "side")));
}

json box_to_json(const Box& b)
{
    if (b.dim() > 0 && b.is_cube()) return cube_to_json(Cube::from_box(b));
    json j;
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < b.dim(); ++a) {
        lo.push_back(rational_to_json(b.lo[a]));
        hi.push_back(rational_to_json(b.hi[a]));
    }
    j["lo"] = lo;
    j["hi"] = hi;
    return j;
}

Box box_from_json(const json& j)
{
    if (j.contains("hi")) {
        RVec lo, hi;
        for (const auto& x : field(j, "lo")) lo.push_back(rational_from_json(x));
        for (const auto& x : field(j, "hi")) hi.push_back(rational_from_json(x));
        return Box(std::move(lo), std::move(hi));
    }
    return cube_from_json(j).box();
}

json pcfunction_to_json(const PCFunction& f)
{
    json j;
    j["dimension"] = f.dim();
    j["value_mode"] = f.is_exact() ? "exact" : "float";
    j["window"] = box_to_json(f.window());
    json cells = json::array();
    for (const auto& c : f.cells()) {
        for (const auto& piece : split_into_cubes(c.box)) {
            json cell = box_to_json(piece);
            cell["value"] = scalar_to_json(c.value);
            cells.push_back(std::move(cell));
        }
    }
    j["cells"] = std::move(cells);
    return j;
}

PCFunction pcfunction_from_json(const json& j)
{
    Box window = box_from_json(field(j, "window"));
    bool float_mode = j.contains("value_mode") && j.at("value_mode") == "float";
    if (j.contains("value_mode") && j.at("value_mode") != "float" && j.at("value_mode") != "exact")
        throw Error(ErrorCode::invalid_input, "value_mode must be 'exact' or 'float'");
    if (j.contains("dimension") && field(j, "dimension").get<int>() != window.dim())
        throw Error(ErrorCode::invalid_input, "dimension does not match the window");
    std::vector<Cell> cells;
    for (const auto& c : field(j, "cells")) {
        Box b = box_from_json(c);
        if (b.dim() != window.dim()) throw Error(ErrorCode::invalid_input, "cell dimension does not match the window");
        cells.push_back(Cell{std::move(b), scalar_from_json(field(c, "value"), float_mode)});
    }
    return PCFunction(std::move(window), std::move(cells));
}

std::string pcfunction_to_csv(const PCFunction& f)
{
    std::ostringstream os;
    for (int a = 0; a < f.dim(); ++a) os << "lo" << a << ",";
    for (int a = 0; a < f.dim(); ++a) os << "hi" << a << ",";
    os << "value\n";
    for (const auto& c : f.cells())
        for (const auto& piece : split_into_cubes(c.box)) {
            for (int a = 0; a < f.dim(); ++a) os << piece.lo[a] << ",";
            for (int a = 0; a < f.dim(); ++a) os << piece.hi[a] << ",";
            os << c.value << "\n";
        }
    return os.str();
}

RootSystemDescriptor root_system_from_json(const json& j)
{
    int d = field(j, "dimension").get<int>();
    std::vector<RVec> exact;
    std::vector<Vec> approx;
    bool all_exact = true;
    for (const auto& r : field(j, "roots")) {
        RVec q;
        Vec v;
        for (const auto& x : r) {
            if (x.is_string()) {
                Rational p = Rational::parse(x.get<std::string>());
                q.push_back(p);
                v.push_back(p.to_double());
            } else {
                double val = x.get<double>();
                v.push_back(val);
                if (x.is_number_integer())
                    q.push_back(Rational(x.get<long long>()));
                else
                    all_exact = false;
            }
        }
        exact.push_back(std::move(q));
        approx.push_back(std::move(v));
    }
    RootSystemDescriptor desc{all_exact ? RootSystem::from_rational(d, std::move(exact))
                                        : RootSystem::from_double(d, std::move(approx)),
                              {},
                              {}};
    if (j.contains("basepoint"))
        for (const auto& x : j.at("basepoint")) desc.basepoint.push_back(x.get<double>());
    if (j.contains("eta"))
        for (const auto& x : j.at("eta")) desc.eta.push_back(x.get<int>());
    return desc;
}

json root_system_to_json(const RootSystemDescriptor& d)
{
    json j;
    j["dimension"] = d.system.dim();
    json roots = json::array();
    for (std::size_t i = 0; i < d.system.size(); ++i) {
        json r = json::array();
        if (d.system.exact())
            for (const auto& x : d.system.exact_roots()[i]) r.push_back(rational_to_json(x));
        else
            for (double x : d.system.roots()[i]) r.push_back(x);
        roots.push_back(r);
    }
    j["roots"] = roots;
    j["basepoint"] = d.basepoint;
    j["eta"] = d.eta;
    return j;
}

json chamber_to_json(const OrthoChamber& c)
{
    json j;
    j["dimension"] = c.dim();
    j["axes"] = int_list(c.axes());
    j["eta"] = int_list(c.eta_bits());
    return j;
}

OrthoChamber chamber_from_json(const json& j)
{
    int d = field(j, "dimension").get<int>();
    return OrthoChamber(d, int_list_from(j, "axes"), int_list_from(j, "eta"));
}

json atomlist_to_json(const AtomList& list)
{
    json j;
    j["eta"] = int_list(list.eta);
    j["mode"] = to_string(list.mode);
    j["window"] = box_to_json(list.window);
    json terms = json::array();
    for (const auto& t : list.terms) {
        json e;
        if (const auto* a = std::get_if<Atom>(&t.body)) {
            e["coeff"] = t.coefficient();
            e["weight"] = rational_to_json(t.weight);
            e["gain_sq"] = rational_to_json(a->gain_sq);
            e["kind"] = to_string(a->kind);
            e["I0"] = int_list(a->I0);
            e["I1"] = int_list(a->I1);
            e["cube"] = cube_to_json(a->cube);
            e["payload"] = pcfunction_to_json(a->payload);
        } else if (const auto* f = std::get_if<WhitneyFamily>(&t.body)) {
            e = family_to_json(*f);
            e["kind"] = "whitney_family";
            e["weight"] = rational_to_json(t.weight);
            e["l1"] = t.l1();
        } else {
            const auto& x = std::get<ExtendedFamily>(t.body);
            e = family_to_json(x.source);
            e["kind"] = "extended_family";
            e["weight"] = rational_to_json(t.weight);
            e["chamber"] = chamber_to_json(x.chamber);
            e["l1"] = t.l1();
        }
        terms.push_back(std::move(e));
    }
    j["terms"] = std::move(terms);
    j["l1"] = list.l1();
    return j;
}

AtomList atomlist_from_json(const json& j)
{
    AtomList list;
    list.eta = int_list_from(j, "eta");
    if (j.contains("mode")) list.mode = atom_mode_from_string(j.at("mode").get<std::string>());
    const json& terms = field(j, "terms");
    if (!terms.is_array()) throw Error(ErrorCode::invalid_input, "'terms' must be an array");
    std::optional<Box> window;
    if (j.contains("window")) window = box_from_json(j.at("window"));
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const json& e = terms[i];
        try {
            std::string kind = field(e, "kind").get<std::string>();
            if (kind == "whitney_family" || kind == "extended_family") {
                WhitneyFamily f = family_from_json(e);
                Rational w = rational_from_json(field(e, "weight"));
                if (!window) window = f.box;
                if (kind == "whitney_family")
                    list.terms.push_back(Term{w, f});
                else
                    list.terms.push_back(Term{w, ExtendedFamily{f, chamber_from_json(field(e, "chamber"))}});
                continue;
            }
            Atom a;
            a.kind = atom_kind_from_string(kind);
            a.cube = cube_from_json(field(e, "cube"));
            a.payload = pcfunction_from_json(field(e, "payload"));
            if (a.payload.dim() != a.cube.dim()) throw Error(ErrorCode::invalid_input, "payload and cube dimensions differ");
            a.I0 = int_list_from(e, "I0");
            a.I1 = int_list_from(e, "I1");
            check_axes(a.I0, a.dim(), "I0");
            check_axes(a.I1, a.dim(), "I1");
            for (int x : a.I0)
                if (std::find(a.I1.begin(), a.I1.end(), x) != a.I1.end())
                    throw Error(ErrorCode::invalid_input, "I0 and I1 must be disjoint");
            a.gain_sq = e.contains("gain_sq") ? rational_from_json(e.at("gain_sq")) : Rational(1);
            Rational w = e.contains("weight") ? rational_from_json(e.at("weight")) : rational_from_json(field(e, "coeff"));
            if (!window) window = a.payload.window();
            list.terms.push_back(Term{w, std::move(a)});
        } catch (const Error& err) {
            throw Error(err.code(), "term " + std::to_string(i) + ": " + err.what());
        }
    }
    if (!window) throw Error(ErrorCode::invalid_input, "empty atom list needs a window");
    list.window = *window;
    for (const auto& t : list.terms) {
        int d = std::visit([](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Atom>) return b.dim();
            else if constexpr (std::is_same_v<T, WhitneyFamily>) return b.box.dim();
            else return b.source.box.dim();
        }, t.body);
        if (d != list.window.dim()) throw Error(ErrorCode::invalid_input, "terms have different dimensions");
    }
    return list;
}

json extension_record_to_json(const ExtensionRecord& r)
{
    json j;
    j["term"] = r.term;
    j["J"] = int_list(r.J);
    j["volume_ratio"] = rational_to_json(r.volume_ratio);
    j["mean_zero"] = r.mean_zero;
    return j;
}

std::vector<int> parse_int_csv(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            int v = std::stoi(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_argument, "bad integer '" + item + "' in list '" + text + "'");
        }
    }
    return out;
}

std::string sampled_to_csv(const SampledFunction& f)
{
    std::ostringstream os;
    const std::size_t d = f.points.empty() ? 0 : f.points[0].size();
    for (std::size_t a = 0; a < d; ++a) os << "x" << a << ",";
    os << "value\n";
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        for (double x : f.points[i]) os << format_double(x) << ",";
        os << format_double(f.values[i]) << "\n";
    }
    return os.str();
}

} // namespace etahardy::io
