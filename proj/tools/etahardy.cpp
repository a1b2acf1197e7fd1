#include "etahardy/atoms.hpp"
#include "etahardy/bmo.hpp"
#include "etahardy/error.hpp"
#include "etahardy/geometry.hpp"
#include "etahardy/gridfn.hpp"
#include "etahardy/io.hpp"
#include "etahardy/kernels.hpp"
#include "etahardy/verify.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace etahardy;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads key=value lines ('#' starts a comment, [section] headers are ignored) and turns
// them into --key=value arguments for the given subcommand.
std::vector<std::string> config_arguments(const std::string& path, CLI::App& sub)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            s.erase(0, s.find_first_not_of(ws));
            s.erase(s.find_last_not_of(ws) + 1);
            return s;
        };
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key == "config" || sub.get_option_no_throw("--" + key) == nullptr)
            throw UsageError(path + ":" + std::to_string(number) + ": unknown key '" + key + "' for " + sub.get_name());
        out.push_back("--" + key + "=" + value);
    }
    return out;
}

std::string option_config_path(const std::vector<std::string>& args)
{
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return {};
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        io::write_file(path, text);
}

std::string fingerprint_of(const CLI::App& sub)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(sub.config_to_str(true, false))));
    return buf;
}

std::vector<int> eta_bits(const std::string& csv)
{
    auto bits = io::parse_int_csv(csv);
    for (int b : bits)
        if (b != 0 && b != 1) throw UsageError("--eta takes wall bits 0 (even) or 1 (odd), got " + std::to_string(b));
    if (bits.empty()) throw UsageError("--eta is empty");
    return bits;
}

PCFunction read_function(const std::string& path, const std::string& values)
{
    PCFunction f = io::pcfunction_from_json(io::read_file(path));
    return values == "float" ? f.to_float() : f;
}

json family_cube_json(const std::optional<FamilyCube>& q)
{
    if (!q) return nullptr;
    json shift = json::array();
    for (int s : q->shift) shift.push_back(s);
    return json{{"cube", io::cube_to_json(q->cube)}, {"level", q->level}, {"shift", shift}};
}

json report_json(const BmoReport& r)
{
    return json{{"value", r.value},
                {"oscillation_part", r.oscillation_part},
                {"mean_part", r.mean_part},
                {"argmax", family_cube_json(r.argmax)},
                {"argmax_mean", family_cube_json(r.argmax_mean)},
                {"flavor", to_string(r.flavor)},
                {"breaking_point", io::rational_to_json(r.breaking_point)},
                {"modulo_constants", r.modulo_constants},
                {"cubes", r.cubes},
                {"family", r.family}};
}

struct Common {
    std::string config;
    std::string out = "-";
};

void add_common(CLI::App* sub, Common& c)
{
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", c.config, "key=value file; keys are long option names, flags given on the command line win");
    sub->add_option("--out", c.out, "output path, - for stdout")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reflection-group Hardy and BMO toolkit", "etahardy"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    // group
    Common group_c;
    std::string group_system;
    bool group_elements = false;
    auto* group = app.add_subcommand("group", "Reflection group of a root system: order, simple roots, wall signs");
    add_common(group, group_c);
    group->add_option("--system", group_system, "root-system descriptor JSON {dimension, roots, basepoint, eta}")->required();
    group->add_flag("--elements", group_elements, "list every element with its word and character")->capture_default_str();

    // kernel
    Common kernel_c;
    std::string kernel_system, kernel_input, kernel_eta, kernel_mode = "heat", kernel_range = "global", kernel_tgrid;
    double kernel_h = 1.0 / 16;
    long long kernel_window = 8;
    auto* kernel = app.add_subcommand("kernel", "Maximal eta-transform of a chamber function on the chamber lattice (CSV)");
    add_common(kernel, kernel_c);
    kernel->add_option("--system", kernel_system, "root-system descriptor JSON")->required();
    kernel->add_option("--input", kernel_input, "PCFunction JSON supported in the chamber")->required();
    kernel->add_option("--eta", kernel_eta, "wall signs +1/-1 per simple root, overriding the descriptor");
    kernel->add_option("--mode", kernel_mode, "kernel")->check(CLI::IsMember({"heat", "poisson"}))->capture_default_str();
    kernel->add_option("--range", kernel_range, "times: global, or local (t < 1)")
        ->check(CLI::IsMember({"global", "local"}))
        ->capture_default_str();
    kernel_tgrid = TGrid{}.str();
    kernel->add_option("--t-grid", kernel_tgrid, "geometric time grid a:r:b")->capture_default_str();
    kernel->add_option("--spacing", kernel_h, "lattice spacing h")->check(CLI::PositiveNumber)->capture_default_str();
    kernel->add_option("--window", kernel_window, "lattice window radius")->check(CLI::Range(1, 64))->capture_default_str();

    // extend
    Common extend_c;
    std::string extend_atoms_path;
    auto* extend = app.add_subcommand("extend", "Classical atoms of the eta-extension of an (eta, A/B) atom list");
    add_common(extend, extend_c);
    extend->add_option("--atoms", extend_atoms_path, "AtomList JSON; its eta field selects the chamber")->required();

    // decompose
    Common dec_c;
    std::string dec_atoms, dec_eta, dec_mode = "global";
    auto* decompose = app.add_subcommand("decompose", "Decompose classical atoms into (eta, A/B) atoms and print the l1 ledger");
    add_common(decompose, dec_c);
    decompose->add_option("--atoms", dec_atoms, "AtomList JSON of classical atoms")->required();
    decompose->add_option("--eta", dec_eta, "wall bits, 0 = even, 1 = odd, one per chamber wall")->required();
    decompose->add_option("--mode", dec_mode, "atom mode")->check(CLI::IsMember({"global", "local"}))->capture_default_str();

    // bmo-norm
    Common bmo_c;
    std::string bmo_input, bmo_eta, bmo_flavor = "BMO*", bmo_break = "1", bmo_kappa = "0", bmo_values = "exact";
    int bmo_levels = 7, bmo_min_level = 0;
    long long bmo_window = 0;
    auto* bmo = app.add_subcommand("bmo-norm", "Cube-family BMO/bmo norms; with --eta the chamber norms and M1, M2");
    add_common(bmo, bmo_c);
    bmo->add_option("--input", bmo_input, "PCFunction JSON (on the chamber when --eta is given)")->required();
    bmo->add_option("--eta", bmo_eta, "wall bits, 0 = even, 1 = odd; omit for a function on R^d");
    bmo->add_option("--flavor", bmo_flavor, "norm flavour")
        ->check(CLI::IsMember({"BMO", "BMO*", "bmo", "bmo*"}))
        ->capture_default_str();
    bmo->add_option("--break", bmo_break, "breaking point a of the local flavours (rational)")->capture_default_str();
    bmo->add_option("--levels", bmo_levels, "finest family level L")->check(CLI::Range(0, 12))->capture_default_str();
    bmo->add_option("--min-level", bmo_min_level, "coarsest family level")->check(CLI::Range(-6, 12))->capture_default_str();
    bmo->add_option("--kappa", bmo_kappa, "adjacency slack for M2 (rational)")->capture_default_str();
    bmo->add_option("--window", bmo_window, "family window radius; 0 uses the symmetric hull of the input window")
        ->check(CLI::Range(0LL, 64LL))
        ->capture_default_str();
    bmo->add_option("--values", bmo_values, "value mode")->check(CLI::IsMember({"exact", "float"}))->capture_default_str();

    // h1-norm
    Common h1_c;
    std::string h1_input, h1_eta, h1_mode = "heat", h1_range = "global", h1_tgrid = TGrid{}.str(), h1_values = "exact";
    double h1_h = 1.0 / 16;
    long long h1_window = 8;
    auto* h1 = app.add_subcommand("h1-norm", "Maximal-function H1 estimate of a chamber function");
    add_common(h1, h1_c);
    h1->add_option("--input", h1_input, "PCFunction JSON on the chamber")->required();
    h1->add_option("--eta", h1_eta, "wall bits, 0 = even, 1 = odd")->required();
    h1->add_option("--mode", h1_mode, "kernel")->check(CLI::IsMember({"heat", "poisson"}))->capture_default_str();
    h1->add_option("--range", h1_range, "times: global, or local (t < 1)")
        ->check(CLI::IsMember({"global", "local"}))
        ->capture_default_str();
    h1->add_option("--t-grid", h1_tgrid, "geometric time grid a:r:b")->capture_default_str();
    h1->add_option("--spacing", h1_h, "lattice spacing h")->check(CLI::PositiveNumber)->capture_default_str();
    h1->add_option("--window", h1_window, "lattice window radius")->check(CLI::Range(1, 64))->capture_default_str();
    h1->add_option("--values", h1_values, "value mode")->check(CLI::IsMember({"exact", "float"}))->capture_default_str();

    // verify
    Common ver_c;
    SuiteConfig suite;
    std::string ver_only, ver_format = "json", ver_kappa = suite.kappa.str(), ver_tgrid = suite.t_grid.str();
    auto* ver = app.add_subcommand("verify", "Run the verification suite; exit 1 when a check fails");
    add_common(ver, ver_c);
    ver->add_option("--only", ver_only, "run only one module: geometry, gridfn, kernels, atoms, bmo, verify");
    ver->add_option("--seed", suite.seed, "random seed")->capture_default_str();
    ver->add_option("--levels", suite.levels, "finest cube-family level L")->check(CLI::Range(2, 10))->capture_default_str();
    ver->add_option("--kappa", ver_kappa, "adjacency slack (rational)")->capture_default_str();
    ver->add_option("--spacing", suite.h, "H1 lattice spacing")->check(CLI::PositiveNumber)->capture_default_str();
    ver->add_option("--window", suite.window, "H1 window radius")->check(CLI::Range(1, 16))->capture_default_str();
    ver->add_option("--t-grid", ver_tgrid, "H1 time grid a:r:b")->capture_default_str();
    ver->add_option("--format", ver_format, "report format")->check(CLI::IsMember({"json", "markdown"}))->capture_default_str();

    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    try {
        // args is reversed, as CLI11 expects; config entries go after the subcommand name and
        // before the user's flags so that explicit flags take precedence.
        std::vector<std::string> forward(args.rbegin(), args.rend());
        if (!forward.empty()) {
            std::string path = option_config_path(forward);
            CLI::App* sub = nullptr;
            for (auto* s : app.get_subcommands({}))
                if (s->get_name() == forward.front()) sub = s;
            if (sub && !path.empty()) {
                auto extra = config_arguments(path, *sub);
                forward.insert(forward.begin() + 1, extra.begin(), extra.end());
                args.assign(forward.rbegin(), forward.rend());
            }
        }
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (group->parsed()) {
            auto desc = io::root_system_from_json(io::read_file(group_system));
            json out{{"fingerprint", fingerprint_of(*group)}, {"dimension", desc.system.dim()}, {"exact", desc.system.exact()}};
            if (desc.basepoint.empty()) {
                auto g = generate_group(desc.system);
                out["order"] = g.size();
            } else {
                std::vector<int> eta = desc.eta.empty() ? std::vector<int>() : desc.eta;
                auto ps = positive_and_simple(desc.system, desc.basepoint);
                if (eta.empty()) eta.assign(ps.simple.size(), 1);
                SignedChamber c = assign_homomorphism(desc.system, desc.basepoint, eta);
                out["order"] = c.order();
                json simple = json::array();
                for (const auto& v : c.simple_roots()) simple.push_back(v);
                out["simple_roots"] = simple;
                out["wall_signs"] = c.eta_on_generators();
                if (group_elements) {
                    json elems = json::array();
                    for (const auto& g : c.group()) {
                        json rows = json::array();
                        for (int i = 0; i < g.matrix.n; ++i) {
                            std::vector<double> row;
                            for (int j = 0; j < g.matrix.n; ++j) row.push_back(g.matrix(i, j));
                            rows.push_back(row);
                        }
                        elems.push_back(json{{"word", word_string(g.word)}, {"eta", g.eta}, {"matrix", rows}});
                    }
                    out["elements"] = elems;
                }
            }
            emit(group_c.out, out.dump(2) + "\n");
            return kOk;
        }

        if (kernel->parsed()) {
            auto desc = io::root_system_from_json(io::read_file(kernel_system));
            if (desc.basepoint.empty()) throw UsageError("the descriptor needs a basepoint");
            std::vector<int> eta = kernel_eta.empty() ? desc.eta : io::parse_int_csv(kernel_eta);
            if (eta.empty()) eta.assign(positive_and_simple(desc.system, desc.basepoint).simple.size(), 1);
            SignedChamber c = assign_homomorphism(desc.system, desc.basepoint, eta);
            KernelConfig cfg;
            cfg.t_grid = TGrid::parse(kernel_tgrid);
            cfg.h = kernel_h;
            cfg.window = Box::symmetric(c.dim(), Rational(kernel_window));
            PCFunction f = io::pcfunction_from_json(io::read_file(kernel_input));
            auto M = maximal_transform(f, c, cfg, kernel_mode == "heat" ? KernelMode::heat : KernelMode::poisson,
                                       kernel_range == "global" ? Range::global : Range::local);
            emit(kernel_c.out, "# fingerprint " + fingerprint_of(*kernel) + "\n" + io::sampled_to_csv(M));
            return kOk;
        }

        if (extend->parsed()) {
            AtomList list = io::atomlist_from_json(io::read_file(extend_atoms_path));
            if (list.eta.empty()) throw UsageError("the atom list needs an eta field");
            OrthoChamber c = OrthoChamber::standard(list.dim(), static_cast<int>(list.eta.size()), list.eta);
            Extension e = extend_atoms(list, c);
            json records = json::array();
            for (const auto& r : e.b_records) records.push_back(io::extension_record_to_json(r));
            json out{{"fingerprint", fingerprint_of(*extend)}, {"atoms", io::atomlist_to_json(e.atoms)}, {"b_records", records}};
            emit(extend_c.out, out.dump(2) + "\n");
            return kOk;
        }

        if (decompose->parsed()) {
            AtomList list = io::atomlist_from_json(io::read_file(dec_atoms));
            auto bits = eta_bits(dec_eta);
            OrthoChamber c = OrthoChamber::standard(list.dim(), static_cast<int>(bits.size()), bits);
            Decomposition dec = decompose_eta(list, c, atom_mode_from_string(dec_mode));
            json out = io::atomlist_to_json(dec.atoms);
            out["fingerprint"] = fingerprint_of(*decompose);
            emit(dec_c.out, out.dump(2) + "\n");
            std::ostream& ledger = dec_c.out == "-" ? std::cerr : std::cout;
            ledger << "l1 in " << dec.l1_in << "\n";
            for (std::size_t i = 0; i < dec.step_l1.size(); ++i)
                ledger << "after wall x_" << c.minus_axes()[i] << ": l1 " << dec.step_l1[i] << "\n";
            ledger << "l1 out " << dec.l1_out << " (ratio " << (dec.l1_in > 0 ? dec.l1_out / dec.l1_in : 0.0) << ", bound "
                   << dec.constant << ")\n";
            for (const auto& t : dec.atoms.terms) {
                AtomValidation v = t.is_atom() ? validate_atom(t.atom(), dec.atoms.mode)
                                               : validate_family(std::get<WhitneyFamily>(t.body), dec.atoms.mode, 2);
                if (!v.ok) {
                    std::cerr << "invalid output atom: " << v.clause << " (" << v.detail << ")\n";
                    return kCheckFailed;
                }
            }
            return kOk;
        }

        if (bmo->parsed()) {
            PCFunction f = read_function(bmo_input, bmo_values);
            const int d = f.dim();
            BmoFlavor flavor = bmo_flavor_from_string(bmo_flavor);
            Rational a = Rational::parse(bmo_break), kappa = Rational::parse(bmo_kappa);
            CubeFamily fam;
            fam.max_level = bmo_levels;
            fam.min_level = bmo_min_level;
            if (fam.min_level > fam.max_level) throw UsageError("--min-level exceeds --levels");
            json out{{"fingerprint", fingerprint_of(*bmo)}};
            if (bmo_eta.empty()) {
                fam.window = bmo_window > 0 ? Box::symmetric(d, Rational(bmo_window)) : f.window();
                out["report"] = report_json(bmo_norm(f, fam, flavor, a));
            } else {
                auto bits = eta_bits(bmo_eta);
                OrthoChamber c = OrthoChamber::standard(d, static_cast<int>(bits.size()), bits);
                fam.window = bmo_window > 0 ? Box::symmetric(d, Rational(bmo_window)) : c.symmetric_hull(f.window());
                out["report"] = report_json(eta_bmo_norm(f, c, fam, flavor, a));
                auto m = intrinsic_M1_M2(f, c, fam, is_local(flavor) ? IntrinsicMode::local : IntrinsicMode::global, kappa);
                out["intrinsic"] = json{{"M1", m.M1},
                                        {"M2", m.M2},
                                        {"argmax1", family_cube_json(m.argmax1)},
                                        {"argmax2", family_cube_json(m.argmax2)},
                                        {"kappa", io::rational_to_json(kappa)}};
            }
            emit(bmo_c.out, out.dump(2) + "\n");
            return kOk;
        }

        if (h1->parsed()) {
            PCFunction f = read_function(h1_input, h1_values);
            auto bits = eta_bits(h1_eta);
            OrthoChamber c = OrthoChamber::standard(f.dim(), static_cast<int>(bits.size()), bits);
            KernelConfig cfg;
            cfg.t_grid = TGrid::parse(h1_tgrid);
            cfg.h = h1_h;
            cfg.window = Box::symmetric(f.dim(), Rational(h1_window));
            H1Estimate e = h1_norm_estimate(f, c, cfg, h1_mode == "heat" ? KernelMode::heat : KernelMode::poisson,
                                            h1_range == "global" ? Range::global : Range::local);
            json out{{"fingerprint", fingerprint_of(*h1)}, {"value", e.value},     {"window", io::box_to_json(e.window)},
                     {"h", e.h},                           {"t_grid", e.t_grid.str()}, {"mode", to_string(e.mode)},
                     {"range", to_string(e.range)},        {"points", e.points}};
            emit(h1_c.out, out.dump(2) + "\n");
            return kOk;
        }

        if (ver->parsed()) {
            if (!ver_only.empty()) suite.only = ver_only;
            suite.kappa = Rational::parse(ver_kappa);
            suite.t_grid = TGrid::parse(ver_tgrid);
            SuiteReport report = run_suite(suite);
            bool markdown = ver_format == "markdown" ||
                            (ver_c.out.size() > 3 && ver_c.out.compare(ver_c.out.size() - 3, 3, ".md") == 0);
            emit(ver_c.out, markdown ? report_to_markdown(report) : report_to_json(report).dump(2) + "\n");
            for (const auto& c : report.checks)
                std::cerr << (c.passed ? "pass " : "FAIL ") << c.name << ": " << c.detail << "\n";
            return report.passed() ? kOk : kCheckFailed;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
