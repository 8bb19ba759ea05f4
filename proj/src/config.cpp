#include "turbkit/config.hpp"

#include "turbkit/errors.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace turbkit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
    Int x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
    std::vector<double> xs;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) xs.push_back(to_double(key, trim(item)));
    if (xs.size() != 3) throw ConfigError(key + ": expected three comma-separated numbers");
    return Vec3(xs[0], xs[1], xs[2]);
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    std::function<nlohmann::ordered_json(const RunConfig&)> json;
};

#define TK_DOUBLE(name, field)                                                            \
    Key {                                                                                 \
        name, [](RunConfig& c, const std::string& v) { c.field = to_double(name, v); },   \
            [](const RunConfig& c) { return format_double(c.field); },                    \
            [](const RunConfig& c) { return nlohmann::ordered_json(c.field); }             \
    }
#define TK_INT(name, field, type)                                                          \
    Key {                                                                                  \
        name, [](RunConfig& c, const std::string& v) { c.field = to_int<type>(name, v); }, \
            [](const RunConfig& c) { return std::to_string(c.field); },                    \
            [](const RunConfig& c) { return nlohmann::ordered_json(c.field); }              \
    }
#define TK_BOOL(name, field)                                                            \
    Key {                                                                               \
        name, [](RunConfig& c, const std::string& v) { c.field = to_bool(name, v); },   \
            [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }, \
            [](const RunConfig& c) { return nlohmann::ordered_json(c.field); }           \
    }

const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        TK_INT("dim", sim.dim, int),
        TK_INT("N", sim.n, int),
        TK_DOUBLE("nu", sim.nu),
        TK_DOUBLE("dt", sim.dt),
        TK_INT("shell_lo", sim.shell_lo, int),
        TK_INT("shell_hi", sim.shell_hi, int),
        TK_DOUBLE("epsilon", sim.epsilon),
        TK_DOUBLE("c", sim.c),
        TK_INT("seed", sim.seed, std::uint64_t),
        TK_DOUBLE("t_burnin", sim.t_burnin),
        TK_DOUBLE("t_sample", sim.t_sample),
        TK_INT("snapshot_stride", sim.snapshot_stride, int),
        TK_DOUBLE("cfl_factor", sim.cfl_factor),
        TK_DOUBLE("init_energy", sim.init_energy),
        TK_INT("init_kmax", sim.init_kmax, int),
        TK_BOOL("nonlinear", sim.nonlinear),
        TK_BOOL("pressure", sim.pressure),
        Key{"psi_kind", [](RunConfig& c, const std::string& v) { c.psi_kind = parse_cutoff_kind(v); },
            [](const RunConfig& c) { return to_string(c.psi_kind); },
            [](const RunConfig& c) { return nlohmann::ordered_json(to_string(c.psi_kind)); }},
        Key{"psi_center", [](RunConfig& c, const std::string& v) { c.psi_center = to_vec3("psi_center", v); },
            [](const RunConfig& c) {
                return format_double(c.psi_center(0)) + ", " + format_double(c.psi_center(1)) + ", " +
                       format_double(c.psi_center(2));
            },
            [](const RunConfig& c) {
                return nlohmann::ordered_json::array({c.psi_center(0), c.psi_center(1), c.psi_center(2)});
            }},
        TK_DOUBLE("psi_radius", psi_radius),
        TK_INT("n_dirs", n_dirs, int),
        TK_DOUBLE("ell_min", ell_min),
        TK_DOUBLE("ell_max", ell_max),
        TK_INT("ell_n", ell_n, int),
        Key{"ell_spacing",
            [](RunConfig& c, const std::string& v) {
                if (v == "log") c.ell_spacing = Spacing::log;
                else if (v == "linear") c.ell_spacing = Spacing::linear;
                else throw ConfigError("ell_spacing: expected log or linear, got '" + v + "'");
            },
            [](const RunConfig& c) { return std::string(c.ell_spacing == Spacing::log ? "log" : "linear"); },
            [](const RunConfig& c) {
                return nlohmann::ordered_json(c.ell_spacing == Spacing::log ? "log" : "linear");
            }},
        TK_INT("gauss_points", gauss_points, int),
        Key{"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
            [](const RunConfig& c) { return c.out_dir; },
            [](const RunConfig& c) { return nlohmann::ordered_json(c.out_dir); }},
    };
    return k;
}

#undef TK_DOUBLE
#undef TK_INT
#undef TK_BOOL

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& k : keys()) n.push_back(k.name);
        return n;
    }();
    return names;
}

void RunConfig::validate() const {
    if (sim.dim != 1 && sim.dim != 3) throw ConfigError("dim must be 1 or 3");
    sim.validate();
    if (!(psi_radius > 0) || psi_radius >= 3.141592653589793) throw ConfigError("psi_radius must lie in (0, pi)");
    if (n_dirs < 16) throw ConfigError("n_dirs must be at least 16");
    if (gauss_points < 1 || gauss_points > 64) throw ConfigError("gauss_points must lie in [1, 64]");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
    make_length_grid(ell_min, ell_max, ell_n, ell_spacing, cutoff_margin());
}

double RunConfig::cutoff_margin() const {
    return psi_kind == CutoffKind::uniform ? 3.141592653589793 : 3.141592653589793 - psi_radius;
}

CutoffField RunConfig::cutoff() const { return make_cutoff(sim.grid(), psi_kind, psi_center, psi_radius); }

LengthGrid RunConfig::length_grid() const {
    return make_length_grid(ell_min, ell_max, ell_n, ell_spacing, cutoff_margin());
}

RunConfig parse_config(const std::string& text) {
    std::map<std::string, const Key*> lookup;
    for (const auto& k : keys()) lookup[k.name] = &k;
    RunConfig c;
    std::set<std::string> seen;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = lookup.find(key);
        if (it == lookup.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        it->second->set(c, value);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_environment(RunConfig& cfg) {
    const char* s = std::getenv("TURBKIT_SEED");
    if (s == nullptr) return;
    cfg.sim.seed = to_int<std::uint64_t>("TURBKIT_SEED", trim(s));
}

std::string to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    for (const auto& k : keys()) j[k.name] = k.json(cfg);
    return j;
}

}  // namespace turbkit
