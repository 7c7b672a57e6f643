#pragma once

// Reading table specs and run configs, and writing the CSV and JSON outputs.

#include "sympb/attractor.hpp"
#include "sympb/core.hpp"
#include "sympb/periodic.hpp"
#include "sympb/table.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace sympb {

using json = nlohmann::json;

class IOError : public Error {
public:
    using Error::Error;
};

/// Shortest round-tripping text for a double.
inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Table specs

inline TableSpec table_spec_from_json(const json& j) {
    try {
        TableSpec spec;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "support") spec.kind = TableKind::SupportFunction;
        else if (kind == "polar") spec.kind = TableKind::PolarRadius;
        else throw ConfigError("table: kind must be \"support\" or \"polar\"");
        for (const auto& h : j.at("harmonics")) {
            Harmonic hm;
            hm.k = h.at("k").get<int>();
            hm.cos_coeff = h.value("cos", 0.0);
            hm.sin_coeff = h.value("sin", 0.0);
            spec.harmonics.push_back(hm);
        }
        if (j.contains("origin") && !j.at("origin").is_null()) {
            const auto& o = j.at("origin");
            if (!o.is_array() || o.size() != 2) throw ConfigError("table: origin must be [x, y]");
            spec.origin_override = Vec2(o[0].get<double>(), o[1].get<double>());
        }
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("table: ") + e.what());
    }
}

inline json table_spec_to_json(const TableSpec& spec) {
    json j;
    j["kind"] = spec.kind == TableKind::SupportFunction ? "support" : "polar";
    j["harmonics"] = json::array();
    for (const auto& h : spec.harmonics) j["harmonics"].push_back({{"k", h.k}, {"cos", h.cos_coeff}, {"sin", h.sin_coeff}});
    if (spec.origin_override) j["origin"] = {spec.origin_override->x(), spec.origin_override->y()};
    return j;
}

inline TableSpec load_table_spec(const std::string& path) {
    try {
        return table_spec_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Minimal TOML reader for flat configs. It accepts comments and [section]
// headers plus one-line key = value pairs whose values are scalars or flat
// arrays of scalars. Each section becomes a nested JSON object.

namespace toml_lite {

using Value = std::variant<double, bool, std::string, std::vector<json>>;

inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline json parse_scalar(const std::string& raw, int line) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("toml line " + std::to_string(line) + ": missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') throw ConfigError("toml line " + std::to_string(line) + ": bad string");
        return json::parse(v);  // JSON string escapes are a superset of basic TOML ones
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t used = 0;
        std::string num;
        for (char c : v)
            if (c != '_') num += c;
        if (num.find_first_of(".eE") == std::string::npos) {
            long long x = std::stoll(num, &used);
            if (used == num.size()) return x;
        }
        double x = std::stod(num, &used);
        if (used == num.size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("toml line " + std::to_string(line) + ": unsupported value '" + v + "'");
}

/// Strip a trailing comment that is not inside a string.
inline std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

/// Parses the subset into a JSON object with one level of nesting per section.
inline json parse(const std::string& text) {
    json root = json::object();
    json* cur = &root;
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3 || s[1] == '[')
                throw ConfigError("toml line " + std::to_string(ln) + ": unsupported header");
            std::string name = trim(s.substr(1, s.size() - 2));
            cur = &root[name];
            if (!cur->is_object()) *cur = json::object();
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("toml line " + std::to_string(ln) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("toml line " + std::to_string(ln) + ": empty key");
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']') throw ConfigError("toml line " + std::to_string(ln) + ": arrays must be on one line");
            json arr = json::array();
            std::string body = val.substr(1, val.size() - 2);
            std::string item;
            bool in_str = false;
            for (char c : body + ",") {
                if (c == '"') in_str = !in_str;
                if (c == ',' && !in_str) {
                    if (!trim(item).empty()) arr.push_back(parse_scalar(item, ln));
                    item.clear();
                } else {
                    item += c;
                }
            }
            (*cur)[key] = arr;
        } else {
            (*cur)[key] = parse_scalar(val, ln);
        }
    }
    return root;
}

}  // namespace toml_lite

// ---------------------------------------------------------------------------
// Run configuration

struct LambdaSweep {
    double from = 0.05;
    double to = 0.95;
    int steps = 19;

    std::vector<double> values() const {
        std::vector<double> v;
        if (steps == 1) return {from};
        for (int i = 0; i < steps; ++i) v.push_back(from + (to - from) * i / (steps - 1));
        return v;
    }
    friend bool operator==(const LambdaSweep&, const LambdaSweep&) = default;
};

/// Parses "from:to:steps".
inline LambdaSweep parse_sweep(const std::string& s) {
    LambdaSweep sw;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> sw.from >> c1 >> sw.to >> c2 >> sw.steps) || c1 != ':' || c2 != ':' || !in.eof())
        throw ConfigError("lambda sweep must look like from:to:steps, got '" + s + "'");
    if (sw.steps < 1) throw ConfigError("lambda sweep needs at least one step");
    return sw;
}

struct RunConfig {
    std::variant<std::monostate, std::string, TableSpec> table;  ///< none, file path, or inline spec
    double lambda = 0.9;
    std::optional<LambdaSweep> sweep;
    int seeds = 200;
    std::uint64_t rng_seed = 1;
    int n = 2000;
    std::optional<int> n0;  ///< default depends on lambda
    std::vector<std::string> commands;
    std::string output_dir = ".";
    int threads = 0;
    double alpha = 0.5;
    int grid = 1024;
    double tol = 1e-8;

    /// Transient cutoff: explicit, else 30 for lambda >= 0.7 and 10 below.
    int transient() const { return n0 ? *n0 : (lambda >= 0.7 ? 30 : 10); }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> k{"simulate", "periodic", "classify", "graph", "rotation", "figure", "threshold"};
    return k;
}

inline void validate(const RunConfig& c) {
    if (!(c.lambda > 0.0 && c.lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
    if (c.sweep) {
        for (double l : {c.sweep->from, c.sweep->to})
            if (!(l > 0.0 && l <= 1.0)) throw ConfigError("lambda sweep values must lie in (0, 1]");
    }
    if (c.seeds < 1) throw ConfigError("seed count must be at least 1");
    if (c.n0 && *c.n0 < 0) throw ConfigError("n0 must be non-negative");
    if (c.n <= c.transient()) throw ConfigError("n must exceed n0");
    if (c.grid < 16) throw ConfigError("grid must have at least 16 nodes");
    if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
    for (const auto& cmd : c.commands) {
        const auto& k = known_commands();
        if (std::find(k.begin(), k.end(), cmd) == k.end()) throw ConfigError("unknown command '" + cmd + "'");
    }
}

namespace detail {

// TOML inline tables are outside the subset, so a table spec becomes
// parallel arrays k / cos / sin.
inline json spec_to_flat(const TableSpec& s) {
    json j;
    j["kind"] = s.kind == TableKind::SupportFunction ? "support" : "polar";
    json k = json::array(), c = json::array(), sn = json::array();
    for (const auto& h : s.harmonics) {
        k.push_back(h.k);
        c.push_back(h.cos_coeff);
        sn.push_back(h.sin_coeff);
    }
    j["k"] = k;
    j["cos"] = c;
    j["sin"] = sn;
    if (s.origin_override) j["origin"] = {s.origin_override->x(), s.origin_override->y()};
    return j;
}

inline TableSpec spec_from_flat(const json& j) {
    if (j.contains("harmonics")) return table_spec_from_json(j);
    json h = json::array();
    const auto& k = j.at("k");
    const json empty = json::array();
    const auto& c = j.contains("cos") ? j.at("cos") : empty;
    const auto& s = j.contains("sin") ? j.at("sin") : empty;
    for (std::size_t i = 0; i < k.size(); ++i)
        h.push_back({{"k", k[i]}, {"cos", i < c.size() ? c[i] : json(0.0)}, {"sin", i < s.size() ? s[i] : json(0.0)}});
    json full{{"kind", j.at("kind")}, {"harmonics", h}};
    if (j.contains("origin")) full["origin"] = j.at("origin");
    return table_spec_from_json(full);
}

}  // namespace detail

/// Builds a RunConfig from the common object model of the JSON and TOML
/// readers. Unknown keys are rejected so typos do not pass silently.
inline RunConfig config_from_json(const json& j) {
    static const std::vector<std::string> keys{"table", "lambda", "lambda_sweep", "seeds", "rng_seed", "n", "n0",
                                               "commands", "output_dir", "threads", "alpha", "grid", "tol"};
    RunConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it)
            if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
                throw ConfigError("config: unknown key '" + it.key() + "'");
        if (j.contains("table")) {
            const auto& t = j.at("table");
            if (t.is_string()) c.table = t.get<std::string>();
            else c.table = detail::spec_from_flat(t);
        }
        c.lambda = j.value("lambda", c.lambda);
        if (j.contains("lambda_sweep")) {
            const auto& s = j.at("lambda_sweep");
            if (s.is_string()) c.sweep = parse_sweep(s.get<std::string>());
            else c.sweep = LambdaSweep{s.at("from").get<double>(), s.at("to").get<double>(), s.at("steps").get<int>()};
        }
        c.seeds = j.value("seeds", c.seeds);
        c.rng_seed = j.value("rng_seed", c.rng_seed);
        c.n = j.value("n", c.n);
        if (j.contains("n0")) c.n0 = j.at("n0").get<int>();
        if (j.contains("commands")) c.commands = j.at("commands").get<std::vector<std::string>>();
        c.output_dir = j.value("output_dir", c.output_dir);
        c.threads = j.value("threads", c.threads);
        c.alpha = j.value("alpha", c.alpha);
        c.grid = j.value("grid", c.grid);
        c.tol = j.value("tol", c.tol);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

inline json config_to_json(const RunConfig& c) {
    json j;
    if (auto p = std::get_if<std::string>(&c.table)) j["table"] = *p;
    if (auto s = std::get_if<TableSpec>(&c.table)) j["table"] = table_spec_to_json(*s);
    j["lambda"] = c.lambda;
    if (c.sweep) j["lambda_sweep"] = {{"from", c.sweep->from}, {"to", c.sweep->to}, {"steps", c.sweep->steps}};
    j["seeds"] = c.seeds;
    j["rng_seed"] = c.rng_seed;
    j["n"] = c.n;
    if (c.n0) j["n0"] = *c.n0;
    j["commands"] = c.commands;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    j["alpha"] = c.alpha;
    j["grid"] = c.grid;
    j["tol"] = c.tol;
    return j;
}

inline std::string config_to_toml(const RunConfig& c) {
    std::ostringstream o;
    auto num_array = [](const json& a) {
        std::string s = "[";
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) s += ", ";
            s += a[i].is_number_integer() ? std::to_string(a[i].get<long long>()) : fmt_double(a[i].get<double>());
        }
        return s + "]";
    };
    auto quoted = [](const std::string& s) { return json(s).dump(); };
    o << "lambda = " << fmt_double(c.lambda) << "\n";
    if (c.sweep)
        o << "lambda_sweep = " << quoted(fmt_double(c.sweep->from) + ":" + fmt_double(c.sweep->to) + ":" +
                                          std::to_string(c.sweep->steps))
          << "\n";
    o << "seeds = " << c.seeds << "\n";
    o << "rng_seed = " << c.rng_seed << "\n";
    o << "n = " << c.n << "\n";
    if (c.n0) o << "n0 = " << *c.n0 << "\n";
    o << "commands = [";
    for (std::size_t i = 0; i < c.commands.size(); ++i) o << (i ? ", " : "") << quoted(c.commands[i]);
    o << "]\n";
    o << "output_dir = " << quoted(c.output_dir) << "\n";
    o << "threads = " << c.threads << "\n";
    o << "alpha = " << fmt_double(c.alpha) << "\n";
    o << "grid = " << c.grid << "\n";
    o << "tol = " << fmt_double(c.tol) << "\n";
    if (auto p = std::get_if<std::string>(&c.table)) o << "table = " << quoted(*p) << "\n";
    if (auto s = std::get_if<TableSpec>(&c.table)) {
        json f = detail::spec_to_flat(*s);
        o << "\n[table]\n";
        o << "kind = " << quoted(f["kind"].get<std::string>()) << "\n";
        o << "k = " << num_array(f["k"]) << "\n";
        o << "cos = " << num_array(f["cos"]) << "\n";
        o << "sin = " << num_array(f["sin"]) << "\n";
        if (f.contains("origin")) o << "origin = " << num_array(f["origin"]) << "\n";
    }
    return o.str();
}

inline RunConfig config_from_toml(const std::string& text) { return config_from_json(toml_lite::parse(text)); }

/// Loads a config file; the format is chosen by extension (.toml or .json).
inline RunConfig load_config(const std::string& path) {
    const std::string text = read_file(path);
    const bool toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
    if (toml) return config_from_toml(text);
    try {
        return config_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Exports

inline void write_cloud_csv(std::ostream& out, const AttractorCloud& cloud) {
    out << "seed_id,n,theta,psi,s,lift\n";
    for (const auto& p : cloud.points)
        out << p.seed_id << ',' << p.n << ',' << fmt_double(p.theta) << ',' << fmt_double(p.psi) << ','
            << fmt_double(p.s) << ',' << fmt_double(p.lift) << '\n';
}

inline void write_graph_csv(std::ostream& out, const AttractorGraph& g) {
    out << "theta,eta\n";
    for (std::size_t i = 0; i < g.eta.size(); ++i) out << fmt_double(g.theta[i]) << ',' << fmt_double(g.eta[i]) << '\n';
}

inline json summary_json(double lambda, const std::optional<RotationInterval>& rot, const std::optional<ZeroHits>& hits,
                         const std::optional<NonGraphWitness>& witness) {
    json j;
    j["lambda"] = lambda;
    j["rho_minus"] = rot ? json(rot->rho_minus) : json(nullptr);
    j["rho_plus"] = rot ? json(rot->rho_plus) : json(nullptr);
    j["zero_hits"] = json::array();
    if (hits)
        for (double t : hits->theta) j["zero_hits"].push_back(t);
    if (witness) {
        auto pt = [](const CloudPoint& p) {
            return json{{"seed_id", p.seed_id}, {"n", p.n}, {"theta", p.theta}, {"psi", p.psi}, {"s", p.s}};
        };
        j["non_graph_witness"] = {{"low", pt(witness->low)}, {"high", pt(witness->high)}, {"gap", witness->gap}};
    }
    return j;
}

inline json orbit_json(const PeriodicOrbit4& o, const StabilityReport& r) {
    return {{"theta1", o.theta1},
            {"theta2", o.theta2},
            {"k12", r.k12},
            {"lambda", r.lambda},
            {"type", to_string(r.type)},
            {"mu", {{r.mu[0].real(), r.mu[0].imag()}, {r.mu[1].real(), r.mu[1].imag()}}}};
}

}  // namespace sympb
