#pragma once

// Run configuration: a single versioned JSON document. Parsing is strict:
// unknown keys are rejected with their full path, type mismatches and parse
// errors carry line-level positions, and every run echoes the fully resolved
// document (defaults materialized, CLI overrides applied) next to its outputs.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prhf/initial_data.hpp"
#include "prhf/integrator.hpp"

namespace prhf {

using nlohmann::json;

// Distinct from numerical failures so the CLI can map it to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SimConfig {
    int schema_version = 1;

    int n = 48;
    double L = 24.0;
    double m = 1.0;

    Mode mode = Mode::hartree_fock;
    std::optional<double> kappa;                 // exactly one of these two
    std::optional<double> margin_over_critical;  // kappa = (1+margin) * kappa_star

    ShellSpec shells;            // used when container is empty
    std::string container;       // path to a saved orbital container
    std::optional<double> dilation;

    IntegratorConfig integrator;

    std::string out_dir = "out";
    bool write_csv = true;
    bool write_jsonl = false;
    std::vector<double> conc_radii = {1.0, 2.0, 4.0};

    std::uint64_t seed = 0;
};

namespace detail {

inline std::string json_type_name(const json& j) { return j.type_name(); }

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& path) {
    if (!j.is_object()) throw ConfigError("config: \"" + path + "\" must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ConfigError("config: unknown key \"" + path + "." + key + "\"");
    }
}

template <class T>
T get_as(const json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: \"" + path + "\" has wrong type (got " + json_type_name(j) +
                          ")");
    }
}

template <class T>
T get_req(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError("config: missing required key \"" + path + "." + key + "\"");
    return get_as<T>(j.at(key), path + "." + key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    return get_as<T>(j.at(key), path + "." + key);
}

inline int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

inline SimConfig parse_config_json(const json& root) {
    using detail::get_or;
    using detail::get_req;
    using detail::reject_unknown;

    SimConfig c;
    reject_unknown(root, {"schema_version", "grid", "physics", "initial", "integrator", "output",
                          "seed"},
                   "$");

    c.schema_version = get_req<int>(root, "schema_version", "$");
    if (c.schema_version != 1)
        throw ConfigError("config: unsupported schema_version " +
                          std::to_string(c.schema_version) + " (this build reads version 1)");

    const json& grid = root.contains("grid") ? root.at("grid") : json::object();
    reject_unknown(grid, {"n", "L", "m"}, "$.grid");
    c.n = get_req<int>(grid, "n", "$.grid");
    c.L = get_req<double>(grid, "L", "$.grid");
    c.m = get_or<double>(grid, "m", 1.0, "$.grid");

    const json& phys = root.contains("physics") ? root.at("physics") : json::object();
    reject_unknown(phys, {"mode", "kappa", "margin_over_critical"}, "$.physics");
    const std::string mode_str = get_or<std::string>(phys, "mode", "hartree-fock", "$.physics");
    try {
        c.mode = mode_from_name(mode_str);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: $.physics.mode: ") + e.what());
    }
    if (phys.contains("kappa")) c.kappa = get_req<double>(phys, "kappa", "$.physics");
    if (phys.contains("margin_over_critical"))
        c.margin_over_critical = get_req<double>(phys, "margin_over_critical", "$.physics");
    if (c.kappa.has_value() == c.margin_over_critical.has_value())
        throw ConfigError(
            "config: $.physics needs exactly one of \"kappa\" or \"margin_over_critical\"");
    if (c.kappa && !(*c.kappa >= 0.0))
        throw ConfigError("config: $.physics.kappa must be >= 0");
    if (c.margin_over_critical && !(*c.margin_over_critical > 0.0))
        throw ConfigError("config: $.physics.margin_over_critical must be > 0");
    if (c.margin_over_critical && c.mode == Mode::free_particle)
        throw ConfigError("config: margin_over_critical has no meaning in free mode");

    if (!root.contains("initial"))
        throw ConfigError("config: missing required key \"$.initial\"");
    const json& init = root.at("initial");
    reject_unknown(init, {"shells", "container", "dilation"}, "$.initial");
    const bool has_shells = init.contains("shells");
    const bool has_container = init.contains("container");
    if (has_shells == has_container)
        throw ConfigError(
            "config: $.initial needs exactly one of \"shells\" or \"container\"");
    if (has_container) c.container = get_req<std::string>(init, "container", "$.initial");
    if (has_shells) {
        const json& shells = init.at("shells");
        if (!shells.is_array() || shells.empty())
            throw ConfigError("config: $.initial.shells must be a non-empty array");
        int idx = 0;
        for (const json& s : shells) {
            const std::string path = "$.initial.shells[" + std::to_string(idx) + "]";
            reject_unknown(s, {"l", "profile", "scale", "degree"}, path);
            Shell sh;
            sh.l = get_req<int>(s, "l", path);
            const std::string prof = get_or<std::string>(s, "profile", "gaussian", path);
            try {
                sh.kind = profile_from_name(prof);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("config: " + path + ".profile: " + e.what());
            }
            sh.scale = get_req<double>(s, "scale", path);
            sh.degree = get_or<int>(s, "degree", 0, path);
            c.shells.shells.push_back(sh);
            ++idx;
        }
    }
    if (init.contains("dilation")) {
        c.dilation = get_req<double>(init, "dilation", "$.initial");
        if (!(*c.dilation > 0.0)) throw ConfigError("config: $.initial.dilation must be > 0");
    }

    if (!root.contains("integrator"))
        throw ConfigError("config: missing required key \"$.integrator\"");
    const json& ig = root.at("integrator");
    reject_unknown(ig,
                   {"dt", "t_end", "sample_every", "tail_frac_max", "sobolev_growth_max",
                    "drift_tol", "relowdin"},
                   "$.integrator");
    c.integrator.dt = get_req<double>(ig, "dt", "$.integrator");
    c.integrator.t_end = get_req<double>(ig, "t_end", "$.integrator");
    c.integrator.sample_every = get_or<int>(ig, "sample_every", 10, "$.integrator");
    c.integrator.tail_frac_max =
        get_or<double>(ig, "tail_frac_max", 1e-3, "$.integrator");
    c.integrator.sobolev_growth_max =
        get_or<double>(ig, "sobolev_growth_max", 10.0, "$.integrator");
    c.integrator.drift_tol = get_or<double>(ig, "drift_tol", drift_tol, "$.integrator");
    c.integrator.relowdin = get_or<bool>(ig, "relowdin", false, "$.integrator");

    const json& out = root.contains("output") ? root.at("output") : json::object();
    reject_unknown(out, {"directory", "csv", "jsonl", "concentration_radii"}, "$.output");
    c.out_dir = get_or<std::string>(out, "directory", "out", "$.output");
    c.write_csv = get_or<bool>(out, "csv", true, "$.output");
    c.write_jsonl = get_or<bool>(out, "jsonl", false, "$.output");
    if (out.contains("concentration_radii")) {
        c.conc_radii =
            detail::get_as<std::vector<double>>(out.at("concentration_radii"),
                                                "$.output.concentration_radii");
        if (c.conc_radii.empty())
            throw ConfigError("config: $.output.concentration_radii must be non-empty");
        for (double r : c.conc_radii)
            if (!(r > 0.0))
                throw ConfigError("config: $.output.concentration_radii entries must be > 0");
    }
    c.integrator.radii = c.conc_radii;

    c.seed = get_or<std::uint64_t>(root, "seed", 0, "$");

    try {
        c.integrator.validate();
        make_grid(c.n, c.L, c.m);  // range checks
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline SimConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: JSON parse error at line " +
                          std::to_string(detail::line_of_byte(text, e.byte)) + ": " + e.what());
    }
    return parse_config_json(root);
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// The fully resolved document: all defaults materialized, overrides applied.
// Re-parsing this JSON yields an identical SimConfig.
inline json resolved_json(const SimConfig& c) {
    json root;
    root["schema_version"] = c.schema_version;
    root["grid"] = {{"n", c.n}, {"L", c.L}, {"m", c.m}};
    json phys;
    phys["mode"] = mode_name(c.mode);
    if (c.kappa) phys["kappa"] = *c.kappa;
    if (c.margin_over_critical) phys["margin_over_critical"] = *c.margin_over_critical;
    root["physics"] = phys;
    json init;
    if (!c.container.empty()) {
        init["container"] = c.container;
    } else {
        json shells = json::array();
        for (const Shell& s : c.shells.shells) {
            json sh;
            sh["l"] = s.l;
            sh["profile"] = profile_name(s.kind);
            sh["scale"] = s.scale;
            sh["degree"] = s.degree;
            shells.push_back(sh);
        }
        init["shells"] = shells;
    }
    if (c.dilation) init["dilation"] = *c.dilation;
    root["initial"] = init;
    root["integrator"] = {{"dt", c.integrator.dt},
                          {"t_end", c.integrator.t_end},
                          {"sample_every", c.integrator.sample_every},
                          {"tail_frac_max", c.integrator.tail_frac_max},
                          {"sobolev_growth_max", c.integrator.sobolev_growth_max},
                          {"drift_tol", c.integrator.drift_tol},
                          {"relowdin", c.integrator.relowdin}};
    root["output"] = {{"directory", c.out_dir},
                      {"csv", c.write_csv},
                      {"jsonl", c.write_jsonl},
                      {"concentration_radii", c.conc_radii}};
    root["seed"] = c.seed;
    return root;
}

}  // namespace prhf
