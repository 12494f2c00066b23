#pragma once

// Run configuration: a TOML-compatible key = value format with [sections],
// numeric scalars, strings, and flat numeric arrays. Errors carry the file
// name and line. Flag overrides ("section.key=value") are applied after the
// file parse and recorded by the caller in the manifest.

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lerayflux/io.hpp"
#include "lerayflux/model.hpp"

namespace lerayflux {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigValue {
    std::string raw;
    std::vector<double> list;
    bool is_list = false;
    int line = 0;

    double as_double(const std::string& origin, const std::string& key) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(raw, &pos);
            while (pos < raw.size() && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(origin + ":" + std::to_string(line) + ": key '" + key +
                              "' expects a number, got '" + raw + "'");
        }
    }
    long long as_int(const std::string& origin, const std::string& key) const {
        const double v = as_double(origin, key);
        const long long i = static_cast<long long>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError(origin + ":" + std::to_string(line) + ": key '" + key +
                              "' expects an integer");
        return i;
    }
};

struct ParsedConfig {
    std::string origin;
    // section -> key -> value
    std::map<std::string, std::map<std::string, ConfigValue>> sections;
};

namespace detail {
inline std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}
inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}
} // namespace detail

inline ParsedConfig parse_config_text(const std::string& text, const std::string& origin) {
    ParsedConfig cfg;
    cfg.origin = origin;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = detail::strip(line.substr(1, line.size() - 2));
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::strip(line.substr(0, eq));
        std::string value = detail::strip(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        ConfigValue v;
        v.line = lineno;
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated array for '" + key + "'");
            v.is_list = true;
            std::string body = value.substr(1, value.size() - 2);
            std::istringstream vs(body);
            std::string item;
            while (std::getline(vs, item, ',')) {
                item = detail::strip(item);
                if (item.empty()) continue;
                try {
                    v.list.push_back(std::stod(item));
                } catch (const std::exception&) {
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad array entry '" +
                                      item + "' for key '" + key + "'");
                }
            }
            v.raw = value;
        } else {
            v.raw = detail::unquote(value);
        }
        cfg.sections[section][key] = std::move(v);
    }
    return cfg;
}

inline ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

/// Apply command-line overrides of the form "section.key=value".
inline void apply_overrides(ParsedConfig& cfg, const std::vector<std::string>& sets) {
    for (const std::string& s : sets) {
        const auto eq = s.find('=');
        const auto dot = s.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("--set expects section.key=value, got '" + s + "'");
        ConfigValue v;
        v.line = 0;
        std::string value = detail::strip(s.substr(eq + 1));
        if (!value.empty() && value.front() == '[') {
            ParsedConfig tmp = parse_config_text("x = " + value, "<override>");
            v = tmp.sections[""]["x"];
        } else {
            v.raw = detail::unquote(value);
        }
        cfg.sections[detail::strip(s.substr(0, dot))][detail::strip(s.substr(dot + 1, eq - dot - 1))] = v;
    }
}

// ---------------------------------------------------------------------------
// Typed run configuration.
// ---------------------------------------------------------------------------

struct RunConfig {
    // [grid]
    int dim = 3;
    int n = 32;
    // [model]
    ModelParams params;
    Variant variant = Variant::Inviscid;
    // [time]
    double dt = 0.0; // 0 = auto from the CFL estimate
    double t_end = 1.0;
    double cfl_safety = 0.5;
    // [ic]
    InitialConditionSpec ic;
    // [output]
    int series_every = 1;
    int snapshot_every = 0;
    std::string out_dir = "out";
    // [flux]
    std::vector<double> kappas = {1, 2, 3, 4, 5, 6, 7, 8};
    // [defect]
    std::vector<double> eps_list = {0.4, 0.2, 0.1};
    std::string defect_form = "both";
    int quadrature_points = 17;
    // [besov]
    double besov_s = 1.0 / 3.0;
    double besov_p = 3.0;
    double besov_q = std::numeric_limits<double>::infinity();
    std::vector<double> xi_list = {0.05, 0.1, 0.2, 0.4, 0.8};
    // [sweep]
    std::vector<double> alpha_list = {0.5, 0.25, 0.125};

    std::string config_hash; // FNV of the canonical key/value dump
};

namespace detail {

struct SectionReader {
    const ParsedConfig& cfg;
    std::string section;
    std::map<std::string, bool> seen;

    const ConfigValue* get(const std::string& key) {
        auto sit = cfg.sections.find(section);
        if (sit == cfg.sections.end()) return nullptr;
        auto it = sit->second.find(key);
        if (it == sit->second.end()) return nullptr;
        seen[key] = true;
        return &it->second;
    }
    double number(const std::string& key, double fallback) {
        const ConfigValue* v = get(key);
        return v ? v->as_double(cfg.origin, key) : fallback;
    }
    long long integer(const std::string& key, long long fallback) {
        const ConfigValue* v = get(key);
        return v ? v->as_int(cfg.origin, key) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const ConfigValue* v = get(key);
        return v ? v->raw : fallback;
    }
    std::vector<double> list(const std::string& key, std::vector<double> fallback) {
        const ConfigValue* v = get(key);
        if (!v) return fallback;
        if (!v->is_list)
            throw ConfigError(cfg.origin + ":" + std::to_string(v->line) + ": key '" + key +
                              "' expects an array");
        return v->list;
    }
    void reject_unknown() {
        auto sit = cfg.sections.find(section);
        if (sit == cfg.sections.end()) return;
        for (const auto& kv : sit->second)
            if (!seen.count(kv.first))
                throw ConfigError(cfg.origin + ":" + std::to_string(kv.second.line) +
                                  ": unknown key '" + kv.first + "' in [" + section + "]");
    }
};

} // namespace detail

inline RunConfig make_run_config(const ParsedConfig& parsed) {
    RunConfig rc;
    for (const auto& sec : parsed.sections) {
        static const char* known[] = {"", "grid", "model", "time", "ic", "output",
                                      "flux", "defect", "besov", "sweep"};
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* s) { return sec.first == s; }) == std::end(known))
            throw ConfigError(parsed.origin + ": unknown section [" + sec.first + "]");
    }

    detail::SectionReader grid{parsed, "grid", {}};
    rc.dim = static_cast<int>(grid.integer("dim", rc.dim));
    rc.n = static_cast<int>(grid.integer("n", rc.n));
    grid.reject_unknown();

    detail::SectionReader model{parsed, "model", {}};
    rc.params.alpha = model.number("alpha", rc.params.alpha);
    rc.params.nu = model.number("nu", rc.params.nu);
    rc.params.diff_d = model.number("diff_d", rc.params.diff_d);
    rc.params.K = model.number("K", rc.params.K);
    rc.params.A = model.number("A", rc.params.A);
    rc.params.theta_i = model.number("theta_i", rc.params.theta_i);
    rc.params.theta_bar = model.number("theta_bar", rc.params.theta_bar);
    const std::string variant = model.text("variant", "inviscid");
    if (variant == "inviscid") rc.variant = Variant::Inviscid;
    else if (variant == "viscous") rc.variant = Variant::Viscous;
    else {
        const ConfigValue* v = model.get("variant");
        throw ConfigError(parsed.origin + ":" + std::to_string(v ? v->line : 0) +
                          ": variant must be 'inviscid' or 'viscous'");
    }
    model.reject_unknown();

    detail::SectionReader time{parsed, "time", {}};
    rc.dt = time.number("dt", rc.dt);
    rc.t_end = time.number("t_end", rc.t_end);
    rc.cfl_safety = time.number("cfl_safety", rc.cfl_safety);
    time.reject_unknown();

    detail::SectionReader ic{parsed, "ic", {}};
    rc.ic.kind = parse_ic_kind(ic.text("kind", "taylor_green"));
    rc.ic.amplitude = ic.number("amplitude", rc.ic.amplitude);
    rc.ic.z_amplitude = ic.number("z_amplitude", rc.ic.z_amplitude);
    rc.ic.seed = static_cast<unsigned long long>(ic.integer("seed", 1));
    rc.ic.slope = ic.number("slope", rc.ic.slope);
    ic.reject_unknown();

    detail::SectionReader output{parsed, "output", {}};
    rc.series_every = static_cast<int>(output.integer("series_every", rc.series_every));
    rc.snapshot_every = static_cast<int>(output.integer("snapshot_every", rc.snapshot_every));
    rc.out_dir = output.text("out_dir", rc.out_dir);
    output.reject_unknown();

    detail::SectionReader flux{parsed, "flux", {}};
    rc.kappas = flux.list("kappas", rc.kappas);
    flux.reject_unknown();

    detail::SectionReader defect{parsed, "defect", {}};
    rc.eps_list = defect.list("eps_list", rc.eps_list);
    rc.defect_form = defect.text("form", rc.defect_form);
    if (rc.defect_form != "both" && rc.defect_form != "increment" && rc.defect_form != "algebraic")
        throw ConfigError(parsed.origin + ": [defect] form must be both|increment|algebraic");
    rc.quadrature_points = static_cast<int>(defect.integer("quadrature_points", rc.quadrature_points));
    defect.reject_unknown();

    detail::SectionReader besov{parsed, "besov", {}};
    rc.besov_s = besov.number("s", rc.besov_s);
    rc.besov_p = besov.number("p", rc.besov_p);
    const std::string q = besov.text("q", "inf");
    rc.besov_q = (q == "inf" || q == "infinity") ? std::numeric_limits<double>::infinity()
                                                 : std::stod(q);
    rc.xi_list = besov.list("xi_list", rc.xi_list);
    besov.reject_unknown();

    detail::SectionReader sweep{parsed, "sweep", {}};
    rc.alpha_list = sweep.list("alpha_list", rc.alpha_list);
    sweep.reject_unknown();

    // Numeric contracts, anchored to the file when possible.
    try {
        Grid check(rc.dim, rc.n);
        (void)check;
        rc.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(parsed.origin + ": " + e.what());
    }
    if (rc.dt < 0.0) throw ConfigError(parsed.origin + ": [time] dt must be >= 0");
    if (!(rc.t_end > 0.0)) throw ConfigError(parsed.origin + ": [time] t_end must be > 0");
    if (!(rc.cfl_safety > 0.0) || rc.cfl_safety > 1.0)
        throw ConfigError(parsed.origin + ": [time] cfl_safety must be in (0, 1]");
    if (rc.series_every < 1) throw ConfigError(parsed.origin + ": [output] series_every must be >= 1");
    if (rc.snapshot_every < 0)
        throw ConfigError(parsed.origin + ": [output] snapshot_every must be >= 0");

    // Canonical dump -> hash (section and key order fixed by the maps).
    std::ostringstream canon;
    for (const auto& sec : parsed.sections)
        for (const auto& kv : sec.second)
            canon << sec.first << '.' << kv.first << '=' << kv.second.raw << '\n';
    const std::string dump = canon.str();
    rc.config_hash = hex64(fnv1a(dump.data(), dump.size()));
    return rc;
}

} // namespace lerayflux
