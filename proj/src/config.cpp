#include "higgsflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace higgsflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("configuration key " + key + ": not a number: " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("configuration key " + key + ": trailing text in " + value);
    return v;
}

long parse_int(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("configuration key " + key + ": not an integer: " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("configuration key " + key + ": trailing text in " + value);
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw std::invalid_argument("configuration key " + key + ": expected on/off, got " + value);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    if (out.empty())
        throw std::invalid_argument("configuration key " + key + ": empty list");
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

std::string canonical_key(const std::string& key) {
    if (key == "preset") return "scenario.preset";
    if (key == "eps") return "flow.eps";
    if (key == "q") return "lattice.q";
    if (key == "degree") return "scenario.degree";
    return key;
}

}  // namespace

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.preset = name;
    if (name == "vacuum") {
        cfg.n = 3;
        cfg.sites = 32;
        cfg.extent = 6.0;
        cfg.q = 0;
        cfg.degree = 0;
        cfg.eps = 0.5;
        cfg.t_end = 1.0;
        cfg.sample_every = 0.05;
    } else if (name == "planar_vortex") {
        cfg.n = 2;
        cfg.sites = 128;
        cfg.extent = 8.0;
        cfg.q = 1;
        cfg.degree = 1;
        cfg.eps = 0.125;
        cfg.t_end = 5.0;
        cfg.sample_every = 0.25;
    } else if (name == "line_twisted") {
        cfg.n = 3;
        cfg.sites = 48;
        cfg.extent = 6.0;
        cfg.q = 1;
        cfg.degree = 1;
        cfg.eps = 0.5;
        cfg.t_end = 0.5;
        cfg.sample_every = 0.05;
    } else if (name == "vortex_ring") {
        cfg.n = 3;
        cfg.sites = 48;
        cfg.extent = 6.0;
        cfg.q = 0;
        cfg.degree = 1;
        cfg.radius = 1.5;
        cfg.eps = 0.5;
        cfg.t_end = 1.4;
        cfg.sample_every = 0.05;
        cfg.allow_tight_ring = true;  // the default ring starts at 3ε
    } else {
        throw std::invalid_argument(
            "unknown preset: " + name +
            " (valid: vacuum, planar_vortex, line_twisted, vortex_ring)");
    }
    return cfg;
}

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = canonical_key(trim(raw_key));
    const std::string value = trim(raw_value);
    if (key == "scenario.preset") {
        const RunConfig fresh = preset_config(value);
        cfg = fresh;
    } else if (key == "lattice.n") {
        cfg.n = static_cast<int>(parse_int(key, value));
    } else if (key == "lattice.sites") {
        cfg.sites = static_cast<int>(parse_int(key, value));
    } else if (key == "lattice.extent") {
        cfg.extent = parse_double(key, value);
    } else if (key == "lattice.q") {
        cfg.q = static_cast<int>(parse_int(key, value));
    } else if (key == "flow.eps") {
        cfg.eps = parse_double(key, value);
    } else if (key == "flow.dt_factor") {
        cfg.dt_factor = parse_double(key, value);
    } else if (key == "flow.t_end") {
        cfg.t_end = parse_double(key, value);
    } else if (key == "flow.sample_every") {
        cfg.sample_every = parse_double(key, value);
    } else if (key == "flow.integrator") {
        if (value != "rk4" && value != "euler")
            throw std::invalid_argument("flow.integrator: expected rk4 or euler, got " + value);
        cfg.integrator = value;
    } else if (key == "scenario.degree") {
        cfg.degree = static_cast<int>(parse_int(key, value));
    } else if (key == "scenario.radius") {
        cfg.radius = parse_double(key, value);
    } else if (key == "scenario.allow_tight_ring") {
        cfg.allow_tight_ring = parse_bool(key, value);
    } else if (key == "diagnostics.beta") {
        cfg.beta = parse_double(key, value);
    } else if (key == "diagnostics.t0") {
        cfg.t0 = parse_double(key, value);
    } else if (key == "diagnostics.c_grid") {
        cfg.c_grid = parse_list(key, value);
    } else if (key == "diagnostics.eta_grid") {
        cfg.eta_grid = parse_list(key, value);
    } else if (key == "diagnostics.decay") {
        cfg.diag_decay = parse_bool(key, value);
    } else if (key == "diagnostics.monotonicity") {
        cfg.diag_monotonicity = parse_bool(key, value);
    } else if (key == "diagnostics.quantization") {
        cfg.diag_quantization = parse_bool(key, value);
    } else if (key == "diagnostics.brakke") {
        cfg.diag_brakke = parse_bool(key, value);
    } else if (key == "diagnostics.current") {
        cfg.diag_current = parse_bool(key, value);
    } else if (key == "diagnostics.clearing") {
        cfg.diag_clearing = parse_bool(key, value);
    } else if (key == "output.dir") {
        cfg.out_dir = value;
    } else if (key == "output.snapshot_every") {
        cfg.snapshot_every = static_cast<int>(parse_int(key, value));
    } else if (key == "output.images") {
        cfg.write_images = parse_bool(key, value);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else {
        throw std::invalid_argument("unknown configuration key: " + key);
    }
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
    std::vector<std::string> warnings;
    if (cfg.n != 2 && cfg.n != 3)
        throw std::invalid_argument("lattice.n must be 2 or 3");
    if (cfg.sites < 8) throw std::invalid_argument("lattice.sites must be at least 8");
    if (!(cfg.extent > 0.0)) throw std::invalid_argument("lattice.extent must be positive");

    const double h = cfg.h();
    if (cfg.eps < 2.0 * h - 1e-12) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "flow.eps: eps >= 2h required (eps = %.6g, 2h = %.6g)", cfg.eps, 2.0 * h);
        throw std::invalid_argument(msg);
    }
    if (cfg.eps < 3.0 * h - 1e-12) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "flow.eps: core is marginally resolved (eps = %.6g < 3h = %.6g)", cfg.eps,
                      3.0 * h);
        warnings.emplace_back(msg);
    }
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("flow.t_end must be positive");
    if (!(cfg.sample_every > 0.0) || cfg.sample_every > cfg.t_end + 1e-12)
        throw std::invalid_argument("flow.sample_every must lie in (0, t_end]");
    if (!(cfg.dt_factor > 0.0) || cfg.dt_factor > 0.25)
        throw std::invalid_argument("flow.dt_factor must lie in (0, 0.25]");
    if (!(cfg.beta > 0.0) || !(cfg.beta < 1.0))
        throw std::invalid_argument("diagnostics.beta must lie in (0, 1)");
    if (!(cfg.t0 >= 0.0)) throw std::invalid_argument("diagnostics.t0 must be nonnegative");

    if (cfg.preset == "vacuum") {
        if (cfg.q != 0 || cfg.degree != 0)
            throw std::invalid_argument("vacuum preset requires q = 0 and degree = 0");
    } else if (cfg.preset == "planar_vortex") {
        if (cfg.n != 2) throw std::invalid_argument("planar_vortex preset requires n = 2");
        if (cfg.degree < 1 || cfg.degree > 3)
            throw std::invalid_argument("planar_vortex degree must lie in {1, 2, 3}");
        if (cfg.q != cfg.degree)
            throw std::invalid_argument("planar_vortex preset requires q = degree");
    } else if (cfg.preset == "line_twisted") {
        if (cfg.n != 3) throw std::invalid_argument("line_twisted preset requires n = 3");
        if (cfg.degree < 1 || cfg.degree > 3)
            throw std::invalid_argument("line_twisted degree must lie in {1, 2, 3}");
        if (cfg.q != cfg.degree)
            throw std::invalid_argument("line_twisted preset requires q = degree");
    } else if (cfg.preset == "vortex_ring") {
        if (cfg.n != 3) throw std::invalid_argument("vortex_ring preset requires n = 3");
        if (cfg.q != 0) throw std::invalid_argument("vortex_ring preset requires q = 0");
        if (cfg.degree < 1 || cfg.degree > 2)
            throw std::invalid_argument("vortex_ring degree must lie in {1, 2}");
        if (!(cfg.radius > 0.0))
            throw std::invalid_argument("vortex_ring preset requires a positive radius");
        const double comfort = 6.0 * cfg.eps;
        if (!cfg.allow_tight_ring && cfg.radius < comfort - 1e-12) {
            char msg[200];
            std::snprintf(msg, sizeof(msg),
                          "scenario.radius: radius >= 6*eps required (radius = %.6g, 6*eps = "
                          "%.6g); set scenario.allow_tight_ring = on to accept down to 2.5*eps",
                          cfg.radius, comfort);
            throw std::invalid_argument(msg);
        }
        if (cfg.allow_tight_ring && cfg.radius < comfort - 1e-12) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "scenario.radius: tight ring accepted (radius = %.6g < 6*eps = %.6g)",
                          cfg.radius, comfort);
            warnings.emplace_back(msg);
        }
    } else {
        throw std::invalid_argument(
            "unknown preset: " + cfg.preset +
            " (valid: vacuum, planar_vortex, line_twisted, vortex_ring)");
    }
    if (cfg.c_grid.empty()) throw std::invalid_argument("diagnostics.c_grid must not be empty");
    if (cfg.eta_grid.empty()) throw std::invalid_argument("diagnostics.eta_grid must not be empty");
    if (cfg.snapshot_every < 0)
        throw std::invalid_argument("output.snapshot_every must be nonnegative");
    return warnings;
}

RunConfig parse_config(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("parse_config: cannot open " + path);

    std::vector<std::pair<std::string, std::string>> settings;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        std::size_t sep = body.find('=');
        if (sep == std::string::npos) sep = body.find(':');
        if (sep == std::string::npos)
            throw std::invalid_argument("parse_config: " + path + ":" +
                                        std::to_string(line_no) + ": expected key = value");
        settings.emplace_back(trim(body.substr(0, sep)), trim(body.substr(sep + 1)));
    }

    RunConfig cfg;
    bool preset_seen = false;
    for (const auto& [k, v] : settings) {
        if (canonical_key(k) == "scenario.preset") {
            cfg = preset_config(v);
            preset_seen = true;
            break;  // only the first preset key counts; duplicates are caught below
        }
    }
    if (!preset_seen) cfg = preset_config("vacuum");

    bool preset_applied = false;
    for (const auto& [k, v] : settings) {
        if (canonical_key(k) == "scenario.preset") {
            if (preset_applied)
                throw std::invalid_argument("parse_config: duplicate scenario.preset key");
            preset_applied = true;
            continue;  // already folded into the defaults
        }
        apply_setting(cfg, k, v);
    }
    auto w = validate_config(cfg);
    if (warnings) warnings->insert(warnings->end(), w.begin(), w.end());
    return cfg;
}

void apply_overrides(RunConfig& cfg, std::span<const std::string> overrides,
                     std::vector<std::string>* warnings) {
    for (const std::string& item : overrides) {
        const auto sep = item.find('=');
        if (sep == std::string::npos)
            throw std::invalid_argument("override must look like key=value: " + item);
        apply_setting(cfg, item.substr(0, sep), item.substr(sep + 1));
    }
    auto w = validate_config(cfg);
    if (warnings) warnings->insert(warnings->end(), w.begin(), w.end());
}

std::map<std::string, std::string> config_entries(const RunConfig& cfg) {
    std::map<std::string, std::string> m;
    m["lattice.n"] = std::to_string(cfg.n);
    m["lattice.sites"] = std::to_string(cfg.sites);
    m["lattice.extent"] = format_double(cfg.extent);
    m["lattice.q"] = std::to_string(cfg.q);
    m["flow.eps"] = format_double(cfg.eps);
    m["flow.dt_factor"] = format_double(cfg.dt_factor);
    m["flow.t_end"] = format_double(cfg.t_end);
    m["flow.sample_every"] = format_double(cfg.sample_every);
    m["flow.integrator"] = cfg.integrator;
    m["scenario.preset"] = cfg.preset;
    m["scenario.degree"] = std::to_string(cfg.degree);
    m["scenario.radius"] = format_double(cfg.radius);
    m["scenario.allow_tight_ring"] = cfg.allow_tight_ring ? "on" : "off";
    m["diagnostics.beta"] = format_double(cfg.beta);
    m["diagnostics.t0"] = format_double(cfg.t0);
    m["diagnostics.c_grid"] = format_list(cfg.c_grid);
    m["diagnostics.eta_grid"] = format_list(cfg.eta_grid);
    m["diagnostics.decay"] = cfg.diag_decay ? "on" : "off";
    m["diagnostics.monotonicity"] = cfg.diag_monotonicity ? "on" : "off";
    m["diagnostics.quantization"] = cfg.diag_quantization ? "on" : "off";
    m["diagnostics.brakke"] = cfg.diag_brakke ? "on" : "off";
    m["diagnostics.current"] = cfg.diag_current ? "on" : "off";
    m["diagnostics.clearing"] = cfg.diag_clearing ? "on" : "off";
    m["output.dir"] = cfg.out_dir;
    m["output.snapshot_every"] = std::to_string(cfg.snapshot_every);
    m["output.images"] = cfg.write_images ? "on" : "off";
    m["seed"] = std::to_string(cfg.seed);
    return m;
}

std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : config_entries(cfg)) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

}  // namespace higgsflow
