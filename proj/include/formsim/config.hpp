#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "formsim/experiment.hpp"

namespace formsim {

/// Bad configuration value; `key` is the offending "section.name".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Experiment-level options that live next to the simulation settings in a file.
struct FileOptions {
    std::optional<Group> group;
    std::optional<std::size_t> parallelism;
    bool seed_set = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(out)) {
        throw ConfigError(key, "expected a number, got '" + raw + "'");
    }
    return out;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + raw + "'");
    }
    return out;
}

inline bool to_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key, "expected a boolean, got '" + raw + "'");
}

inline std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double positive(const std::string& key, double x) {
    if (!(x > 0.0)) throw ConfigError(key, "must be positive");
    return x;
}

inline double non_negative(const std::string& key, double x) {
    if (!(x >= 0.0)) throw ConfigError(key, "must be non-negative");
    return x;
}

inline double probability(const std::string& key, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(key, "must lie in [0, 1]");
    return x;
}

}  // namespace detail

/// Apply one "section.name = value" assignment.
inline void apply_setting(Settings& s, FileOptions& opts, const std::string& key,
                          const std::string& value) {
    using namespace detail;
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> table{
        {"experiment.group",
         [&](const std::string& v) {
             try {
                 opts.group = parse_group(trim(v));
             } catch (const std::domain_error& e) {
                 throw ConfigError(key, e.what());
             }
         }},
        {"experiment.runs",
         [&](const std::string& v) {
             s.runs = to_uint(key, v);
             if (s.runs < 1) throw ConfigError(key, "must be >= 1");
         }},
        {"experiment.seed", [&](const std::string& v) { s.seed = to_uint(key, v); opts.seed_set = true; }},
        {"experiment.parallelism",
         [&](const std::string& v) {
             opts.parallelism = to_uint(key, v);
             if (*opts.parallelism < 1) throw ConfigError(key, "must be >= 1");
         }},
        {"experiment.controller",
         [&](const std::string& v) {
             const std::string c = trim(v);
             if (c == "dem") s.controller = Controller::dem;
             else if (c == "baseline") s.controller = Controller::baseline;
             else throw ConfigError(key, "expected 'dem' or 'baseline'");
         }},
        {"schedule.v_m", [&](const std::string& v) { s.v_m = positive(key, to_double(key, v)); }},
        {"schedule.path_length",
         [&](const std::string& v) { s.path_length = positive(key, to_double(key, v)); }},
        {"schedule.waveform",
         [&](const std::string& v) {
             const std::string w = trim(v);
             if (w == "trapezoid") s.waveform.kind = Waveform::trapezoid;
             else if (w == "sine") s.waveform.kind = Waveform::sine;
             else throw ConfigError(key, "expected 'trapezoid' or 'sine'");
         }},
        {"schedule.ramp_fraction",
         [&](const std::string& v) {
             const double r = to_double(key, v);
             if (!(r > 0.0 && r <= 0.25)) throw ConfigError(key, "must lie in (0, 0.25]");
             s.waveform.ramp_fraction = r;
         }},
        {"schedule.omega_amplitude",
         [&](const std::string& v) { s.omega_amplitude = non_negative(key, to_double(key, v)); }},
        {"timing.T", [&](const std::string& v) { s.T = positive(key, to_double(key, v)); }},
        {"timing.d",
         [&](const std::string& v) {
             const double d = to_double(key, v);
             if (!(d >= 0.0 && d < 1.0)) throw ConfigError(key, "must lie in [0, 1)");
             s.d = d;
         }},
        {"link.p_true", [&](const std::string& v) { s.p_true = probability(key, to_double(key, v)); }},
        {"dem.p_assumed",
         [&](const std::string& v) { s.p_assumed = probability(key, to_double(key, v)); }},
        {"dem.weights",
         [&](const std::string& v) {
             const auto items = split_list(v);
             if (items.size() != 3) throw ConfigError(key, "expected three comma-separated weights");
             std::array<double, 3> w{};
             bool any = false;
             for (std::size_t i = 0; i < 3; ++i) {
                 w[i] = non_negative(key, to_double(key, items[i]));
                 any = any || w[i] > 0.0;
             }
             if (!any) throw ConfigError(key, "at least one weight must be positive");
             s.weights = w;
         }},
        {"dem.rho", [&](const std::string& v) { s.rho = non_negative(key, to_double(key, v)); }},
        {"dem.clamp_factor",
         [&](const std::string& v) { s.clamp_factor = positive(key, to_double(key, v)); }},
        {"dem.solver",
         [&](const std::string& v) {
             const std::string w = trim(v);
             if (w == "profile") s.solver = DemSolver::profile;
             else if (w == "grid") s.solver = DemSolver::grid;
             else throw ConfigError(key, "expected 'profile' or 'grid'");
         }},
        {"dem.profile_points",
         [&](const std::string& v) {
             const auto n = to_uint(key, v);
             if (n < 3 || n > 100000) throw ConfigError(key, "must lie in [3, 100000]");
             s.profile_points = static_cast<int>(n);
         }},
        {"dem.grid_points",
         [&](const std::string& v) {
             const auto n = to_uint(key, v);
             if (n < 3 || n > 10000) throw ConfigError(key, "must lie in [3, 10000]");
             s.grid_points = static_cast<int>(n);
         }},
        {"dem.grid_refinements",
         [&](const std::string& v) {
             const auto n = to_uint(key, v);
             if (n > 64) throw ConfigError(key, "must be <= 64");
             s.grid_refinements = static_cast<int>(n);
         }},
        {"noise.enabled", [&](const std::string& v) { s.noise_enabled = to_bool(key, v); }},
        {"noise.rho", [&](const std::string& v) { s.noise_rho = non_negative(key, to_double(key, v)); }},
        {"noise.v_floor", [&](const std::string& v) { s.v_floor = non_negative(key, to_double(key, v)); }},
        {"noise.omega_floor",
         [&](const std::string& v) { s.omega_floor = non_negative(key, to_double(key, v)); }},
        {"formation.side", [&](const std::string& v) { s.side = positive(key, to_double(key, v)); }},
        {"baseline.k_pos",
         [&](const std::string& v) { s.baseline.k_pos = positive(key, to_double(key, v)); }},
        {"baseline.k_theta",
         [&](const std::string& v) { s.baseline.k_theta = positive(key, to_double(key, v)); }},
        {"metrics.selected_cycles",
         [&](const std::string& v) {
             std::vector<std::size_t> cycles;
             for (const auto& item : split_list(v)) cycles.push_back(to_uint(key, item));
             std::sort(cycles.begin(), cycles.end());
             cycles.erase(std::unique(cycles.begin(), cycles.end()), cycles.end());
             s.selected_cycles = std::move(cycles);
         }},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second(value);
}

/// Parse INI-style text:
///
///   [dem]
///   p_assumed = 0.7
///   weights = 1, 1, 1
///
/// Keys outside a section are rejected.
inline void load_config_text(const std::string& text, Settings& s, FileOptions& opts) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("<file>", "line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(section, "key outside of a section");
        for (const auto& [name, node] : body) {
            apply_setting(s, opts, section + "." + name, node.get_value<std::string>());
        }
    }
}

}  // namespace formsim
