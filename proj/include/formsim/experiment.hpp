#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "formsim/scenario.hpp"

namespace formsim {

/// Default parameter values of the experiment groups.
namespace defaults {
inline constexpr double side = 0.6;          // m
inline constexpr double d = 0.5;             // switch fraction
inline constexpr double rho = 1.4153e-5;     // noise power coefficient
inline constexpr double clamp_factor = 1.5;  // v_max = 1.5 max|v_m|
inline constexpr std::size_t runs = 50;
inline constexpr double path_length = 9.0;   // m; 900 cycles at 0.1 m/s, 0.1 s
}  // namespace defaults

/// Flat, fully resolved parameter set. Config files and CLI flags write into this.
struct Settings {
    double v_m = 0.1;
    double T = 0.1;
    double d = defaults::d;
    double path_length = defaults::path_length;
    WaveformSpec waveform;
    std::optional<double> omega_amplitude;

    double p_true = 1.0;
    std::optional<double> p_assumed;  // defaults to p_true

    std::array<double, 3> weights{1.0, 1.0, 1.0};
    double rho = defaults::rho;
    double clamp_factor = defaults::clamp_factor;
    DemSolver solver = DemSolver::profile;
    int profile_points = 201;
    int grid_points = 41;
    int grid_refinements = 6;

    bool noise_enabled = true;
    std::optional<double> noise_rho;  // defaults to rho
    double v_floor = 0.01;
    double omega_floor = 0.01;

    double side = defaults::side;
    BaselineGains baseline;

    std::size_t runs = defaults::runs;
    std::uint64_t seed = 0;
    Controller controller = Controller::dem;
    std::optional<std::vector<std::size_t>> selected_cycles;
};

enum class Group { comp1, comp2, rob1, rob2, custom };

inline const char* to_string(Group g) {
    switch (g) {
        case Group::comp1: return "comp1";
        case Group::comp2: return "comp2";
        case Group::rob1: return "rob1";
        case Group::rob2: return "rob2";
        case Group::custom: return "custom";
    }
    return "?";
}

inline Group parse_group(const std::string& s) {
    if (s == "comp1") return Group::comp1;
    if (s == "comp2") return Group::comp2;
    if (s == "rob1") return Group::rob1;
    if (s == "rob2") return Group::rob2;
    if (s == "custom") return Group::custom;
    throw std::domain_error("unknown group '" + s + "'");
}

inline std::string format_number(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

/// One experiment configuration from resolved settings.
inline ExperimentConfig make_config(const Settings& s, std::string name = "custom") {
    ExperimentConfig c;
    c.name = std::move(name);
    c.timing = {s.T, s.d};
    c.timing.validate();
    c.schedule = s_path_schedule(s.v_m, s.T, s.path_length, s.waveform, s.omega_amplitude);
    c.formation = square_formation(s.side);
    c.link.p_true = s.p_true;

    c.dem.p_assumed = s.p_assumed.value_or(s.p_true);
    c.dem.W.w = s.weights;
    c.dem.rho = s.rho;
    if (!(s.clamp_factor > 0.0)) throw std::domain_error("clamp_factor must be positive");
    c.dem.v_max = s.clamp_factor * c.schedule.max_abs_v();
    // A straight schedule has no angular scale; fall back to the linear bound numerically.
    const double w_ref = c.schedule.max_abs_omega() > 0.0 ? c.schedule.max_abs_omega()
                                                          : c.schedule.max_abs_v();
    c.dem.omega_max = s.clamp_factor * w_ref;
    c.dem.solver = s.solver;
    c.dem.profile_points = s.profile_points;
    c.dem.grid_points = s.grid_points;
    c.dem.grid_refinements = s.grid_refinements;

    c.noise.enabled = s.noise_enabled;
    c.noise.rho = s.noise_rho.value_or(s.rho);
    c.noise.v_floor = s.v_floor;
    c.noise.omega_floor = s.omega_floor;

    c.baseline = s.baseline;
    c.runs = s.runs;
    c.seed = s.seed;
    c.controller = s.controller;
    c.selected_cycles = s.selected_cycles;
    c.validate();
    return c;
}

/// Configurations of one experiment group. The swept parameter and the values
/// the group pins override `base`; everything else comes from `base`.
///
///   comp1: v_m in {0.05, 0.1, 0.2}, T = 0.1, p = 1
///   comp2: T in {0.05, 0.1, 0.2}, v_m = 0.1, p = 1
///   rob1:  p_true in {0.9, 0.7, 0.5}, p_assumed = p_true, v_m = 0.1, T = 0.1
///   rob2:  p_true in {0.9, 0.7, 0.5}, p_assumed = 1, v_m = 0.1, T = 0.1
inline std::vector<ExperimentConfig> build_group(Group group, const Settings& base) {
    std::vector<ExperimentConfig> out;
    Settings s = base;
    switch (group) {
        case Group::comp1:
            for (double v : {0.05, 0.1, 0.2}) {
                s.v_m = v;
                s.T = 0.1;
                s.p_true = 1.0;
                s.p_assumed = 1.0;
                out.push_back(make_config(s, "comp1_v" + format_number(v)));
            }
            break;
        case Group::comp2:
            for (double T : {0.05, 0.1, 0.2}) {
                s.v_m = 0.1;
                s.T = T;
                s.p_true = 1.0;
                s.p_assumed = 1.0;
                out.push_back(make_config(s, "comp2_T" + format_number(T)));
            }
            break;
        case Group::rob1:
        case Group::rob2:
            for (double p : {0.9, 0.7, 0.5}) {
                s.v_m = 0.1;
                s.T = 0.1;
                s.p_true = p;
                s.p_assumed = group == Group::rob1 ? p : 1.0;
                out.push_back(make_config(s, std::string(to_string(group)) + "_p" + format_number(p)));
            }
            break;
        case Group::custom:
            out.push_back(make_config(base, "custom"));
            break;
    }
    return out;
}

}  // namespace formsim
