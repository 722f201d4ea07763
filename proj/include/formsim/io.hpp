#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "formsim/experiment.hpp"
#include "formsim/metrics.hpp"

namespace formsim {

inline constexpr const char* kTraceCsvHeader =
    "run,cycle,slave,ex_m,ey_m,etheta_rad,pos_err_m,ang_err_deg,delivered";

/// Nine significant digits, locale independent.
inline std::string format_g9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

/// Write the trace CSV: header, then one row per (run, cycle, slave) in that order.
inline void write_trace_csv(std::ostream& os, const std::vector<RunTrace>& traces) {
    os << kTraceCsvHeader << '\n';
    std::string line;
    for (const RunTrace& t : traces) {
        for (const ErrorSample& s : t.samples) {
            line.clear();
            line += std::to_string(t.run_index);
            line += ',';
            line += std::to_string(s.cycle);
            line += ',';
            line += std::to_string(s.slave);
            for (double x : {s.error.ex, s.error.ey, s.error.etheta, s.pos_err, s.ang_err}) {
                line += ',';
                line += format_g9(x);
            }
            line += s.delivered ? ",1\n" : ",0\n";
            os << line;
        }
    }
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["controller"] = to_string(c.controller);
    j["runs"] = c.runs;
    j["seed"] = c.seed;
    j["v_m"] = c.schedule.commands.empty() ? 0.0 : c.schedule.commands.front().v;
    j["T"] = c.timing.T;
    j["d"] = c.timing.d;
    j["path_length"] = c.schedule.path_length;
    j["total_cycles"] = c.schedule.total_cycles;
    j["omega_period_cycles"] = c.schedule.period;
    j["max_abs_omega"] = c.schedule.max_abs_omega();
    j["p_true"] = c.link.p_true;
    j["p_assumed"] = c.dem.p_assumed;
    j["weights"] = c.dem.W.w;
    j["rho"] = c.dem.rho;
    j["v_max"] = c.dem.v_max;
    j["omega_max"] = c.dem.omega_max;
    j["solver"] = c.dem.solver == DemSolver::profile ? "profile" : "grid";
    j["noise"] = {{"enabled", c.noise.enabled},
                  {"rho", c.noise.rho},
                  {"v_floor", c.noise.v_floor},
                  {"omega_floor", c.noise.omega_floor}};
    nlohmann::ordered_json formation = nlohmann::ordered_json::array();
    for (const Pose& p : c.formation.desired) formation.push_back({p.x, p.y, p.theta});
    j["formation"] = formation;
    j["baseline"] = {{"k_pos", c.baseline.k_pos}, {"k_theta", c.baseline.k_theta}};
    return j;
}

/// Summary of one configuration: maxima, selected cycles, raw samples and their means.
/// Sample and mean maps are keyed by cycle, then by 1-based slave id.
inline nlohmann::ordered_json to_json(const ExperimentConfig& c, const GroupSummary& s) {
    nlohmann::ordered_json j;
    j["config"] = to_json(c);
    j["max_abs_pos_err_m"] = s.max_abs_pos_err;
    j["max_abs_ang_err_deg"] = s.max_abs_ang_err;
    j["selected_cycles"] = s.selected;
    nlohmann::ordered_json samples = nlohmann::ordered_json::object();
    nlohmann::ordered_json means = nlohmann::ordered_json::object();
    for (const CycleSamples& cs : s.cycles) {
        const std::string ck = std::to_string(cs.cycle);
        for (std::size_t i = 0; i < cs.slaves.size(); ++i) {
            const std::string sk = std::to_string(i + 1);
            samples[ck][sk] = {{"pos_err_m", cs.slaves[i].pos_err},
                               {"ang_err_deg", cs.slaves[i].ang_err}};
            means[ck][sk] = {{"pos_err_m", cs.slaves[i].mean_pos},
                             {"ang_err_deg", cs.slaves[i].mean_ang}};
        }
    }
    j["samples"] = samples;
    j["means"] = means;
    return j;
}

}  // namespace formsim
