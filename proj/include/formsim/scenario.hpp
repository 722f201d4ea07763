#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "formsim/control.hpp"
#include "formsim/formation.hpp"
#include "formsim/kinematics.hpp"
#include "formsim/netproto.hpp"
#include "formsim/rng.hpp"

namespace formsim {

enum class Waveform { trapezoid, sine };

/// Shape of the master's angular-velocity wave.
struct WaveformSpec {
    Waveform kind = Waveform::trapezoid;
    double ramp_fraction = 0.125;  // trapezoid: rise time as a fraction of the period
};

/// Preplanned master commands, one per control cycle.
struct MasterSchedule {
    std::vector<VelocityCommand> commands;
    double T = 0.1;
    std::size_t total_cycles = 0;
    std::size_t period = 0;  // cycles per omega period; 0 when the path is too short to curve
    double path_length = 0.0;

    double max_abs_v() const {
        double m = 0.0;
        for (const auto& c : commands) m = std::max(m, std::abs(c.v));
        return m;
    }
    double max_abs_omega() const {
        double m = 0.0;
        for (const auto& c : commands) m = std::max(m, std::abs(c.omega));
        return m;
    }
};

/// Unit-amplitude periodic wave evaluated at phase in [0, 1).
///
/// Trapezoid: rises 0 -> +1 over `ramp`, holds +1 until 1/2 - ramp, falls
/// through zero to -1 by 1/2 + ramp, holds -1, and returns to 0 at the end of
/// the period. Each period therefore contains one left and one right lobe.
inline double wave_value(const WaveformSpec& wave, double phase) {
    if (wave.kind == Waveform::sine) {
        return std::sin(2.0 * std::numbers::pi * phase);
    }
    const double r = wave.ramp_fraction;
    if (phase < r) return phase / r;
    if (phase < 0.5 - r) return 1.0;
    if (phase < 0.5 + r) return 1.0 - (phase - (0.5 - r)) / r;
    if (phase < 1.0 - r) return -1.0;
    return -1.0 + (phase - (1.0 - r)) / r;
}

/// S-shaped path: constant linear velocity, periodic angular velocity.
///
/// total_cycles = round(path_length / (v_m T)); the omega period is
/// floor(4/9 total_cycles) cycles; |omega| never exceeds `omega_amplitude`
/// (numerically equal to v_m when not given).
inline MasterSchedule s_path_schedule(double v_m, double T, double path_length,
                                      const WaveformSpec& wave = {},
                                      std::optional<double> omega_amplitude = std::nullopt) {
    if (!(v_m > 0.0) || !(T > 0.0) || !(path_length > 0.0)) {
        throw std::domain_error("s_path_schedule: v_m, T and path_length must be positive");
    }
    if (wave.kind == Waveform::trapezoid && !(wave.ramp_fraction > 0.0 && wave.ramp_fraction <= 0.25)) {
        throw std::domain_error("s_path_schedule: ramp_fraction must lie in (0, 0.25]");
    }
    const double amplitude = omega_amplitude.value_or(v_m);
    if (!(amplitude >= 0.0)) {
        throw std::domain_error("s_path_schedule: omega amplitude must be non-negative");
    }
    MasterSchedule s;
    s.T = T;
    s.path_length = path_length;
    s.total_cycles = static_cast<std::size_t>(std::llround(path_length / (v_m * T)));
    s.period = (4 * s.total_cycles) / 9;
    s.commands.reserve(s.total_cycles);
    for (std::size_t k = 0; k < s.total_cycles; ++k) {
        double omega = 0.0;
        if (s.period > 0) {
            const double phase = static_cast<double>(k % s.period) / static_cast<double>(s.period);
            omega = std::clamp(amplitude * wave_value(wave, phase), -amplitude, amplitude);
        }
        s.commands.push_back({v_m, omega});
    }
    return s;
}

/// Straight-line schedule (omega = 0) with `cycles` cycles.
inline MasterSchedule straight_schedule(double v_m, double T, std::size_t cycles) {
    MasterSchedule s;
    s.T = T;
    s.total_cycles = cycles;
    s.path_length = v_m * T * static_cast<double>(cycles);
    s.commands.assign(cycles, VelocityCommand{v_m, 0.0});
    return s;
}

enum class Controller { dem, baseline };

inline const char* to_string(Controller c) { return c == Controller::dem ? "dem" : "baseline"; }

/// Everything needed to reproduce one experiment configuration.
struct ExperimentConfig {
    std::string name;
    MasterSchedule schedule;
    FormationSpec formation;
    LinkModel link;
    DemParams dem;
    CycleTiming timing;
    NoiseModel noise;
    BaselineGains baseline;
    std::size_t runs = 50;
    std::uint64_t seed = 0;
    Controller controller = Controller::dem;
    std::optional<std::vector<std::size_t>> selected_cycles;  // explicit override

    void validate() const {
        if (runs < 1) throw std::domain_error("ExperimentConfig: runs must be >= 1");
        if (formation.desired.empty()) throw std::domain_error("ExperimentConfig: empty formation");
        if (schedule.commands.empty()) throw std::domain_error("ExperimentConfig: empty schedule");
        if (std::abs(schedule.T - timing.T) > 1e-15) {
            throw std::domain_error("ExperimentConfig: schedule and timing disagree on T");
        }
        link.validate();
        dem.validate();
        timing.validate();
        if (noise.rho < 0.0) throw std::domain_error("ExperimentConfig: noise rho must be >= 0");
    }
};

/// One (cycle, slave) record. Errors are those at the end of the cycle.
struct ErrorSample {
    std::size_t cycle = 0;
    std::size_t slave = 0;  // 1-based
    ErrorVec error;
    double pos_err = 0.0;  // m
    double ang_err = 0.0;  // deg, signed
    bool delivered = true;
};

/// Commands seen by one slave in one cycle.
struct CommandRecord {
    VelocityCommand computed;  // controller output for this cycle
    VelocityCommand hold;      // executed before the switch
    VelocityCommand hit;       // executed after the switch
};

struct RunTrace {
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    std::size_t cycles = 0;
    std::size_t slaves = 0;
    std::vector<ErrorSample> samples;     // cycle-major, slave-minor
    std::vector<CommandRecord> commands;  // same layout as samples

    const ErrorSample& at(std::size_t cycle, std::size_t slave_index) const {
        return samples[cycle * slaves + slave_index];
    }
};

inline ErrorSample make_sample(std::size_t cycle, std::size_t slave, const ErrorVec& e,
                               bool delivered) {
    return {cycle, slave, e, e.position_norm(), e.angle_deg(), delivered};
}

/// Simulate one run of an experiment.
///
/// Each cycle: measure errors from the true poses, compute and clamp slave
/// commands, draw deliveries, build hold-and-hit execution plans, propagate
/// every robot segment by segment with actuation noise, record errors.
inline RunTrace run_simulation(const ExperimentConfig& config, std::size_t run_index) {
    config.validate();
    if (run_index >= config.runs) {
        throw std::domain_error("run_simulation: run_index out of range");
    }
    const std::size_t n = config.formation.slave_count();
    const std::size_t cycles = config.schedule.total_cycles;
    const auto& desired = config.formation.desired;
    const CycleTiming& timing = config.timing;

    RunTrace trace;
    trace.run_index = run_index;
    trace.seed = run_stream_seed(config.seed, run_index);
    trace.cycles = cycles;
    trace.slaves = n;
    trace.samples.reserve(cycles * n);
    trace.commands.reserve(cycles * n);

    RandomStream rng(trace.seed);
    ProtocolState protocol(n);
    Pose master = Pose::identity();
    std::vector<Pose> slaves(n);
    for (std::size_t i = 0; i < n; ++i) slaves[i] = compose(master, desired[i]);

    std::vector<VelocityCommand> computed(n);
    auto propagate = [&](Pose pose, const ExecutionPlan& plan) {
        for (const Segment& seg : {plan.hold, plan.hit}) {
            if (seg.duration > 0.0) {
                pose = unicycle_step(pose, apply_actuation_noise(seg.cmd, config.noise, rng),
                                     seg.duration);
            }
        }
        return pose;
    };

    for (std::size_t k = 0; k < cycles; ++k) {
        const VelocityCommand master_cmd = config.schedule.commands[k];
        for (std::size_t i = 0; i < n; ++i) {
            ControlInputState in;
            in.error_now = formation_error(master, slaves[i], desired[i]);
            in.master_prev_cmd = protocol.master_executing;
            in.master_cmd = master_cmd;
            in.slave_prev_cmd = protocol.executing[i];
            const VelocityCommand u =
                config.controller == Controller::dem
                    ? dem_command(in, desired[i], config.dem, timing)
                    : baseline_pd_command(in, config.baseline, config.dem, timing);
            computed[i] = clamp_command(u, config.dem.v_max, config.dem.omega_max);
        }
        const std::vector<bool> delivered = sample_delivery(config.link, n, rng);
        const CycleAdvance plans = advance_cycle(protocol, master_cmd, computed, delivered, timing);

        master = propagate(master, plans.master);
        for (std::size_t i = 0; i < n; ++i) {
            slaves[i] = propagate(slaves[i], plans.slaves[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            trace.samples.push_back(
                make_sample(k, i + 1, formation_error(master, slaves[i], desired[i]), delivered[i]));
            trace.commands.push_back({computed[i], plans.slaves[i].hold.cmd, plans.slaves[i].hit.cmd});
        }
    }
    return trace;
}

}  // namespace formsim
