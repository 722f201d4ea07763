#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "formsim/kinematics.hpp"
#include "formsim/rng.hpp"

namespace formsim {

/// Per-slave probability that a command arrives before the switch instant.
struct LinkModel {
    double p_true = 1.0;

    void validate() const {
        if (!(p_true >= 0.0 && p_true <= 1.0)) {
            throw std::domain_error("LinkModel: p_true must lie in [0, 1]");
        }
    }
};

/// Control period and the fraction of it after which new commands take effect.
struct CycleTiming {
    double T = 0.1;  // s
    double d = 0.5;  // fraction of T

    void validate() const {
        if (!(T > 0.0) || !std::isfinite(T)) {
            throw std::domain_error("CycleTiming: T must be positive");
        }
        if (!(d >= 0.0 && d < 1.0)) {
            throw std::domain_error("CycleTiming: d must lie in [0, 1)");
        }
    }

    double hold_duration() const { return d * T; }
    double hit_duration() const { return (1.0 - d) * T; }
};

/// One constant-command piece of a cycle's execution.
struct Segment {
    VelocityCommand cmd;
    double duration = 0.0;  // s; zero when d == 0 for the hold segment
};

/// What one robot executes over [t, t+T): hold segment, then hit segment.
struct ExecutionPlan {
    Segment hold;
    Segment hit;
};

/// Hold-and-hit bookkeeping for the master and every slave.
struct ProtocolState {
    VelocityCommand master_executing;
    std::vector<VelocityCommand> executing;  // per slave
    std::vector<std::optional<VelocityCommand>> pending;  // delivered in the last cycle
    std::size_t cycle_index = 0;

    explicit ProtocolState(std::size_t n_slaves = 0)
        : executing(n_slaves), pending(n_slaves) {}
};

struct CycleAdvance {
    ExecutionPlan master;
    std::vector<ExecutionPlan> slaves;
};

/// Independent Bernoulli(p_true) delivery outcome per slave.
inline std::vector<bool> sample_delivery(const LinkModel& link, std::size_t n_slaves,
                                         RandomStream& rng) {
    std::vector<bool> out(n_slaves);
    for (std::size_t i = 0; i < n_slaves; ++i) {
        out[i] = rng.bernoulli(link.p_true);
    }
    return out;
}

/// Run one hold-and-hit cycle.
///
/// Every robot keeps its executing command until t + d*T. The master then
/// switches to `master_cmd`; slave i switches to `new_cmds[i]` only when
/// `delivered[i]`, otherwise it keeps holding. Late commands are dropped.
inline CycleAdvance advance_cycle(ProtocolState& state, const VelocityCommand& master_cmd,
                                  const std::vector<VelocityCommand>& new_cmds,
                                  const std::vector<bool>& delivered, const CycleTiming& timing) {
    const std::size_t n = state.executing.size();
    if (new_cmds.size() != n || delivered.size() != n || state.pending.size() != n) {
        throw std::domain_error("advance_cycle: per-slave inputs do not match slave count");
    }
    const double hold = timing.hold_duration();
    const double hit = timing.hit_duration();

    CycleAdvance out;
    out.master = {{state.master_executing, hold}, {master_cmd, hit}};
    state.master_executing = master_cmd;

    out.slaves.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        state.pending[i] = delivered[i] ? std::optional{new_cmds[i]} : std::nullopt;
        const VelocityCommand next = state.pending[i].value_or(state.executing[i]);
        out.slaves.push_back({{state.executing[i], hold}, {next, hit}});
        state.executing[i] = next;
    }
    ++state.cycle_index;
    return out;
}

/// Propagate a pose through an execution plan, skipping empty segments.
inline Pose execute_plan(const Pose& start, const ExecutionPlan& plan) {
    Pose p = start;
    if (plan.hold.duration > 0.0) {
        p = unicycle_step(p, plan.hold.cmd, plan.hold.duration);
    }
    if (plan.hit.duration > 0.0) {
        p = unicycle_step(p, plan.hit.cmd, plan.hit.duration);
    }
    return p;
}

}  // namespace formsim
