#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "formsim/formation.hpp"
#include "formsim/geometry.hpp"
#include "formsim/kinematics.hpp"
#include "formsim/netproto.hpp"

namespace formsim {

/// Axis-aligned box over (v, omega).
struct CommandBox {
    double v_lo = -1.0;
    double v_hi = 1.0;
    double omega_lo = -1.0;
    double omega_hi = 1.0;

    static CommandBox symmetric(double v_max, double omega_max) {
        return {-v_max, v_max, -omega_max, omega_max};
    }
};

enum class DemSolver {
    profile,  // closed-form minimization over v, 1-D search over omega
    grid,     // multi-resolution grid refinement
};

/// Parameters of the expected-error control law.
struct DemParams {
    double p_assumed = 1.0;
    WeightMatrix W;
    double rho = 1.4153e-5;
    double v_max = 0.15;
    double omega_max = 0.15;
    DemSolver solver = DemSolver::profile;
    int grid_points = 41;
    int grid_refinements = 6;
    int profile_points = 201;

    void validate() const {
        if (!(p_assumed >= 0.0 && p_assumed <= 1.0)) {
            throw std::domain_error("DemParams: p_assumed must lie in [0, 1]");
        }
        if (!(rho >= 0.0)) {
            throw std::domain_error("DemParams: rho must be non-negative");
        }
        if (!(v_max > 0.0) || !(omega_max > 0.0)) {
            throw std::domain_error("DemParams: clamp bounds must be positive");
        }
        if (grid_points < 3 || grid_refinements < 0 || profile_points < 3) {
            throw std::domain_error("DemParams: solver resolution out of range");
        }
        W.validate();
    }

    CommandBox box() const { return CommandBox::symmetric(v_max, omega_max); }
};

/// What the master knows about one slave at the start of a cycle.
struct ControlInputState {
    ErrorVec error_now;
    VelocityCommand master_prev_cmd;  // master command in force until the switch
    VelocityCommand master_cmd;       // master command after the switch
    VelocityCommand slave_prev_cmd;   // slave command in force; kept on loss
};

inline VelocityCommand clamp_command(const VelocityCommand& cmd, double v_max, double omega_max) {
    if (!(v_max > 0.0) || !(omega_max > 0.0)) {
        throw std::domain_error("clamp_command: bounds must be positive");
    }
    return {std::clamp(cmd.v, -v_max, v_max), std::clamp(cmd.omega, -omega_max, omega_max)};
}

/// Noise-free one-cycle look-ahead of a slave's formation error.
///
/// The master is placed at the origin and the slave at its perturbed relative
/// pose. Both then run the hold segment with their previous commands and the
/// hit segment with the given commands.
inline ErrorVec predict_error_next(const ErrorVec& error_now, const Pose& desired,
                                   const VelocityCommand& master_prev_cmd,
                                   const VelocityCommand& master_cmd,
                                   const VelocityCommand& slave_cmd, const CycleTiming& timing,
                                   const VelocityCommand& slave_prev_cmd) {
    const double hold = timing.hold_duration();
    const double hit = timing.hit_duration();
    const Pose master =
        execute_plan(Pose::identity(), {{master_prev_cmd, hold}, {master_cmd, hit}});
    const Pose slave = execute_plan(perturbed_relative_pose(desired, error_now),
                                    {{slave_prev_cmd, hold}, {slave_cmd, hit}});
    return formation_error(master, slave, desired);
}

/// The expected-error objective for one slave, with the cycle's fixed parts precomputed.
///
///   J(u) = p ||e(u)||_W^2 + (1 - p) ||e(hold)||_W^2 + rho T (v^2 + omega^2)
///
/// e(u) is the predicted error at the end of the cycle when the slave switches
/// to u; e(hold) is the same prediction when the command is lost.
class DemObjective {
public:
    DemObjective(const ControlInputState& state, const Pose& desired, const DemParams& params,
                 const CycleTiming& timing)
        : desired_(desired), params_(params), T_(timing.T), hit_(timing.hit_duration()) {
        const double hold = timing.hold_duration();
        master_end_ = execute_plan(Pose::identity(),
                                   {{state.master_prev_cmd, hold}, {state.master_cmd, hit_}});
        slave_mid_ = perturbed_relative_pose(desired, state.error_now);
        if (hold > 0.0) {
            slave_mid_ = unicycle_step(slave_mid_, state.slave_prev_cmd, hold);
        }
        const double c = std::cos(master_end_.theta);
        const double s = std::sin(master_end_.theta);
        const double dx = slave_mid_.x - master_end_.x;
        const double dy = slave_mid_.y - master_end_.y;
        offset_x_ = c * dx + s * dy - desired.x;
        offset_y_ = -s * dx + c * dy - desired.y;
        heading_gap_ = slave_mid_.theta - master_end_.theta - desired.theta;
        hold_cost_ = weighted_error_norm(predict(state.slave_prev_cmd), params_.W);
    }

    /// Predicted formation error at the end of the cycle if the slave executes u after the switch.
    ErrorVec predict(const VelocityCommand& u) const {
        double gx = 0.0;
        double gy = 0.0;
        direction(u.omega, gx, gy);
        return {offset_x_ + u.v * gx, offset_y_ + u.v * gy, heading_error(u.omega)};
    }

    double operator()(const VelocityCommand& u) const {
        const double p = params_.p_assumed;
        return p * weighted_error_norm(predict(u), params_.W) + (1.0 - p) * hold_cost_ +
               effort(u);
    }

    double hold_cost() const { return hold_cost_; }

    /// Minimizer over v in [v_lo, v_hi] for a fixed omega, and the objective there.
    /// J is quadratic in v once omega is fixed.
    VelocityCommand best_v_for(double omega, double v_lo, double v_hi) const {
        double gx = 0.0;
        double gy = 0.0;
        direction(omega, gx, gy);
        const auto& w = params_.W.w;
        const double p = params_.p_assumed;
        const double curvature = p * (w[0] * gx * gx + w[1] * gy * gy) + params_.rho * T_;
        const double slope = p * (w[0] * gx * offset_x_ + w[1] * gy * offset_y_);
        if (curvature <= 0.0) {
            return {v_lo, omega};
        }
        return {std::clamp(-slope / curvature, v_lo, v_hi), omega};
    }

private:
    // Master-end-frame displacement of the slave per unit linear velocity.
    void direction(double omega, double& gx, double& gy) const {
        double fx = 0.0;
        double fy = 0.0;
        arc_factors(omega, hit_, fx, fy);
        const double rel = slave_mid_.theta - master_end_.theta;
        const double c = std::cos(rel);
        const double s = std::sin(rel);
        gx = c * fx - s * fy;
        gy = s * fx + c * fy;
    }

    double heading_error(double omega) const { return wrap_angle(heading_gap_ + omega * hit_); }

    double effort(const VelocityCommand& u) const {
        return params_.rho * T_ * (u.v * u.v + u.omega * u.omega);
    }

    Pose desired_;
    DemParams params_;
    double T_;
    double hit_;
    Pose master_end_;
    Pose slave_mid_;
    double offset_x_ = 0.0;
    double offset_y_ = 0.0;
    double heading_gap_ = 0.0;
    double hold_cost_ = 0.0;
};

/// Grid search with successive zoom around the incumbent.
///
/// Evaluates a coarse x coarse grid over the box, then re-grids a neighborhood
/// whose half-width shrinks by 4x per refinement, clipped to the box. Ties go
/// to the lowest v, then the lowest omega.
template <class Objective>
VelocityCommand grid_oracle_minimize(Objective&& objective, const CommandBox& box, int coarse,
                                     int refinements) {
    if (coarse < 3 || refinements < 0) {
        throw std::domain_error("grid_oracle_minimize: need coarse >= 3 and refinements >= 0");
    }
    CommandBox region = box;
    VelocityCommand best{box.v_lo, box.omega_lo};
    double best_value = std::numeric_limits<double>::infinity();
    double half_v = 0.5 * (box.v_hi - box.v_lo);
    double half_w = 0.5 * (box.omega_hi - box.omega_lo);
    const int last = coarse - 1;

    for (int level = 0; level <= refinements; ++level) {
        const double step_v = (region.v_hi - region.v_lo) / last;
        const double step_w = (region.omega_hi - region.omega_lo) / last;
        for (int i = 0; i <= last; ++i) {
            const double v = (i == last) ? region.v_hi : region.v_lo + i * step_v;
            for (int j = 0; j <= last; ++j) {
                const double w = (j == last) ? region.omega_hi : region.omega_lo + j * step_w;
                const VelocityCommand u{v, w};
                const double value = objective(u);
                if (value < best_value ||
                    (value == best_value &&
                     (v < best.v || (v == best.v && w < best.omega)))) {
                    best_value = value;
                    best = u;
                }
            }
        }
        half_v *= 0.25;
        half_w *= 0.25;
        region.v_lo = std::max(box.v_lo, best.v - half_v);
        region.v_hi = std::min(box.v_hi, best.v + half_v);
        region.omega_lo = std::max(box.omega_lo, best.omega - half_w);
        region.omega_hi = std::min(box.omega_hi, best.omega + half_w);
    }
    return best;
}

namespace detail {

// Golden-section search for the minimum of f on [lo, hi].
template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline VelocityCommand minimize_profile(const DemObjective& J, const CommandBox& box,
                                        int points) {
    auto profile = [&](double omega) { return J(J.best_v_for(omega, box.v_lo, box.v_hi)); };
    const int last = points - 1;
    auto omega_at = [&](int k) {
        if (k == last) {
            return box.omega_hi;
        }
        const double t = static_cast<double>(k) / last;
        // Symmetric boxes put the middle node exactly on zero.
        return box.omega_lo + t * (box.omega_hi - box.omega_lo);
    };

    int best_k = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= last; ++k) {
        const double value = profile(omega_at(k));
        if (value < best_value) {
            best_value = value;
            best_k = k;
        }
    }
    VelocityCommand best = J.best_v_for(omega_at(best_k), box.v_lo, box.v_hi);

    const double lo = omega_at(std::max(best_k - 1, 0));
    const double hi = omega_at(std::min(best_k + 1, last));
    const double omega_ref = golden_section(profile, lo, hi, 1e-13 * (1.0 + std::abs(hi - lo)));
    const VelocityCommand refined = J.best_v_for(omega_ref, box.v_lo, box.v_hi);
    if (J(refined) < best_value) {
        best = refined;
    }
    return best;
}

}  // namespace detail

/// The expected-error control law: argmin of DemObjective over the clamp box.
///
/// The clamped hold command and the clamped master command are always
/// considered, so the result is never worse than either.
inline VelocityCommand dem_command(const ControlInputState& state, const Pose& desired,
                                   const DemParams& params, const CycleTiming& timing) {
    const DemObjective J(state, desired, params, timing);
    const CommandBox box = params.box();

    VelocityCommand best = params.solver == DemSolver::grid
                               ? grid_oracle_minimize(J, box, params.grid_points,
                                                      params.grid_refinements)
                               : detail::minimize_profile(J, box, params.profile_points);
    double best_value = J(best);
    for (const VelocityCommand& candidate :
         {clamp_command(state.master_cmd, params.v_max, params.omega_max),
          clamp_command(state.slave_prev_cmd, params.v_max, params.omega_max)}) {
        const double value = J(candidate);
        if (value < best_value) {
            best_value = value;
            best = candidate;
        }
    }
    return best;
}

/// Gains of the proportional comparison controller.
struct BaselineGains {
    double k_pos = 0.5;    // 1/s
    double k_theta = 1.0;  // 1/s
};

/// Feed-forward of the master command plus proportional correction, then clamped.
///
///   v     = v_m - k_pos * ex
///   omega = omega_m - k_pos * ey * sgn(v_m) - k_theta * etheta
///
/// A slave ahead of its slot (ex > 0) slows down; a slave left of its slot or
/// rotated counter-clockwise steers clockwise while driving forward.
inline VelocityCommand baseline_pd_command(const ControlInputState& state,
                                           const BaselineGains& gains, const DemParams& params,
                                           const CycleTiming& /*timing*/) {
    if (!(gains.k_pos > 0.0) || !(gains.k_theta > 0.0)) {
        throw std::domain_error("baseline_pd_command: gains must be positive");
    }
    const ErrorVec& e = state.error_now;
    const double direction = state.master_cmd.v < 0.0 ? -1.0 : 1.0;
    const VelocityCommand raw{
        state.master_cmd.v - gains.k_pos * e.ex,
        state.master_cmd.omega - gains.k_pos * e.ey * direction - gains.k_theta * e.etheta};
    return clamp_command(raw, params.v_max, params.omega_max);
}

}  // namespace formsim
