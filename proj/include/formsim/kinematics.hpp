#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "formsim/geometry.hpp"
#include "formsim/rng.hpp"

namespace formsim {

/// Linear and angular target velocity of a unicycle robot.
struct VelocityCommand {
    double v = 0.0;      // m/s
    double omega = 0.0;  // rad/s

    friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

/// Actuation noise on executed commands, calibrated by the noise power coefficient.
struct NoiseModel {
    double rho = 0.0;
    bool enabled = false;
    double v_floor = 0.01;      // m/s
    double omega_floor = 0.01;  // rad/s
};

/// Below this |omega * duration| the arc is evaluated by its Taylor expansion.
inline constexpr double kStraightLineThreshold = 1e-8;

/// Body-frame displacement of a constant-twist arc: (dx, dy) per unit linear velocity.
/// dx = sin(w t) / w, dy = (1 - cos(w t)) / w = 2 sin^2(w t / 2) / w.
inline void arc_factors(double omega, double duration, double& fx, double& fy) {
    const double phi = omega * duration;
    if (std::abs(phi) < kStraightLineThreshold) {
        fx = duration * (1.0 - phi * phi / 6.0);
        fy = duration * phi / 2.0;
    } else {
        fx = std::sin(phi) / omega;
        const double half = std::sin(0.5 * phi);
        fy = 2.0 * half * half / omega;
    }
}

/// Exact constant-twist integration of the unicycle model over `duration` seconds.
inline Pose unicycle_step(const Pose& start, const VelocityCommand& cmd, double duration) {
    if (!(duration > 0.0)) {
        throw std::domain_error("unicycle_step: duration must be positive");
    }
    double fx = 0.0;
    double fy = 0.0;
    arc_factors(cmd.omega, duration, fx, fy);
    const double c = std::cos(start.theta);
    const double s = std::sin(start.theta);
    const double bx = cmd.v * fx;
    const double by = cmd.v * fy;
    return {start.x + c * bx - s * by, start.y + s * bx + c * by, start.theta + cmd.omega * duration};
}

/// Perturb a command with zero-mean Gaussian noise of variance rho * max(|u|, floor) per channel.
inline VelocityCommand apply_actuation_noise(const VelocityCommand& cmd, const NoiseModel& model,
                                             RandomStream& rng) {
    if (model.rho < 0.0) {
        throw std::domain_error("apply_actuation_noise: rho must be non-negative");
    }
    if (!model.enabled || model.rho == 0.0) {
        return cmd;
    }
    const double sd_v = std::sqrt(model.rho * std::max(std::abs(cmd.v), model.v_floor));
    const double sd_w = std::sqrt(model.rho * std::max(std::abs(cmd.omega), model.omega_floor));
    VelocityCommand out;
    out.v = rng.normal(cmd.v, sd_v);
    out.omega = rng.normal(cmd.omega, sd_w);
    return out;
}

}  // namespace formsim
