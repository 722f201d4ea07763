#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "formsim/geometry.hpp"

namespace formsim {

/// Desired relative pose of every slave, expressed in the master's body frame.
/// Index 0 is slave 1.
struct FormationSpec {
    std::vector<Pose> desired;

    std::size_t slave_count() const { return desired.size(); }
};

/// Formation error of one slave in the master frame.
struct ErrorVec {
    double ex = 0.0;      // m
    double ey = 0.0;      // m
    double etheta = 0.0;  // rad, wrapped

    double position_norm() const { return std::hypot(ex, ey); }
    double angle_deg() const { return etheta * 180.0 / std::numbers::pi; }
};

/// Diagonal weight on (ex, ey, etheta).
struct WeightMatrix {
    std::array<double, 3> w{1.0, 1.0, 1.0};

    static WeightMatrix identity() { return {}; }

    void validate() const {
        bool any_positive = false;
        for (double wi : w) {
            if (!(wi >= 0.0) || !std::isfinite(wi)) {
                throw std::domain_error("WeightMatrix: entries must be finite and non-negative");
            }
            any_positive = any_positive || wi > 0.0;
        }
        if (!any_positive) {
            throw std::domain_error("WeightMatrix: at least one entry must be positive");
        }
    }
};

/// Square formation with the master at one corner.
///
/// Convention: master forward is +x and master left is +y. Slave 1 sits `side`
/// ahead, slave 2 `side` to the left, slave 3 on the diagonal. All desired
/// relative headings are zero.
inline FormationSpec square_formation(double side) {
    if (!(side > 0.0) || !std::isfinite(side)) {
        throw std::domain_error("square_formation: side must be positive");
    }
    return FormationSpec{{Pose{side, 0.0, 0.0}, Pose{0.0, side, 0.0}, Pose{side, side, 0.0}}};
}

inline ErrorVec formation_error(const Pose& master, const Pose& slave, const Pose& desired) {
    const Pose r = relative_pose(master, slave);
    return {r.x - desired.x, r.y - desired.y, wrap_angle(r.theta - desired.theta)};
}

/// Squared weighted norm w1 ex^2 + w2 ey^2 + w3 etheta^2.
inline double weighted_error_norm(const ErrorVec& e, const WeightMatrix& W) {
    return W.w[0] * e.ex * e.ex + W.w[1] * e.ey * e.ey + W.w[2] * e.etheta * e.etheta;
}

/// Relative pose a slave has when its formation error is `e`.
inline Pose perturbed_relative_pose(const Pose& desired, const ErrorVec& e) {
    return {desired.x + e.ex, desired.y + e.ey, desired.theta + e.etheta};
}

}  // namespace formsim
