#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace formsim {

/// Map an angle onto the half-open interval (-pi, pi].
inline double wrap_angle(double theta) {
    if (!std::isfinite(theta)) {
        throw std::domain_error("wrap_angle: non-finite angle");
    }
    constexpr double pi = std::numbers::pi;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (theta > -pi && theta <= pi) {
        return theta;
    }
    double r = std::fmod(theta + pi, two_pi);
    if (r <= 0.0) {
        r += two_pi;
    }
    // r in (0, 2pi]
    return r - pi;
}

/// Planar rigid-body pose. Heading is kept in (-pi, pi].
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    constexpr Pose() = default;
    Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    static Pose identity() { return {}; }

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Pose `b`, given in the frame of `a`, expressed in `a`'s parent frame.
inline Pose compose(const Pose& a, const Pose& b) {
    const double c = std::cos(a.theta);
    const double s = std::sin(a.theta);
    return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.theta + b.theta};
}

/// Pose of `target` expressed in the body frame of `ref`.
inline Pose relative_pose(const Pose& ref, const Pose& target) {
    const double c = std::cos(ref.theta);
    const double s = std::sin(ref.theta);
    const double dx = target.x - ref.x;
    const double dy = target.y - ref.y;
    return {c * dx + s * dy, -s * dx + c * dy, target.theta - ref.theta};
}

}  // namespace formsim
