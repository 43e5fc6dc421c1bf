#include "qfd/quadsim/controller.hpp"

#include "qfd/quadsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qfd::quadsim {

namespace {

constexpr double kPosIntLimit = 2.0;
constexpr double kRateIntLimit = 2.0;

double wrap_angle(double a) {
    while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
    return a;
}

}  // namespace

Controller::Controller(const QuadParams& params, const ControllerGains& gains) : params_(params), gains_(gains) {
    params_.validate();
}

void Controller::reset() {
    pos_int_.setZero();
    rate_int_.setZero();
}

Vec4 Controller::mix(double thrust, const Vec3& torque) const {
    const double L = params_.arm_length;
    const double c = params_.k_tau / params_.k_f;
    const double front_back = 0.5 * (thrust + torque.z() / c);  // F1 + F2
    const double left_right = 0.5 * (thrust - torque.z() / c);  // F3 + F4
    const Vec4 force(0.5 * (front_back - torque.y() / L), 0.5 * (front_back + torque.y() / L),
                     0.5 * (left_right + torque.x() / L), 0.5 * (left_right - torque.x() / L));
    Vec4 omega;
    for (int i = 0; i < kRotors; ++i) omega[i] = std::sqrt(std::max(force[i], 0.0) / params_.k_f);
    return omega.cwiseMin(params_.omega_max);
}

Vec4 Controller::update(const Measurement& m, const Vec3& waypoint, double dt) {
    const Vec3 err = waypoint - m.position;
    pos_int_ = (pos_int_ + err * dt).cwiseMax(-kPosIntLimit).cwiseMin(kPosIntLimit);
    Vec3 acc = gains_.pos_p.cwiseProduct(err) + gains_.pos_i.cwiseProduct(pos_int_) - gains_.pos_d.cwiseProduct(m.velocity);
    const double horiz = std::hypot(acc.x(), acc.y());
    if (horiz > gains_.max_accel) acc.head<2>() *= gains_.max_accel / horiz;

    const double yaw = m.euler.z();
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double roll_des =
        std::clamp((acc.x() * sy - acc.y() * cy) / kGravity, -gains_.max_tilt, gains_.max_tilt);
    const double pitch_des =
        std::clamp((acc.x() * cy + acc.y() * sy) / kGravity, -gains_.max_tilt, gains_.max_tilt);
    const double tilt = std::cos(m.euler.x()) * std::cos(m.euler.y());
    const double thrust = params_.mass * (kGravity + acc.z()) / std::max(tilt, 0.5);

    const Vec3 att_err(roll_des - m.euler.x(), pitch_des - m.euler.y(), wrap_angle(gains_.yaw - yaw));
    const Vec3 rate_des = gains_.att_p.cwiseProduct(att_err);
    const Vec3 rate_err = rate_des - m.rate;
    rate_int_ = (rate_int_ + rate_err * dt).cwiseMax(-kRateIntLimit).cwiseMin(kRateIntLimit);
    const Vec3 alpha = gains_.rate_p.cwiseProduct(rate_err) + gains_.rate_i.cwiseProduct(rate_int_);
    const Vec3 torque = params_.inertia_diag.cwiseProduct(alpha);
    return mix(thrust, torque);
}

Vec4 controller_update(const QuadState& state, const Vec3& waypoint, const QuadParams& params,
                       const ControllerGains& gains, double dt) {
    Controller c(params, gains);
    Measurement m{state.position, state.velocity, state.rate, euler_angles(state.attitude)};
    return c.update(m, waypoint, dt);
}

}  // namespace qfd::quadsim
