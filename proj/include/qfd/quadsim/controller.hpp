#pragma once

#include "qfd/quadsim/types.hpp"

namespace qfd::quadsim {

struct ControllerGains {
    Vec3 pos_p{1.5, 1.5, 3.0};
    Vec3 pos_i{0.3, 0.3, 0.6};
    Vec3 pos_d{2.2, 2.2, 3.0};
    Vec3 att_p{6.0, 6.0, 3.0};
    Vec3 rate_p{12.0, 12.0, 6.0};
    Vec3 rate_i{8.0, 8.0, 4.0};
    double max_tilt = 0.35;   // rad
    double max_accel = 3.0;   // m/s^2, horizontal
    double yaw = 0.0;         // rad

    bool operator==(const ControllerGains&) const = default;
};

// What the autopilot sees: true translational state, measured rates and
// estimated attitude.
struct Measurement {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Vec3 rate = Vec3::Zero();
    Vec3 euler = Vec3::Zero();  // roll, pitch, yaw
};

// Cascaded position -> attitude -> body-rate PID with a mixer inverted from
// the "+" frame geometry. Integrators make it stateful.
class Controller {
public:
    Controller(const QuadParams& params, const ControllerGains& gains);

    // Rotor speed commands in [0, omega_max].
    Vec4 update(const Measurement& m, const Vec3& waypoint, double dt);
    void reset();

    // Rotor speeds producing collective thrust T and body torques tau.
    Vec4 mix(double thrust, const Vec3& torque) const;

private:
    QuadParams params_;
    ControllerGains gains_;
    Vec3 pos_int_ = Vec3::Zero();
    Vec3 rate_int_ = Vec3::Zero();
};

// Single update from a fresh controller with perfect sensing.
Vec4 controller_update(const QuadState& state, const Vec3& waypoint, const QuadParams& params,
                       const ControllerGains& gains = {}, double dt = 0.01);

}  // namespace qfd::quadsim
