#pragma once

#include "qfd/quadsim/types.hpp"

namespace qfd::quadsim {

struct RotorForces {
    Vec4 thrust;  // N
    Vec4 torque;  // N m
};

// F_i = eta_F,i k_F w_i^2, tau_i = eta_tau,i k_tau w_i^2.
RotorForces rotor_forces(const Vec4& omega, const QuadParams& params, const FaultSpec& fault);

// Body angular acceleration I^-1([L(F3-F4), L(F2-F1), t1-t3+t2-t4] + extra - w x Iw).
Vec3 angular_dynamics(const Vec3& rate, const Vec4& thrust, const Vec4& torque, const QuadParams& params,
                      const Vec3& extra_torque = Vec3::Zero());

// Speed the motors are driven toward for controller output `cmd`: the
// unbalance adjustment when the domain carries one, otherwise cmd itself,
// clipped to [0, omega_max].
Vec4 motor_command(const Vec4& cmd, const QuadParams& params, const DomainConfig& domain);

// Speeds that determine thrust/torque for physical rotor speeds `rotor`.
Vec4 effective_speed(const Vec4& rotor, const DomainConfig& domain);

// Torque from the centre-of-gravity offset, in the body frame.
Vec3 cog_torque(const QuadState& state, const QuadParams& params, const DomainConfig& domain);

// One RK4 step of the full rigid-body + motor model under a held command.
QuadState step(const QuadState& state, const Vec4& cmd, double dt, const QuadParams& params, const FaultSpec& fault,
               const DomainConfig& domain);

// Roll, pitch, yaw (ZYX) of a body-to-world quaternion.
Vec3 euler_angles(const Eigen::Quaterniond& q);

}  // namespace qfd::quadsim
