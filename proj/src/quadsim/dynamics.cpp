#include "qfd/quadsim/dynamics.hpp"

#include "qfd/error.hpp"
#include "qfd/quadsim/unbalance.hpp"

#include <algorithm>
#include <cmath>

namespace qfd::quadsim {

namespace {

Vec3 cog_torque_at(const Eigen::Quaterniond& q, const QuadParams& params, const DomainConfig& domain) {
    const Vec3 cog(domain.cog_offset.x(), domain.cog_offset.y(), 0.0);
    return cog.cross(q.conjugate() * Vec3(0, 0, params.mass * kGravity));
}

// q(4: w x y z), rate(3), position(3), velocity(3), rotor(4)
using StateVec = Eigen::Matrix<double, 17, 1>;

StateVec pack(const QuadState& s) {
    StateVec x;
    x << s.attitude.w(), s.attitude.x(), s.attitude.y(), s.attitude.z(), s.rate, s.position, s.velocity, s.rotor;
    return x;
}

QuadState unpack(const StateVec& x, double time) {
    QuadState s;
    s.attitude = Eigen::Quaterniond(x[0], x[1], x[2], x[3]);
    s.rate = x.segment<3>(4);
    s.position = x.segment<3>(7);
    s.velocity = x.segment<3>(10);
    s.rotor = x.segment<4>(13);
    s.time = time;
    return s;
}

struct Model {
    const QuadParams& params;
    const FaultSpec& fault;
    const DomainConfig& domain;
    Vec4 target;  // motor command

    StateVec derivative(const StateVec& x) const {
        // Intermediate RK stages see an un-normalized quaternion; rotate with
        // its normalized copy.
        const Eigen::Quaterniond q(x[0], x[1], x[2], x[3]);
        const Eigen::Quaterniond qn = q.normalized();
        const Vec3 w = x.segment<3>(4);
        const Vec3 v = x.segment<3>(10);
        const Vec4 rotor = x.segment<4>(13);

        const RotorForces f = rotor_forces(effective_speed(rotor.cwiseMax(0.0), domain), params, fault);
        const Vec3 wdot = angular_dynamics(w, f.thrust, f.torque, params, cog_torque_at(qn, params, domain));

        const Eigen::Quaterniond qdot = q * Eigen::Quaterniond(0.0, w.x(), w.y(), w.z());
        const Vec3 accel = qn * Vec3(0, 0, f.thrust.sum() / params.mass) - Vec3(0, 0, kGravity);

        Vec4 rotor_dot = Vec4::Zero();
        if (!domain.perfect_motor)
            rotor_dot = (params.k_m * domain.motor_gain_scale.array() * (target - rotor).array()).matrix();

        StateVec d;
        d << 0.5 * qdot.w(), 0.5 * qdot.x(), 0.5 * qdot.y(), 0.5 * qdot.z(), wdot, v, accel, rotor_dot;
        return d;
    }
};

}  // namespace

RotorForces rotor_forces(const Vec4& omega, const QuadParams& params, const FaultSpec& fault) {
    if (!omega.allFinite() || (omega.array() < 0).any())
        throw InputDomainError("rotor_forces: rotor speeds must be finite and non-negative");
    const Vec4 w2 = omega.cwiseProduct(omega);
    return {params.k_f * fault.thrust_factors().cwiseProduct(w2), params.k_tau * fault.torque_factors().cwiseProduct(w2)};
}

Vec3 angular_dynamics(const Vec3& rate, const Vec4& thrust, const Vec4& torque, const QuadParams& params,
                      const Vec3& extra_torque) {
    const double L = params.arm_length;
    const Vec3 tau(L * (thrust[2] - thrust[3]), L * (thrust[1] - thrust[0]),
                   torque[0] - torque[2] + torque[1] - torque[3]);
    const Vec3& I = params.inertia_diag;
    const Vec3 gyro = rate.cross(I.cwiseProduct(rate));
    return (tau + extra_torque - gyro).cwiseQuotient(I);
}

Vec4 motor_command(const Vec4& cmd, const QuadParams& params, const DomainConfig& domain) {
    Vec4 out = cmd.cwiseMax(0.0).cwiseMin(params.omega_max);
    if (domain.unbalance)
        for (int i = 0; i < kRotors; ++i) out[i] = adjust_speed(out[i], i + 1, *domain.unbalance);
    return out.cwiseMin(params.omega_max);
}

Vec4 effective_speed(const Vec4& rotor, const DomainConfig& domain) {
    Vec4 e = rotor;
    if (domain.unbalance)
        for (int i = 0; i < kRotors; ++i) e[i] = unadjust_speed(rotor[i], i + 1, *domain.unbalance);
    return e.cwiseQuotient(domain.rotor_weakness);
}

Vec3 cog_torque(const QuadState& state, const QuadParams& params, const DomainConfig& domain) {
    return cog_torque_at(state.attitude, params, domain);
}

QuadState step(const QuadState& state, const Vec4& cmd, double dt, const QuadParams& params, const FaultSpec& fault,
               const DomainConfig& domain) {
    if (!(dt > 0.0) || dt > 0.02) throw InputDomainError("step: dt must lie in (0, 0.02], got " + std::to_string(dt));
    if (!cmd.allFinite()) throw InputDomainError("step: non-finite rotor command");
    state.validate(params);

    Model model{params, fault, domain, motor_command(cmd, params, domain)};
    QuadState start = state;
    if (domain.perfect_motor) start.rotor = model.target;

    const StateVec x = pack(start);
    const StateVec k1 = model.derivative(x);
    const StateVec k2 = model.derivative(x + 0.5 * dt * k1);
    const StateVec k3 = model.derivative(x + 0.5 * dt * k2);
    const StateVec k4 = model.derivative(x + dt * k3);
    const StateVec next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    QuadState out = unpack(next, state.time + dt);
    out.attitude.normalize();
    out.rotor = out.rotor.cwiseMax(0.0).cwiseMin(params.omega_max);
    return out;
}

Vec3 euler_angles(const Eigen::Quaterniond& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
    const double pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
    const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
    return {roll, pitch, yaw};
}

}  // namespace qfd::quadsim
