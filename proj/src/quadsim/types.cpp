#include "qfd/quadsim/types.hpp"

#include "qfd/error.hpp"

#include <cmath>

namespace qfd::quadsim {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InputDomainError(msg);
}

bool finite(const auto& v) { return v.allFinite(); }

}  // namespace

void QuadParams::validate() const {
    require(finite(inertia_diag) && (inertia_diag.array() > 0).all(), "quad params: inertia must be positive");
    require(arm_length > 0 && k_f > 0 && k_tau > 0 && mass > 0 && k_m > 0 && omega_max > 0,
            "quad params: arm length, k_F, k_tau, mass, k_m and omega_max must be positive");
}

double QuadParams::hover_speed() const { return std::sqrt(mass * kGravity / (4.0 * k_f)); }

void QuadState::validate(const QuadParams& params) const {
    require(std::abs(attitude.norm() - 1.0) < 1e-6, "state: attitude quaternion is not unit");
    require(finite(rate) && finite(position) && finite(velocity) && finite(rotor) && std::isfinite(time),
            "state: non-finite component");
    require((rotor.array() >= 0).all() && (rotor.array() <= params.omega_max * (1 + 1e-12)).all(),
            "state: rotor speed outside [0, omega_max]");
}

FaultSpec FaultSpec::for_label(int label, double eta_f, double eta_tau) {
    FaultSpec f;
    f.label = label;
    if (label > 1) {
        f.faulty_rotor = label - 1;
        f.thrust_eff = eta_f;
        f.torque_eff = eta_tau;
    }
    f.validate();
    return f;
}

void FaultSpec::validate() const {
    require(label >= 1 && label <= 5, "fault: label must be in 1..5, got " + std::to_string(label));
    if (label == 1) {
        require(!faulty_rotor, "fault: label 1 cannot name a faulty rotor");
        require(thrust_eff == 1.0 && torque_eff == 1.0, "fault: healthy vehicle must have unit efficiencies");
    } else {
        require(faulty_rotor && *faulty_rotor == label - 1,
                "fault: label " + std::to_string(label) + " requires faulty rotor " + std::to_string(label - 1));
    }
    require(thrust_eff > 0 && thrust_eff <= 1 && torque_eff > 0 && torque_eff <= 1,
            "fault: efficiencies must lie in (0, 1]");
}

Vec4 FaultSpec::thrust_factors() const {
    Vec4 f = Vec4::Ones();
    if (faulty_rotor) f[*faulty_rotor - 1] = thrust_eff;
    return f;
}

Vec4 FaultSpec::torque_factors() const {
    Vec4 f = Vec4::Ones();
    if (faulty_rotor) f[*faulty_rotor - 1] = torque_eff;
    return f;
}

void UnbalanceModel::validate() const {
    require(rho[0] == 1.0, "unbalance: rho_1 must be exactly 1");
    require(finite(rho) && (rho.array() > 0).all(), "unbalance: ratios must be positive");
    require(std::isfinite(omega_ref_max) && omega_ref_max > 0, "unbalance: omega_ref_max must be positive");
}

std::string to_string(Domain d) { return d == Domain::Source ? "source" : "target"; }

Domain domain_from_string(const std::string& s) {
    if (s == "source") return Domain::Source;
    if (s == "target") return Domain::Target;
    throw InputDomainError("unknown domain '" + s + "' (expected source or target)");
}

void DomainConfig::validate() const {
    require(std::isfinite(gyro_noise_std) && gyro_noise_std >= 0, "domain: gyro noise std must be >= 0");
    require(finite(gyro_bias) && finite(attitude_bias) && finite(cog_offset), "domain: non-finite bias or offset");
    require(finite(motor_gain_scale) && (motor_gain_scale.array() > 0).all(), "domain: motor gain scale must be positive");
    require(finite(rotor_weakness) && (rotor_weakness.array() > 0).all(), "domain: rotor weakness must be positive");
    require(std::isfinite(waypoint_jitter) && waypoint_jitter >= 0, "domain: waypoint jitter must be >= 0");
    if (unbalance) unbalance->validate();
}

void FlightLog::validate() const {
    require(dt > 0 && std::isfinite(dt), "flight log: dt must be positive");
    require(attitude.size() == gyro.size() && omega_cmd.size() == gyro.size(),
            "flight log: gyro, attitude and command series differ in length");
    require(label >= 1 && label <= 5, "flight log: label must be in 1..5");
}

FlightLog FlightLog::slice(std::size_t begin, std::size_t end) const {
    require(begin <= end && end <= size(), "flight log: slice out of range");
    FlightLog out;
    out.dt = dt;
    out.label = label;
    out.domain = domain;
    out.gyro.assign(gyro.begin() + begin, gyro.begin() + end);
    out.attitude.assign(attitude.begin() + begin, attitude.begin() + end);
    out.omega_cmd.assign(omega_cmd.begin() + begin, omega_cmd.begin() + end);
    return out;
}

}  // namespace qfd::quadsim
