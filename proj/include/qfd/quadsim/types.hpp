#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qfd::quadsim {

inline constexpr double kGravity = 9.81;
inline constexpr int kRotors = 4;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

// Rotor layout is a "+" frame: rotor 1 on +x, rotor 2 on -x, rotor 3 on +y,
// rotor 4 on -y. Rotors 1 and 2 spin one way, 3 and 4 the other.
struct QuadParams {
    Vec3 inertia_diag{0.01, 0.01, 0.02};  // kg m^2
    double arm_length = 0.2;              // m
    double k_f = 1e-5;                    // N s^2/rad^2
    double k_tau = 1.6e-7;                // N m s^2/rad^2
    double mass = 1.0;                    // kg
    double k_m = 20.0;                    // 1/s
    double omega_max = 1000.0;            // rad/s

    void validate() const;
    double hover_speed() const;
};

struct QuadState {
    Eigen::Quaterniond attitude = Eigen::Quaterniond::Identity();
    Vec3 rate = Vec3::Zero();      // p, q, r in body frame
    Vec3 position = Vec3::Zero();  // world, z up
    Vec3 velocity = Vec3::Zero();
    Vec4 rotor = Vec4::Zero();  // rad/s
    double time = 0.0;

    void validate(const QuadParams& params) const;
};

// label 1 is all-healthy; label k+1 means rotor k is degraded.
struct FaultSpec {
    int label = 1;
    std::optional<int> faulty_rotor;  // 1..4
    double thrust_eff = 1.0;
    double torque_eff = 1.0;

    static FaultSpec for_label(int label, double eta_f = 0.85, double eta_tau = 0.85);
    void validate() const;
    Vec4 thrust_factors() const;
    Vec4 torque_factors() const;
};

struct UnbalanceModel {
    Vec4 rho = Vec4::Ones();
    double omega_ref_max = 0.0;

    void validate() const;
};

enum class Domain : std::uint8_t { Source = 0, Target = 1 };
std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

struct DomainConfig {
    Domain domain = Domain::Source;
    double gyro_noise_std = 0.0;       // rad/s
    Vec3 gyro_bias = Vec3::Zero();      // rad/s, added to every gyro reading
    Eigen::Vector2d attitude_bias = Eigen::Vector2d::Zero();  // rad, roll/pitch estimate offset
    Eigen::Vector2d cog_offset = Eigen::Vector2d::Zero();     // m
    Vec4 motor_gain_scale = Vec4::Ones();
    // Multiplier on the speed a rotor needs for a given thrust and torque.
    // The pseudo-real airframe's counterpart of the unbalance ratio.
    Vec4 rotor_weakness = Vec4::Ones();
    bool perfect_motor = false;
    double waypoint_jitter = 0.0;  // m, uniform per axis
    std::optional<UnbalanceModel> unbalance;
    std::uint64_t seed = 0;

    void validate() const;
};

// One sample per control step. Entry k holds the sensor readings at t_k and
// the motor command applied over [t_k, t_k + dt].
struct FlightLog {
    double dt = 0.01;
    std::vector<std::array<double, 3>> gyro;
    std::vector<std::array<double, 2>> attitude;  // estimated roll, pitch
    std::vector<std::array<double, 4>> omega_cmd;
    int label = 1;
    Domain domain = Domain::Source;

    std::size_t size() const noexcept { return gyro.size(); }
    void validate() const;
    // Samples [begin, end) as a new log.
    FlightLog slice(std::size_t begin, std::size_t end) const;
};

}  // namespace qfd::quadsim
