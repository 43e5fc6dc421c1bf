#include "qfd/quadsim/episode.hpp"

#include "qfd/error.hpp"
#include "qfd/quadsim/dynamics.hpp"
#include "qfd/quadsim/unbalance.hpp"

#include <cmath>
#include <random>

namespace qfd::quadsim {

void FlightPlan::validate() const {
    if (waypoints.empty()) throw InputDomainError("flight plan: waypoint list is empty");
    for (const auto& w : waypoints)
        if (!w.allFinite()) throw InputDomainError("flight plan: non-finite waypoint");
    if (!(hold > 0) || !(duration > 0)) throw InputDomainError("flight plan: hold and duration must be positive");
    if (!(dt > 0) || dt > 0.02) throw InputDomainError("flight plan: dt must lie in (0, 0.02]");
}

std::size_t FlightPlan::samples() const { return static_cast<std::size_t>(std::llround(duration / dt)); }

FlightLog fly_episode(const QuadParams& params, const FaultSpec& fault, const DomainConfig& domain,
                      const FlightPlan& plan, std::uint64_t seed, const ControllerGains& gains) {
    params.validate();
    fault.validate();
    domain.validate();
    plan.validate();

    std::seed_seq seq{domain.seed & 0xffffffffu, domain.seed >> 32, seed & 0xffffffffu, seed >> 32,
                      static_cast<std::uint64_t>(fault.label)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);

    const std::size_t n = plan.samples();
    FlightLog log;
    log.dt = plan.dt;
    log.label = fault.label;
    log.domain = domain.domain;
    log.gyro.reserve(n);
    log.attitude.reserve(n);
    log.omega_cmd.reserve(n);

    QuadState state;
    state.position = plan.waypoints.front();
    const Vec4 hover = Vec4::Constant(params.hover_speed()).cwiseProduct(domain.rotor_weakness);
    state.rotor = motor_command(hover, params, domain);

    Controller controller(params, gains);
    const std::size_t steps_per_leg = std::max<std::size_t>(1, std::llround(plan.hold / plan.dt));
    Vec3 waypoint = plan.waypoints.front();

    for (std::size_t k = 0; k < n; ++k) {
        if (k % steps_per_leg == 0) {
            waypoint = plan.waypoints[(k / steps_per_leg) % plan.waypoints.size()];
            if (domain.waypoint_jitter > 0)
                for (int a = 0; a < 3; ++a) waypoint[a] += domain.waypoint_jitter * jitter(rng);
        }

        Vec3 gyro = state.rate + domain.gyro_bias;
        if (domain.gyro_noise_std > 0)
            for (int a = 0; a < 3; ++a) gyro[a] += domain.gyro_noise_std * noise(rng);
        Vec3 euler = euler_angles(state.attitude);
        euler.x() += domain.attitude_bias.x();
        euler.y() += domain.attitude_bias.y();

        const Vec4 cmd = controller.update({state.position, state.velocity, gyro, euler}, waypoint, plan.dt);
        const Vec4 logged = motor_command(cmd, params, domain);

        log.gyro.push_back({gyro.x(), gyro.y(), gyro.z()});
        log.attitude.push_back({euler.x(), euler.y()});
        log.omega_cmd.push_back({logged[0], logged[1], logged[2], logged[3]});

        state = step(state, cmd, plan.dt, params, fault, domain);
        if (!state.rate.allFinite() || state.rate.cwiseAbs().maxCoeff() > kDivergenceRate)
            throw EpisodeDivergedError("episode diverged at step " + std::to_string(k) + " (label " +
                                           std::to_string(fault.label) + ", seed " + std::to_string(seed) + ")",
                                       static_cast<long>(k));
    }
    return log;
}

}  // namespace qfd::quadsim
