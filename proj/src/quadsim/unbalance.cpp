#include "qfd/quadsim/unbalance.hpp"

#include "qfd/error.hpp"

#include <algorithm>
#include <cmath>

namespace qfd::quadsim {

UnbalanceModel estimate_unbalance(const FlightLog& log) {
    log.validate();
    if (log.size() < kMinSteadySamples)
        throw DegenerateLogError("estimate_unbalance: need at least " + std::to_string(kMinSteadySamples) +
                                 " steady-state samples, got " + std::to_string(log.size()));
    std::array<double, 4> sum{};
    double peak = 0.0;
    for (const auto& w : log.omega_cmd)
        for (int i = 0; i < kRotors; ++i) {
            sum[i] += w[i];
            peak = std::max(peak, w[i]);
        }
    if (!(sum[0] > 0.0)) throw DegenerateLogError("estimate_unbalance: mean speed of motor 1 is zero");
    UnbalanceModel m;
    m.rho[0] = 1.0;
    for (int i = 1; i < kRotors; ++i) m.rho[i] = sum[i] / sum[0];
    m.omega_ref_max = peak;
    return m;
}

double adjust_speed(double omega, int rotor, const UnbalanceModel& model) {
    if (!(model.omega_ref_max > 0.0)) throw InputDomainError("adjust_speed: omega_ref_max must be positive");
    if (rotor < 1 || rotor > kRotors) throw InputDomainError("adjust_speed: rotor index must be 1..4");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw InputDomainError("adjust_speed: omega must be >= 0");
    const double ratio = omega / model.omega_ref_max * model.rho[rotor - 1];
    return ratio * omega;
}

double unadjust_speed(double adjusted, int rotor, const UnbalanceModel& model) {
    if (!(model.omega_ref_max > 0.0)) throw InputDomainError("unadjust_speed: omega_ref_max must be positive");
    if (rotor < 1 || rotor > kRotors) throw InputDomainError("unadjust_speed: rotor index must be 1..4");
    return std::sqrt(std::max(adjusted, 0.0) * model.omega_ref_max / model.rho[rotor - 1]);
}

}  // namespace qfd::quadsim
