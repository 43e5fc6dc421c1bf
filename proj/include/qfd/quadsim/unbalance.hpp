#pragma once

#include "qfd/quadsim/types.hpp"

namespace qfd::quadsim {

inline constexpr std::size_t kMinSteadySamples = 500;

// rho_i = mean(w_i) / mean(w_1) over the whole log; omega_ref_max is the
// largest commanded speed seen. The caller trims any transient first.
UnbalanceModel estimate_unbalance(const FlightLog& healthy_log);

// rho_i(w) * w with rho_i(w) = (w / omega_ref_max) rho_i. Rotor index is 1-based.
double adjust_speed(double omega, int rotor, const UnbalanceModel& model);

// Inverse of adjust_speed on [0, inf).
double unadjust_speed(double adjusted, int rotor, const UnbalanceModel& model);

}  // namespace qfd::quadsim
