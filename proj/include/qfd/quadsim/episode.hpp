#pragma once

#include "qfd/quadsim/controller.hpp"
#include "qfd/quadsim/types.hpp"

namespace qfd::quadsim {

inline constexpr double kDivergenceRate = 50.0;  // rad/s

struct FlightPlan {
    std::vector<Vec3> waypoints{Vec3(0, 0, 2)};
    double hold = 10.0;       // s spent on each waypoint before moving on
    double duration = 120.0;  // s
    double dt = 0.01;

    void validate() const;
    std::size_t samples() const;
};

// Closed-loop flight through the plan's waypoints (cycled). The vehicle starts
// at rest on the first waypoint with rotors at the speed hover needs.
FlightLog fly_episode(const QuadParams& params, const FaultSpec& fault, const DomainConfig& domain,
                      const FlightPlan& plan, std::uint64_t seed, const ControllerGains& gains = {});

}  // namespace qfd::quadsim
