#include "qfd/workflow.hpp"

#include "qfd/error.hpp"
#include "qfd/quadsim/unbalance.hpp"
#include "qfd/seed.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace qfd {

std::uint64_t stream_seed(const RunConfig& c, SeedStream s) {
    return derive_seed(c.seed, {static_cast<std::uint64_t>(s)});
}

quadsim::FlightLog calibration_log(const RunConfig& c) {
    const auto& g = c.generation;
    const auto log = quadsim::fly_episode(g.quad, quadsim::FaultSpec::for_label(1), c.target, c.calibration.plan,
                                          stream_seed(c, SeedStream::Calibration), g.gains);
    const auto skip = static_cast<std::size_t>(std::llround(c.calibration.trim / c.calibration.plan.dt));
    if (skip >= log.size()) throw ConfigError("calibration: trim removes the whole flight");
    return log.slice(skip, log.size());
}

std::vector<Dataset> generate_domain(const RunConfig& c, quadsim::Domain domain,
                                     const std::optional<quadsim::UnbalanceModel>& unbalance,
                                     std::span<const Variant> variants, unsigned jobs) {
    if (domain == quadsim::Domain::Target)
        return generate_variants(c.generation, c.target, stream_seed(c, SeedStream::Target), variants, jobs);
    auto source = c.source;
    if (unbalance) source = adjusted_source(source, *unbalance);
    return generate_variants(c.generation, source, stream_seed(c, SeedStream::Source), variants, jobs);
}

PreparedData prepare_experiment_data(const RunConfig& c, unsigned jobs) {
    PreparedData p;
    p.unbalance = quadsim::estimate_unbalance(calibration_log(c));
    spdlog::info("calibration: rho = [{:.4f}, {:.4f}, {:.4f}, {:.4f}], omega_ref_max = {:.1f}", p.unbalance.rho[0],
                 p.unbalance.rho[1], p.unbalance.rho[2], p.unbalance.rho[3], p.unbalance.omega_ref_max);
    const Variant both[] = {Variant::NIF, Variant::CF};
    auto s = generate_domain(c, quadsim::Domain::Source, p.unbalance, both, jobs);
    auto t = generate_domain(c, quadsim::Domain::Target, std::nullopt, both, jobs);
    p.data = {std::move(s[0]), std::move(t[0]), std::move(s[1]), std::move(t[1])};
    return p;
}

}  // namespace qfd
