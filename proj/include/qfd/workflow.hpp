#pragma once

// End-to-end data preparation shared by the command line and the acceptance
// run: calibrate on a healthy target flight, then cut both variants from
// both domains.

#include "qfd/config.hpp"

namespace qfd {

enum class SeedStream : std::uint64_t { Source = 1, Target = 2, Calibration = 3 };

std::uint64_t stream_seed(const RunConfig& c, SeedStream s);

// The healthy target flight used for calibration; the first `trim` seconds
// are already removed.
quadsim::FlightLog calibration_log(const RunConfig& c);

// Datasets of one domain for the requested variants. The source domain is
// generated with `unbalance` installed.
std::vector<Dataset> generate_domain(const RunConfig& c, quadsim::Domain domain,
                                     const std::optional<quadsim::UnbalanceModel>& unbalance,
                                     std::span<const Variant> variants, unsigned jobs);

struct PreparedData {
    ExperimentData data;
    quadsim::UnbalanceModel unbalance;
};

PreparedData prepare_experiment_data(const RunConfig& c, unsigned jobs);

}  // namespace qfd
