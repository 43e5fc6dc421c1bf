#pragma once

// JSON binding for every configurable structure. Readers reject unknown keys
// and leave missing keys at their defaults; writers emit every field so a
// dump is a complete, resolved record.

#include "qfd/dataset.hpp"
#include "qfd/pipeline.hpp"

#include <json.hpp>

#include <filesystem>

namespace qfd {

struct RunConfig {
    GenerationConfig generation;
    CalibrationConfig calibration;
    quadsim::DomainConfig source;
    quadsim::DomainConfig target;
    TrainConfig train;
    std::size_t runs = 10;
    std::uint64_t seed = 1;  // data generation
    std::uint64_t experiment_seed = 1;

    static RunConfig defaults();
    void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);  // throws ConfigError
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const quadsim::QuadParams& p);
nlohmann::json to_json(const quadsim::ControllerGains& g);
nlohmann::json to_json(const quadsim::FlightPlan& p);
nlohmann::json to_json(const quadsim::DomainConfig& d);
nlohmann::json to_json(const GenerationConfig& g);
nlohmann::json to_json(const TrainConfig& t);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Machine-readable experiment summary: one record per suite x domain x run,
// aggregates per suite x domain, and per-run training diagnostics. Wall
// times are left out so identical inputs give identical bytes.
nlohmann::json to_json(const ExperimentSummary& s);
// Wall time per run, kept apart from the summary.
nlohmann::json timings_json(const ExperimentSummary& s);

// FNV-1a 64 of the compact dump of (generation config, domain config, seed).
std::uint64_t generation_hash(const GenerationConfig& g, const quadsim::DomainConfig& d, std::uint64_t seed);

}  // namespace qfd
