#pragma once

#include "qfd/features.hpp"
#include "qfd/quadsim/controller.hpp"
#include "qfd/quadsim/episode.hpp"
#include "qfd/quadsim/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace qfd {

inline constexpr int kClasses = 5;
using ClassCounts = std::array<std::size_t, kClasses>;

// Windows of one variant and one domain, stored raw as [window][channel][time].
struct Dataset {
    Variant variant = Variant::NIF;
    quadsim::Domain domain = quadsim::Domain::Source;
    std::size_t window_len = 80;
    std::size_t channels = 7;
    std::vector<float> data;
    std::vector<std::uint8_t> labels;  // 1..5
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t window_size() const noexcept { return channels * window_len; }
    std::span<const float> window(std::size_t i) const;
    ClassCounts class_counts() const;
    void append(const Window& w);
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

// How the pseudo-flights that feed a dataset are produced.
struct GenerationConfig {
    quadsim::QuadParams quad;
    quadsim::ControllerGains gains;
    quadsim::FlightPlan plan;  // one episode; repeated with fresh seeds until enough windows
    double eta_f = 0.85;
    double eta_tau = 0.85;
    FeatureConfig features;
    std::size_t per_class = 800;

    void validate() const;
};

// Healthy target flight used to estimate the unbalance ratios.
struct CalibrationConfig {
    quadsim::FlightPlan plan{{quadsim::Vec3(0, 0, 2)}, 60.0, 60.0, 0.01};
    double trim = 10.0;  // s of transient dropped before averaging
};

// Flies episodes per label with seeds derived from (seed, label, episode) until
// per_class windows exist, then truncates. Labels run on up to `jobs` threads;
// the result does not depend on `jobs`.
Dataset generate(const GenerationConfig& cfg, const quadsim::DomainConfig& domain, std::uint64_t seed,
                 unsigned jobs = 1);

// Several variants cut from the same flights, in the order requested.
std::vector<Dataset> generate_variants(const GenerationConfig& cfg, const quadsim::DomainConfig& domain,
                                       std::uint64_t seed, std::span<const Variant> variants, unsigned jobs = 1);

// Source domain config with the estimated unbalance installed.
quadsim::DomainConfig adjusted_source(quadsim::DomainConfig source, const quadsim::UnbalanceModel& model);

Dataset healthy_subset(const Dataset& d);
Dataset subset(const Dataset& d, std::span<const std::size_t> indices);

void save_dataset(const Dataset& d, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

void save_flight_log(const quadsim::FlightLog& log, const std::filesystem::path& dir);
quadsim::FlightLog load_flight_log(const std::filesystem::path& dir);

// Seeded epoch partitions of [0, n) into batches of `batch` (last one short).
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::size_t batch);
    std::size_t batches() const noexcept { return (n_ + batch_ - 1) / batch_; }
    std::vector<std::vector<std::size_t>> epoch(std::uint64_t shuffle_seed) const;

private:
    std::size_t n_, batch_;
};

// Copies the selected windows into `data` ([B][C][T]) and 0-based classes.
void gather(const Dataset& d, std::span<const std::size_t> indices, std::vector<float>& data,
            std::vector<int>& classes);

}  // namespace qfd
