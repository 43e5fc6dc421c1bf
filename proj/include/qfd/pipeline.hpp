#pragma once

#include "qfd/dataset.hpp"
#include "qfd/features.hpp"
#include "qfd/nn/adam.hpp"
#include "qfd/nn/model.hpp"

#include <array>
#include <functional>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qfd {

enum class MmdKernel : std::uint8_t { Linear = 0, Rbf = 1 };

struct TrainConfig {
    std::size_t batch_size = 128;
    double lr = 5e-4;
    std::size_t max_epochs = 50;
    std::size_t patience = 10;
    double min_improvement = 1e-6;
    double dropout = 0.1;
    double lambda_mmd = 1e4;
    bool da_enabled = false;
    std::size_t mmd_batch = 64;
    MmdKernel mmd_kernel = MmdKernel::Linear;
    double rbf_bandwidth = 1.0;
    std::size_t filters = 64;
    std::size_t hidden = 128;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

using Confusion = std::array<std::array<std::size_t, kClasses>, kClasses>;  // [true][predicted]

struct Evaluation {
    double accuracy = 0.0;
    Confusion confusion{};
    std::size_t total = 0;
};

struct EpochStats {
    double ce = 0.0;
    double mmd = 0.0;    // unweighted
    double total = 0.0;  // ce + lambda * mmd
    // Distance between mean dense1 features of source-healthy and
    // target-healthy windows after the epoch (NaN without target data).
    double healthy_distance = 0.0;
};

struct RunReport {
    std::vector<EpochStats> epochs;
    double initial_healthy_distance = 0.0;  // before the first update
    std::size_t best_epoch = 0;             // 1-based
    bool stopped_early = false;
    Evaluation source;
    std::optional<Evaluation> target;
    double wall_seconds = 0.0;
    // Number of target windows that reached the cross-entropy term; always 0.
    std::size_t target_ce_windows = 0;
};

struct TrainResult {
    nn::ModelParams<float> params;
    nn::AdamState<float> adam;  // state at the returned epoch
    Normalizer normalizer;
    Variant variant = Variant::NIF;
    RunReport report;
};

// Optional per-epoch hook for instrumentation; receives the 1-based epoch.
using EpochHook = std::function<void(std::size_t epoch, const EpochStats&)>;

// Trains on `source`; when cfg.da_enabled the loss adds lambda * MMD between
// dense1 features of source-healthy and target_healthy mini-batches. The
// normalizer is fitted on `source` only. Returned params are those of the
// epoch with the smallest training loss.
TrainResult train(const Dataset& source, const Dataset* target_healthy, const TrainConfig& cfg,
                  const std::optional<nn::ModelParams<float>>& init = std::nullopt, const EpochHook& hook = {});

Evaluation evaluate(const nn::ModelParams<float>& params, const Normalizer& norm, const Dataset& data);

// Mean dense1 features over a dataset, in eval mode.
std::vector<double> mean_features(const nn::ModelParams<float>& params, const Normalizer& norm, const Dataset& data);

enum class Suite : std::uint8_t { CF = 0, NIF = 1, NIF_DA = 2 };
std::string to_string(Suite s);

struct ExperimentData {
    Dataset source_nif, target_nif, source_cf, target_cf;
};

struct RunRecord {
    Suite suite;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double source_accuracy = 0.0;
    double target_accuracy = 0.0;
    std::size_t epochs = 0;
    std::size_t best_epoch = 0;
    double initial_healthy_distance = 0.0;
    double first_epoch_healthy_distance = 0.0;
    double last_epoch_healthy_distance = 0.0;
    double final_healthy_distance = 0.0;  // at the returned params
    double first_epoch_mmd = 0.0;
    double last_epoch_mmd = 0.0;
    double wall_seconds = 0.0;
    Confusion target_confusion{};
};

struct SuiteSummary {
    Suite suite;
    double source_mean = 0, source_std = 0, target_mean = 0, target_std = 0;
};

struct ExperimentSummary {
    std::vector<RunRecord> runs;
    std::vector<SuiteSummary> suites;
};

// n_runs independent seeds per suite; runs execute on up to `jobs` threads
// and the summary does not depend on `jobs`.
ExperimentSummary run_experiment(const std::vector<Suite>& suites, const ExperimentData& data, const TrainConfig& cfg,
                                 std::size_t n_runs, std::uint64_t seed, unsigned jobs = 1);

// Population standard deviation (0 for a single run).
double mean_of(const std::vector<double>& v);
double std_of(const std::vector<double>& v);

// --- persistence -------------------------------------------------------

void save_checkpoint(const TrainResult& r, const TrainConfig& cfg, const std::filesystem::path& dir);
struct Checkpoint {
    TrainResult result;
    TrainConfig config;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// dense1 features of every window of every dataset, with labels and domains.
struct FeatureExport {
    std::size_t dim = 0;
    std::vector<float> features;  // [N][dim]
    std::vector<std::uint8_t> labels;
    std::vector<std::uint8_t> domains;  // 0 source, 1 target
};
FeatureExport export_features(const nn::ModelParams<float>& params, const Normalizer& norm,
                              const std::vector<const Dataset*>& datasets);
void save_features(const FeatureExport& f, const std::filesystem::path& dir);
FeatureExport load_features(const std::filesystem::path& dir);

}  // namespace qfd
