#include "qfd/dataset.hpp"

#include "qfd/config.hpp"
#include "qfd/container.hpp"
#include "qfd/error.hpp"
#include "qfd/seed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

namespace qfd {

namespace fs = std::filesystem;
using nlohmann::json;

std::span<const float> Dataset::window(std::size_t i) const {
    if (i >= size()) throw ShapeError("dataset: window index " + std::to_string(i) + " out of range");
    return std::span<const float>(data).subspan(i * window_size(), window_size());
}

ClassCounts Dataset::class_counts() const {
    ClassCounts c{};
    for (auto l : labels) {
        if (l < 1 || l > kClasses) throw FormatError("dataset: label " + std::to_string(l) + " outside 1..5");
        ++c[l - 1];
    }
    return c;
}

void Dataset::append(const Window& w) {
    if (w.data.size() != window_size())
        throw ShapeError("dataset: window has " + std::to_string(w.data.size()) + " values, expected " +
                         std::to_string(window_size()));
    if (w.domain != domain) throw InputDomainError("dataset: window domain differs from dataset domain");
    if (w.label < 1 || w.label > kClasses) throw InputDomainError("dataset: label outside 1..5");
    data.insert(data.end(), w.data.begin(), w.data.end());
    labels.push_back(static_cast<std::uint8_t>(w.label));
}

void Dataset::validate() const {
    if (channels != channel_count(variant))
        throw ShapeError("dataset: " + std::to_string(channels) + " channels for variant " + to_string(variant));
    if (window_len == 0) throw ShapeError("dataset: zero window length");
    if (data.size() != size() * window_size())
        throw CountMismatchError("dataset: " + std::to_string(data.size()) + " values for " +
                                 std::to_string(size()) + " windows");
    class_counts();
}

void GenerationConfig::validate() const {
    quad.validate();
    plan.validate();
    features.validate();
    if (per_class < 1) throw InputDomainError("generation: per_class must be >= 1");
    if (!(eta_f > 0 && eta_f <= 1) || !(eta_tau > 0 && eta_tau <= 1))
        throw InputDomainError("generation: fault efficiencies must lie in (0, 1]");
    if (plan.samples() < features.window_len)
        throw InputDomainError("generation: an episode is shorter than one window");
}

namespace {

// Per-label windows for each requested variant.
std::vector<std::vector<Window>> fly_label(const GenerationConfig& cfg, const quadsim::DomainConfig& domain,
                                           std::uint64_t seed, int label, std::span<const Variant> variants) {
    const auto fault = quadsim::FaultSpec::for_label(label, cfg.eta_f, cfg.eta_tau);
    std::vector<std::vector<Window>> out(variants.size());
    for (std::uint64_t episode = 0; out[0].size() < cfg.per_class; ++episode) {
        const std::uint64_t s = derive_seed(seed, {std::uint64_t(label), episode});
        quadsim::FlightLog log;
        try {
            log = quadsim::fly_episode(cfg.quad, fault, domain, cfg.plan, s, cfg.gains);
        } catch (const EpisodeDivergedError& e) {
            throw EpisodeDivergedError(std::string(e.what()) + " (label " + std::to_string(label) + ", episode " +
                                           std::to_string(episode) + ", seed " + std::to_string(s) + ")",
                                       e.step());
        }
        for (std::size_t v = 0; v < variants.size(); ++v) {
            FeatureConfig fc = cfg.features;
            fc.variant = variants[v];
            auto w = build_windows(log, fc);
            const std::size_t take = std::min(w.size(), cfg.per_class - out[v].size());
            out[v].insert(out[v].end(), std::make_move_iterator(w.begin()),
                          std::make_move_iterator(w.begin() + static_cast<std::ptrdiff_t>(take)));
        }
    }
    return out;
}

}  // namespace

std::vector<Dataset> generate_variants(const GenerationConfig& cfg, const quadsim::DomainConfig& domain,
                                       std::uint64_t seed, std::span<const Variant> variants, unsigned jobs) {
    cfg.validate();
    domain.validate();
    if (variants.empty()) throw InputDomainError("generate: no variants requested");

    std::vector<std::vector<std::vector<Window>>> per_label(kClasses);
    std::vector<std::exception_ptr> errors(kClasses);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i; (i = next++) < kClasses;) {
            try {
                per_label[i] = fly_label(cfg, domain, seed, i + 1, variants);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::clamp(jobs, 1u, unsigned(kClasses));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<Dataset> out;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        Dataset d;
        d.variant = variants[v];
        d.domain = domain.domain;
        d.window_len = cfg.features.window_len;
        d.channels = channel_count(variants[v]);
        d.seed = seed;
        GenerationConfig hashed = cfg;
        hashed.features.variant = variants[v];
        d.config_hash = generation_hash(hashed, domain, seed);
        d.data.reserve(kClasses * cfg.per_class * d.window_size());
        for (int l = 0; l < kClasses; ++l)
            for (const auto& w : per_label[l][v]) d.append(w);
        out.push_back(std::move(d));
    }
    return out;
}

Dataset generate(const GenerationConfig& cfg, const quadsim::DomainConfig& domain, std::uint64_t seed,
                 unsigned jobs) {
    const Variant v = cfg.features.variant;
    return std::move(generate_variants(cfg, domain, seed, std::span(&v, 1), jobs).front());
}

quadsim::DomainConfig adjusted_source(quadsim::DomainConfig source, const quadsim::UnbalanceModel& model) {
    model.validate();
    source.unbalance = model;
    return source;
}

Dataset subset(const Dataset& d, std::span<const std::size_t> indices) {
    Dataset out = d;
    out.data.clear();
    out.labels.clear();
    out.data.reserve(indices.size() * d.window_size());
    for (std::size_t i : indices) {
        auto w = d.window(i);
        out.data.insert(out.data.end(), w.begin(), w.end());
        out.labels.push_back(d.labels[i]);
    }
    return out;
}

Dataset healthy_subset(const Dataset& d) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.labels[i] == 1) idx.push_back(i);
    return subset(d, idx);
}

// --- files ---------------------------------------------------------------

namespace {

constexpr char kDatasetFormat[] = "qfd-dataset";
constexpr char kLogFormat[] = "qfd-flightlog";

template <typename T>
json array_entry(const std::string& file, std::span<const T> v) {
    return {{"file", file}, {"count", v.size()}, {"checksum", container::hex64(container::checksum(v))}};
}

template <typename T>
std::vector<T> read_entry(const fs::path& dir, const json& m, const char* key) {
    const auto e = container::field<json>(m, key);
    return container::read_array<T>(dir / container::field<std::string>(e, "file"),
                                    container::field<std::size_t>(e, "count"),
                                    container::parse_hex64(container::field<std::string>(e, "checksum")));
}

}  // namespace

void save_dataset(const Dataset& d, const fs::path& dir) {
    d.validate();
    fs::create_directories(dir);
    const auto counts = d.class_counts();
    json m = {{"variant", to_string(d.variant)},
              {"domain", to_string(d.domain)},
              {"window_len", d.window_len},
              {"channels", d.channels},
              {"windows", d.size()},
              {"class_counts", counts},
              {"config_hash", container::hex64(d.config_hash)},
              {"seed", d.seed},
              {"data", array_entry("data.f32", std::span<const float>(d.data))},
              {"labels", array_entry("labels.u8", std::span<const std::uint8_t>(d.labels))}};
    container::write_array(dir / "data.f32", std::span<const float>(d.data));
    container::write_array(dir / "labels.u8", std::span<const std::uint8_t>(d.labels));
    container::write_manifest(dir, kDatasetFormat, std::move(m));
}

Dataset load_dataset(const fs::path& dir) {
    const json m = container::read_manifest(dir, kDatasetFormat);
    Dataset d;
    try {
        d.variant = variant_from_string(container::field<std::string>(m, "variant"));
        d.domain = quadsim::domain_from_string(container::field<std::string>(m, "domain"));
    } catch (const InputDomainError& e) {
        throw FormatError(dir.string() + ": " + e.what());
    }
    d.window_len = container::field<std::size_t>(m, "window_len");
    d.channels = container::field<std::size_t>(m, "channels");
    d.config_hash = container::parse_hex64(container::field<std::string>(m, "config_hash"));
    d.seed = container::field<std::uint64_t>(m, "seed");
    const auto windows = container::field<std::size_t>(m, "windows");
    const auto counts = container::field<ClassCounts>(m, "class_counts");

    d.labels = read_entry<std::uint8_t>(dir, m, "labels");
    d.data = read_entry<float>(dir, m, "data");
    if (d.labels.size() != windows)
        throw CountMismatchError(dir.string() + ": " + std::to_string(d.labels.size()) + " labels, manifest says " +
                                 std::to_string(windows) + " windows");
    if (d.channels != channel_count(d.variant))
        throw CountMismatchError(dir.string() + ": channel count disagrees with variant");
    if (d.data.size() != windows * d.window_size())
        throw CountMismatchError(dir.string() + ": data holds " + std::to_string(d.data.size()) +
                                 " values, manifest implies " + std::to_string(windows * d.window_size()));
    if (d.class_counts() != counts)
        throw CountMismatchError(dir.string() + ": class counts in the manifest disagree with the labels");
    return d;
}

void save_flight_log(const quadsim::FlightLog& log, const fs::path& dir) {
    log.validate();
    fs::create_directories(dir);
    auto flat = [](const auto& rows) {
        std::vector<double> v;
        for (const auto& r : rows) v.insert(v.end(), r.begin(), r.end());
        return v;
    };
    const auto gyro = flat(log.gyro), att = flat(log.attitude), cmd = flat(log.omega_cmd);
    json m = {{"dt", log.dt},
              {"label", log.label},
              {"domain", to_string(log.domain)},
              {"samples", log.size()},
              {"gyro", array_entry("gyro.f64", std::span<const double>(gyro))},
              {"attitude", array_entry("attitude.f64", std::span<const double>(att))},
              {"omega_cmd", array_entry("omega_cmd.f64", std::span<const double>(cmd))}};
    container::write_array(dir / "gyro.f64", std::span<const double>(gyro));
    container::write_array(dir / "attitude.f64", std::span<const double>(att));
    container::write_array(dir / "omega_cmd.f64", std::span<const double>(cmd));
    container::write_manifest(dir, kLogFormat, std::move(m));
}

quadsim::FlightLog load_flight_log(const fs::path& dir) {
    const json m = container::read_manifest(dir, kLogFormat);
    quadsim::FlightLog log;
    log.dt = container::field<double>(m, "dt");
    log.label = container::field<int>(m, "label");
    try {
        log.domain = quadsim::domain_from_string(container::field<std::string>(m, "domain"));
    } catch (const InputDomainError& e) {
        throw FormatError(dir.string() + ": " + e.what());
    }
    const auto n = container::field<std::size_t>(m, "samples");
    auto unflat = [&](const char* key, auto& rows) {
        const auto v = read_entry<double>(dir, m, key);
        constexpr std::size_t w = std::tuple_size_v<typename std::decay_t<decltype(rows)>::value_type>;
        if (v.size() != n * w) throw CountMismatchError(dir.string() + ": " + key + " length disagrees with samples");
        rows.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w; ++j) rows[i][j] = v[i * w + j];
    };
    unflat("gyro", log.gyro);
    unflat("attitude", log.attitude);
    unflat("omega_cmd", log.omega_cmd);
    log.validate();
    return log;
}

// --- batching --------------------------------------------------------------

BatchSampler::BatchSampler(std::size_t n, std::size_t batch) : n_(n), batch_(batch) {
    if (n == 0) throw InputDomainError("batches: dataset is empty");
    if (batch == 0) throw InputDomainError("batches: batch size must be >= 1");
}

std::vector<std::vector<std::size_t>> BatchSampler::epoch(std::uint64_t shuffle_seed) const {
    std::vector<std::size_t> order(n_);
    for (std::size_t i = 0; i < n_; ++i) order[i] = i;
    std::mt19937_64 rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t b = 0; b < n_; b += batch_)
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n_, b + batch_)));
    return out;
}

void gather(const Dataset& d, std::span<const std::size_t> indices, std::vector<float>& data,
            std::vector<int>& classes) {
    const std::size_t ws = d.window_size();
    data.resize(indices.size() * ws);
    classes.resize(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        auto w = d.window(indices[k]);
        std::copy(w.begin(), w.end(), data.begin() + static_cast<std::ptrdiff_t>(k * ws));
        classes[k] = int(d.labels[indices[k]]) - 1;
    }
}

}  // namespace qfd
