#include "qfd/pipeline.hpp"

#include "qfd/config.hpp"
#include "qfd/container.hpp"
#include "qfd/error.hpp"
#include "qfd/nn/loss.hpp"
#include "qfd/seed.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace qfd {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
    if (batch_size < 1 || max_epochs < 1 || patience < 1 || mmd_batch < 1 || filters < 1 || hidden < 1)
        throw ConfigError("train: batch_size, max_epochs, patience, mmd_batch, filters and hidden must be >= 1");
    if (patience > max_epochs) throw ConfigError("train: patience must not exceed max_epochs");
    if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("train: lr must be positive");
    if (!(dropout >= 0 && dropout < 1)) throw ConfigError("train: dropout must lie in [0, 1)");
    if (!(lambda_mmd >= 0) || !std::isfinite(lambda_mmd)) throw ConfigError("train: lambda_mmd must be >= 0");
    if (!(min_improvement >= 0)) throw ConfigError("train: min_improvement must be >= 0");
    if (!(rbf_bandwidth > 0)) throw ConfigError("train: rbf_bandwidth must be positive");
    if (mmd_kernel == MmdKernel::Rbf && mmd_batch < 2) throw ConfigError("train: the rbf kernel needs mmd_batch >= 2");
}

std::string to_string(Suite s) {
    switch (s) {
        case Suite::CF: return "CF";
        case Suite::NIF: return "NIF";
        case Suite::NIF_DA: return "NIF+DA";
    }
    return "?";
}

namespace {

Dataset normalized(const Dataset& d, const Normalizer& norm) {
    Dataset out = d;
    if (!out.data.empty()) norm.apply(out.data, out.window_len);
    return out;
}

void check_shape(const nn::Architecture& arch, const Dataset& d) {
    if (d.channels != arch.in_channels || d.window_len != arch.input_len)
        throw ShapeError("dataset windows are " + std::to_string(d.channels) + "x" + std::to_string(d.window_len) +
                         ", model expects " + std::to_string(arch.in_channels) + "x" +
                         std::to_string(arch.input_len));
}

// Eval-mode forward over a normalized dataset in chunks; calls sink(first, pass).
template <typename Sink>
void forward_all(const nn::ModelParams<float>& params, const Dataset& d, bool features_only, Sink&& sink) {
    constexpr std::size_t chunk = 256;
    nn::ForwardPass<float> pass;
    nn::ForwardOptions opts;
    opts.features_only = features_only;
    std::vector<std::size_t> idx;
    std::vector<float> x;
    std::vector<int> y;
    for (std::size_t first = 0; first < d.size(); first += chunk) {
        const std::size_t n = std::min(chunk, d.size() - first);
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), first);
        gather(d, idx, x, y);
        nn::model_forward<float>(params, x, n, opts, pass);
        sink(first, n, pass);
    }
}

std::vector<double> mean_features_normalized(const nn::ModelParams<float>& params, const Dataset& d) {
    const std::size_t h = params.arch().hidden;
    std::vector<double> sum(h, 0.0);
    if (d.size() == 0) throw InputDomainError("mean_features: empty dataset");
    forward_all(params, d, true, [&](std::size_t, std::size_t n, const nn::ForwardPass<float>& pass) {
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t j = 0; j < h; ++j) sum[j] += pass.features[b * h + j];
    });
    for (auto& s : sum) s /= double(d.size());
    return sum;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

Evaluation evaluate_normalized(const nn::ModelParams<float>& params, const Dataset& d) {
    Evaluation e;
    const std::size_t k = params.arch().classes;
    forward_all(params, d, false, [&](std::size_t first, std::size_t n, const nn::ForwardPass<float>& pass) {
        for (std::size_t b = 0; b < n; ++b) {
            const float* row = pass.logits.data() + b * k;
            const auto pred = std::size_t(std::max_element(row, row + k) - row);
            ++e.confusion[d.labels[first + b] - 1][pred];
        }
    });
    std::size_t correct = 0;
    for (int c = 0; c < kClasses; ++c) correct += e.confusion[c][c];
    e.total = d.size();
    e.accuracy = e.total ? double(correct) / double(e.total) : 0.0;
    return e;
}

std::vector<std::size_t> draw(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> u(0, n - 1);
    std::vector<std::size_t> out(k);
    for (auto& i : out) i = u(rng);
    return out;
}

}  // namespace

Evaluation evaluate(const nn::ModelParams<float>& params, const Normalizer& norm, const Dataset& data) {
    check_shape(params.arch(), data);
    if (norm.channels() != data.channels) throw ShapeError("evaluate: normalizer channel count mismatch");
    return evaluate_normalized(params, normalized(data, norm));
}

std::vector<double> mean_features(const nn::ModelParams<float>& params, const Normalizer& norm, const Dataset& data) {
    check_shape(params.arch(), data);
    return mean_features_normalized(params, normalized(data, norm));
}

TrainResult train(const Dataset& source, const Dataset* target_healthy, const TrainConfig& cfg,
                  const std::optional<nn::ModelParams<float>>& init, const EpochHook& hook) {
    cfg.validate();
    source.validate();
    if (source.size() == 0) throw ConfigError("train: source dataset is empty");
    if (target_healthy) {
        target_healthy->validate();
        if (target_healthy->variant != source.variant || target_healthy->window_len != source.window_len)
            throw ConfigError("train: target windows do not match the source variant/length");
        for (auto l : target_healthy->labels)
            if (l != 1) throw ConfigError("train: target_healthy holds a window with label " + std::to_string(l));
    }
    if (cfg.da_enabled && (!target_healthy || target_healthy->size() == 0))
        throw ConfigError("train: domain adaptation needs target-healthy windows");
    const auto t0 = std::chrono::steady_clock::now();

    TrainResult r;
    r.variant = source.variant;
    r.normalizer = Normalizer::fit(source.data, source.size(), source.channels, source.window_len);
    const Dataset src = normalized(source, r.normalizer);
    const Dataset src_healthy = healthy_subset(src);
    std::optional<Dataset> tgt;
    if (target_healthy) tgt = normalized(*target_healthy, r.normalizer);
    if (cfg.da_enabled && src_healthy.size() == 0) throw ConfigError("train: source has no healthy windows");
    const bool track = tgt && tgt->size() > 0 && src_healthy.size() > 0;

    nn::Architecture arch;
    arch.in_channels = source.channels;
    arch.input_len = source.window_len;
    arch.filters = cfg.filters;
    arch.hidden = cfg.hidden;
    arch.validate();
    auto params = init ? *init : nn::ModelParams<float>::initialize(arch, derive_seed(cfg.seed, {1}));
    if (params.arch() != arch) throw ShapeError("train: initial params do not match the data/config architecture");
    auto adam = nn::AdamState<float>::create(arch, {cfg.lr});
    auto grads = nn::ModelParams<float>::zeros(arch);

    auto healthy_distance = [&] {
        if (!track) return std::numeric_limits<double>::quiet_NaN();
        return distance(mean_features_normalized(params, src_healthy), mean_features_normalized(params, *tgt));
    };
    r.report.initial_healthy_distance = healthy_distance();

    std::mt19937_64 dropout_rng(derive_seed(cfg.seed, {3}));
    std::mt19937_64 mmd_rng(derive_seed(cfg.seed, {4}));
    const BatchSampler sampler(src.size(), cfg.batch_size);
    const std::size_t h = arch.hidden;

    nn::ForwardPass<float> ce_pass, s_pass, t_pass;
    nn::ForwardOptions train_opts{nn::Mode::Train, cfg.dropout, &dropout_rng, false};
    nn::ForwardOptions feat_opts{nn::Mode::Eval, 0.0, nullptr, true};
    std::vector<float> x, xs, xt, dlogits, ds, dt;
    std::vector<int> y, ys, yt;

    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    nn::ModelParams<float> best_params = params;
    nn::AdamState<float> best_adam = adam;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        EpochStats st;
        const auto batches = sampler.epoch(derive_seed(cfg.seed, {2, epoch}));
        for (const auto& idx : batches) {
            grads.set_zero();
            gather(src, idx, x, y);
            if (src.domain == quadsim::Domain::Target) r.report.target_ce_windows += idx.size();
            nn::model_forward<float>(params, x, idx.size(), train_opts, ce_pass);
            dlogits.resize(idx.size() * arch.classes);
            const double ce = nn::softmax_cross_entropy<float>(ce_pass.logits, y, arch.classes, dlogits);
            nn::model_backward<float>(params, ce_pass, dlogits, {}, grads);

            double mmd = 0.0;
            if (cfg.da_enabled) {
                const auto is = draw(src_healthy.size(), cfg.mmd_batch, mmd_rng);
                const auto it = draw(tgt->size(), cfg.mmd_batch, mmd_rng);
                gather(src_healthy, is, xs, ys);
                gather(*tgt, it, xt, yt);
                nn::model_forward<float>(params, xs, is.size(), feat_opts, s_pass);
                nn::model_forward<float>(params, xt, it.size(), feat_opts, t_pass);
                ds.assign(is.size() * h, 0.0f);
                dt.assign(it.size() * h, 0.0f);
                mmd = cfg.mmd_kernel == MmdKernel::Linear
                          ? nn::mmd_linear<float>(s_pass.features, is.size(), t_pass.features, it.size(), h, ds, dt)
                          : nn::mmd_rbf<float>(s_pass.features, is.size(), t_pass.features, it.size(), h,
                                               cfg.rbf_bandwidth, ds, dt);
                const float lam = float(cfg.lambda_mmd);
                for (auto& g : ds) g *= lam;
                for (auto& g : dt) g *= lam;
                nn::model_backward<float>(params, s_pass, {}, ds, grads);
                nn::model_backward<float>(params, t_pass, {}, dt, grads);
            }
            const double total = ce + cfg.lambda_mmd * mmd;
            if (!std::isfinite(total))
                throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch));
            nn::adam_step(params, grads, adam, cfg.lr);
            st.ce += ce;
            st.mmd += mmd;
            st.total += total;
        }
        const double nb = double(batches.size());
        st.ce /= nb;
        st.mmd /= nb;
        st.total /= nb;
        st.healthy_distance = healthy_distance();
        r.report.epochs.push_back(st);
        if (hook) hook(epoch, st);
        spdlog::debug("epoch {}: ce {:.5f} mmd {:.3e} total {:.5f} dist {:.4f}", epoch, st.ce, st.mmd, st.total,
                      st.healthy_distance);

        if (st.total < best - cfg.min_improvement) {
            best = st.total;
            best_params = params;
            best_adam = adam;
            r.report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            r.report.stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }
    if (r.report.best_epoch == 0) throw TrainingError("train: no epoch produced a finite loss");

    r.params = std::move(best_params);
    r.adam = std::move(best_adam);
    r.report.source = evaluate_normalized(r.params, src);
    r.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// --- experiments -----------------------------------------------------------

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
}

ExperimentSummary run_experiment(const std::vector<Suite>& suites, const ExperimentData& data, const TrainConfig& cfg,
                                 std::size_t n_runs, std::uint64_t seed, unsigned jobs) {
    if (n_runs < 1) throw ConfigError("experiment: runs must be >= 1");
    cfg.validate();
    const Dataset th_nif = healthy_subset(data.target_nif);
    const Dataset th_cf = healthy_subset(data.target_cf);

    struct Task {
        Suite suite;
        std::size_t run;
    };
    std::vector<Task> tasks;
    for (Suite s : suites)
        for (std::size_t r = 0; r < n_runs; ++r) tasks.push_back({s, r});
    std::vector<RunRecord> records(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};

    auto run_one = [&](const Task& t) {
        TrainConfig c = cfg;
        c.seed = derive_seed(seed, {t.run});
        c.da_enabled = t.suite == Suite::NIF_DA;
        const bool cf = t.suite == Suite::CF;
        const Dataset& src = cf ? data.source_cf : data.source_nif;
        const Dataset& tgt = cf ? data.target_cf : data.target_nif;
        const Dataset& th = cf ? th_cf : th_nif;
        auto res = train(src, th.size() ? &th : nullptr, c);
        RunRecord rec;
        rec.suite = t.suite;
        rec.run = t.run;
        rec.seed = c.seed;
        rec.source_accuracy = res.report.source.accuracy;
        const auto te = evaluate(res.params, res.normalizer, tgt);
        rec.target_accuracy = te.accuracy;
        rec.target_confusion = te.confusion;
        const auto& ep = res.report.epochs;
        rec.epochs = ep.size();
        rec.best_epoch = res.report.best_epoch;
        rec.initial_healthy_distance = res.report.initial_healthy_distance;
        rec.first_epoch_healthy_distance = ep.front().healthy_distance;
        rec.last_epoch_healthy_distance = ep.back().healthy_distance;
        rec.final_healthy_distance = ep[rec.best_epoch - 1].healthy_distance;
        rec.first_epoch_mmd = ep.front().mmd;
        rec.last_epoch_mmd = ep.back().mmd;
        rec.wall_seconds = res.report.wall_seconds;
        spdlog::info("{} run {}: source {:.2f}% target {:.2f}% ({} epochs, {:.1f} s)", to_string(t.suite), t.run,
                     100 * rec.source_accuracy, 100 * rec.target_accuracy, rec.epochs, rec.wall_seconds);
        return rec;
    };
    auto worker = [&] {
        for (std::size_t i; (i = next++) < tasks.size();) {
            try {
                records[i] = run_one(tasks[i]);
            } catch (const Error& e) {
                try {
                    throw TrainingError(to_string(tasks[i].suite) + " run " + std::to_string(tasks[i].run) + ": " +
                                        e.what());
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::clamp<unsigned>(jobs, 1u, unsigned(std::max<std::size_t>(1, tasks.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentSummary out;
    out.runs = records;
    for (Suite s : suites) {
        std::vector<double> sa, ta;
        for (const auto& r : records)
            if (r.suite == s) {
                sa.push_back(r.source_accuracy);
                ta.push_back(r.target_accuracy);
            }
        out.suites.push_back({s, mean_of(sa), std_of(sa), mean_of(ta), std_of(ta)});
    }
    return out;
}

// --- persistence -----------------------------------------------------------

namespace {

constexpr char kCheckpointFormat[] = "qfd-checkpoint";
constexpr char kFeatureFormat[] = "qfd-features";

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json to_json(const Evaluation& e) { return {{"accuracy", e.accuracy}, {"total", e.total}, {"confusion", e.confusion}}; }

Evaluation evaluation_from_json(const json& j) {
    Evaluation e;
    e.accuracy = container::field<double>(j, "accuracy");
    e.total = container::field<std::size_t>(j, "total");
    e.confusion = container::field<Confusion>(j, "confusion");
    return e;
}

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

std::vector<float> flatten(const nn::ModelParams<float>& p) {
    std::vector<float> v;
    v.reserve(p.parameter_count());
    for (const auto& t : p.tensors()) v.insert(v.end(), t.values.begin(), t.values.end());
    return v;
}

void unflatten(const std::vector<float>& v, nn::ModelParams<float>& p, const fs::path& dir) {
    if (v.size() != p.parameter_count())
        throw CountMismatchError(dir.string() + ": parameter count disagrees with the architecture");
    std::size_t k = 0;
    for (auto& t : p.tensors())
        for (auto& x : t.values) x = v[k++];
}

json arch_json(const nn::Architecture& a) {
    return {{"in_channels", a.in_channels}, {"input_len", a.input_len}, {"filters", a.filters},
            {"conv_blocks", a.conv_blocks}, {"hidden", a.hidden},        {"classes", a.classes}};
}

}  // namespace

void save_checkpoint(const TrainResult& r, const TrainConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const auto params = flatten(r.params), m = flatten(r.adam.m), v = flatten(r.adam.v);
    std::vector<double> norm = r.normalizer.mean();
    norm.insert(norm.end(), r.normalizer.stddev().begin(), r.normalizer.stddev().end());

    json epochs = json::array();
    for (const auto& e : r.report.epochs)
        epochs.push_back({{"ce", num(e.ce)}, {"mmd", num(e.mmd)}, {"total", num(e.total)},
                          {"healthy_distance", num(e.healthy_distance)}});
    json report = {{"epochs", epochs},
                   {"initial_healthy_distance", num(r.report.initial_healthy_distance)},
                   {"best_epoch", r.report.best_epoch},
                   {"stopped_early", r.report.stopped_early},
                   {"source", to_json(r.report.source)},
                   {"target", r.report.target ? to_json(*r.report.target) : json(nullptr)},
                   {"target_ce_windows", r.report.target_ce_windows}};
    json manifest = {{"variant", to_string(r.variant)},
                     {"architecture", arch_json(r.params.arch())},
                     {"train", to_json(cfg)},
                     {"adam_step", r.adam.step},
                     {"report", report},
                     {"params", array_entry("params.f32", std::span<const float>(params))},
                     {"adam_m", array_entry("adam_m.f32", std::span<const float>(m))},
                     {"adam_v", array_entry("adam_v.f32", std::span<const float>(v))},
                     {"normalizer", array_entry("normalizer.f64", std::span<const double>(norm))}};
    container::write_array(dir / "params.f32", std::span<const float>(params));
    container::write_array(dir / "adam_m.f32", std::span<const float>(m));
    container::write_array(dir / "adam_v.f32", std::span<const float>(v));
    container::write_array(dir / "normalizer.f64", std::span<const double>(norm));
    container::write_manifest(dir, kCheckpointFormat, std::move(manifest));
}

Checkpoint load_checkpoint(const fs::path& dir) {
    const json m = container::read_manifest(dir, kCheckpointFormat);
    Checkpoint c;
    try {
        c.config = train_config_from_json(container::field<json>(m, "train"));
        c.result.variant = variant_from_string(container::field<std::string>(m, "variant"));
    } catch (const Error& e) {
        throw FormatError(dir.string() + ": " + e.what());
    }
    const auto a = container::field<json>(m, "architecture");
    nn::Architecture arch;
    arch.in_channels = container::field<std::size_t>(a, "in_channels");
    arch.input_len = container::field<std::size_t>(a, "input_len");
    arch.filters = container::field<std::size_t>(a, "filters");
    arch.conv_blocks = container::field<std::size_t>(a, "conv_blocks");
    arch.hidden = container::field<std::size_t>(a, "hidden");
    arch.classes = container::field<std::size_t>(a, "classes");
    try {
        arch.validate();
    } catch (const ShapeError& e) {
        throw FormatError(dir.string() + ": " + e.what());
    }

    auto& r = c.result;
    r.params = nn::ModelParams<float>::zeros(arch);
    r.adam = nn::AdamState<float>::create(arch, {c.config.lr});
    r.adam.step = container::field<std::uint64_t>(m, "adam_step");
    unflatten(read_entry<float>(dir, m, "params"), r.params, dir);
    unflatten(read_entry<float>(dir, m, "adam_m"), r.adam.m, dir);
    unflatten(read_entry<float>(dir, m, "adam_v"), r.adam.v, dir);
    const auto norm = read_entry<double>(dir, m, "normalizer");
    if (norm.size() != 2 * arch.in_channels)
        throw CountMismatchError(dir.string() + ": normalizer size disagrees with the channel count");
    r.normalizer = Normalizer(std::vector<double>(norm.begin(), norm.begin() + long(arch.in_channels)),
                              std::vector<double>(norm.begin() + long(arch.in_channels), norm.end()));

    const auto rep = container::field<json>(m, "report");
    for (const auto& e : container::field<json>(rep, "epochs"))
        r.report.epochs.push_back({num(e.at("ce")), num(e.at("mmd")), num(e.at("total")),
                                   num(e.at("healthy_distance"))});
    r.report.initial_healthy_distance = num(container::field<json>(rep, "initial_healthy_distance"));
    r.report.best_epoch = container::field<std::size_t>(rep, "best_epoch");
    r.report.stopped_early = container::field<bool>(rep, "stopped_early");
    r.report.source = evaluation_from_json(container::field<json>(rep, "source"));
    const auto t = container::field<json>(rep, "target");
    if (!t.is_null()) r.report.target = evaluation_from_json(t);
    r.report.target_ce_windows = container::field<std::size_t>(rep, "target_ce_windows");
    return c;
}

FeatureExport export_features(const nn::ModelParams<float>& params, const Normalizer& norm,
                              const std::vector<const Dataset*>& datasets) {
    FeatureExport f;
    f.dim = params.arch().hidden;
    for (const Dataset* d : datasets) {
        check_shape(params.arch(), *d);
        const Dataset n = normalized(*d, norm);
        forward_all(params, n, true, [&](std::size_t first, std::size_t k, const nn::ForwardPass<float>& pass) {
            f.features.insert(f.features.end(), pass.features.begin(),
                              pass.features.begin() + long(k * f.dim));
            for (std::size_t b = 0; b < k; ++b) {
                f.labels.push_back(n.labels[first + b]);
                f.domains.push_back(static_cast<std::uint8_t>(n.domain));
            }
        });
    }
    return f;
}

void save_features(const FeatureExport& f, const fs::path& dir) {
    fs::create_directories(dir);
    json m = {{"rows", f.labels.size()},
              {"dim", f.dim},
              {"features", array_entry("features.f32", std::span<const float>(f.features))},
              {"labels", array_entry("labels.u8", std::span<const std::uint8_t>(f.labels))},
              {"domains", array_entry("domains.u8", std::span<const std::uint8_t>(f.domains))}};
    container::write_array(dir / "features.f32", std::span<const float>(f.features));
    container::write_array(dir / "labels.u8", std::span<const std::uint8_t>(f.labels));
    container::write_array(dir / "domains.u8", std::span<const std::uint8_t>(f.domains));
    container::write_manifest(dir, kFeatureFormat, std::move(m));
}

FeatureExport load_features(const fs::path& dir) {
    const json m = container::read_manifest(dir, kFeatureFormat);
    FeatureExport f;
    f.dim = container::field<std::size_t>(m, "dim");
    const auto rows = container::field<std::size_t>(m, "rows");
    f.features = read_entry<float>(dir, m, "features");
    f.labels = read_entry<std::uint8_t>(dir, m, "labels");
    f.domains = read_entry<std::uint8_t>(dir, m, "domains");
    if (f.labels.size() != rows || f.domains.size() != rows || f.features.size() != rows * f.dim)
        throw CountMismatchError(dir.string() + ": array lengths disagree with rows x dim");
    return f;
}

}  // namespace qfd
