#include "qfd/config.hpp"

#include "qfd/container.hpp"
#include "qfd/error.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace qfd {

using nlohmann::json;
using quadsim::Vec3;
using quadsim::Vec4;

namespace {

template <typename V>
json vec(const V& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// Reads known keys from one JSON object and rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
        if (!j_.is_object()) throw ConfigError(ctx_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path(key) + ": " + e.what());
        }
    }

    template <int N>
    void get(const char* key, Eigen::Matrix<double, N, 1>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const auto& a = j_.at(key);
        if (!a.is_array() || a.size() != std::size_t(N))
            throw ConfigError(path(key) + ": expected an array of " + std::to_string(N) + " numbers");
        for (int i = 0; i < N; ++i) {
            if (!a[i].is_number()) throw ConfigError(path(key) + ": expected numbers");
            out[i] = a[i].get<double>();
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string path(const char* key) const { return ctx_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("unknown key '" + ctx_ + "." + k + "'");
    }

private:
    const json& j_;
    std::string ctx_;
    std::set<std::string> seen_;
};

void read(const json& j, const std::string& ctx, quadsim::QuadParams& p) {
    Reader r(j, ctx);
    r.get("inertia_diag", p.inertia_diag);
    r.get("arm_length", p.arm_length);
    r.get("k_f", p.k_f);
    r.get("k_tau", p.k_tau);
    r.get("mass", p.mass);
    r.get("k_m", p.k_m);
    r.get("omega_max", p.omega_max);
    r.finish();
}

void read(const json& j, const std::string& ctx, quadsim::ControllerGains& g) {
    Reader r(j, ctx);
    r.get("pos_p", g.pos_p);
    r.get("pos_i", g.pos_i);
    r.get("pos_d", g.pos_d);
    r.get("att_p", g.att_p);
    r.get("rate_p", g.rate_p);
    r.get("rate_i", g.rate_i);
    r.get("max_tilt", g.max_tilt);
    r.get("max_accel", g.max_accel);
    r.get("yaw", g.yaw);
    r.finish();
}

void read_waypoints(const json& j, const std::string& ctx, std::vector<Vec3>& out) {
    if (!j.is_array()) throw ConfigError(ctx + ": expected an array of [x, y, z]");
    out.clear();
    for (const auto& w : j) {
        if (!w.is_array() || w.size() != 3) throw ConfigError(ctx + ": each waypoint is [x, y, z]");
        out.emplace_back(w[0].get<double>(), w[1].get<double>(), w[2].get<double>());
    }
}

void read(const json& j, const std::string& ctx, quadsim::FlightPlan& p) {
    Reader r(j, ctx);
    if (const auto* w = r.child("waypoints")) read_waypoints(*w, r.path("waypoints"), p.waypoints);
    r.get("hold", p.hold);
    r.get("duration", p.duration);
    r.get("dt", p.dt);
    r.finish();
}

void read(const json& j, const std::string& ctx, quadsim::UnbalanceModel& u) {
    Reader r(j, ctx);
    r.get("rho", u.rho);
    r.get("omega_ref_max", u.omega_ref_max);
    r.finish();
}

void read(const json& j, const std::string& ctx, quadsim::DomainConfig& d) {
    Reader r(j, ctx);
    std::string domain = to_string(d.domain);
    r.get("domain", domain);
    try {
        d.domain = quadsim::domain_from_string(domain);
    } catch (const InputDomainError& e) {
        throw ConfigError(r.path("domain") + ": " + e.what());
    }
    r.get("gyro_noise_std", d.gyro_noise_std);
    r.get("gyro_bias", d.gyro_bias);
    r.get("attitude_bias", d.attitude_bias);
    r.get("cog_offset", d.cog_offset);
    r.get("motor_gain_scale", d.motor_gain_scale);
    r.get("rotor_weakness", d.rotor_weakness);
    r.get("perfect_motor", d.perfect_motor);
    r.get("waypoint_jitter", d.waypoint_jitter);
    if (const auto* u = r.child("unbalance")) {
        if (u->is_null()) {
            d.unbalance.reset();
        } else {
            quadsim::UnbalanceModel m;
            read(*u, r.path("unbalance"), m);
            d.unbalance = m;
        }
    }
    r.get("seed", d.seed);
    r.finish();
}

void read(const json& j, const std::string& ctx, TrainConfig& t) {
    Reader r(j, ctx);
    r.get("batch_size", t.batch_size);
    r.get("lr", t.lr);
    r.get("max_epochs", t.max_epochs);
    r.get("patience", t.patience);
    r.get("min_improvement", t.min_improvement);
    r.get("dropout", t.dropout);
    r.get("lambda_mmd", t.lambda_mmd);
    r.get("da_enabled", t.da_enabled);
    r.get("mmd_batch", t.mmd_batch);
    std::string kernel = t.mmd_kernel == MmdKernel::Linear ? "linear" : "rbf";
    r.get("mmd_kernel", kernel);
    if (kernel == "linear") t.mmd_kernel = MmdKernel::Linear;
    else if (kernel == "rbf") t.mmd_kernel = MmdKernel::Rbf;
    else throw ConfigError(r.path("mmd_kernel") + ": expected linear or rbf");
    r.get("rbf_bandwidth", t.rbf_bandwidth);
    r.get("filters", t.filters);
    r.get("hidden", t.hidden);
    r.get("seed", t.seed);
    r.finish();
}

}  // namespace

json to_json(const quadsim::QuadParams& p) {
    return {{"inertia_diag", vec(p.inertia_diag)}, {"arm_length", p.arm_length}, {"k_f", p.k_f},
            {"k_tau", p.k_tau}, {"mass", p.mass}, {"k_m", p.k_m}, {"omega_max", p.omega_max}};
}

json to_json(const quadsim::ControllerGains& g) {
    return {{"pos_p", vec(g.pos_p)},   {"pos_i", vec(g.pos_i)},   {"pos_d", vec(g.pos_d)},
            {"att_p", vec(g.att_p)},   {"rate_p", vec(g.rate_p)}, {"rate_i", vec(g.rate_i)},
            {"max_tilt", g.max_tilt}, {"max_accel", g.max_accel}, {"yaw", g.yaw}};
}

json to_json(const quadsim::FlightPlan& p) {
    json w = json::array();
    for (const auto& v : p.waypoints) w.push_back(vec(v));
    return {{"waypoints", w}, {"hold", p.hold}, {"duration", p.duration}, {"dt", p.dt}};
}

json to_json(const quadsim::DomainConfig& d) {
    json u = nullptr;
    if (d.unbalance) u = {{"rho", vec(d.unbalance->rho)}, {"omega_ref_max", d.unbalance->omega_ref_max}};
    return {{"domain", to_string(d.domain)},
            {"gyro_noise_std", d.gyro_noise_std},
            {"gyro_bias", vec(d.gyro_bias)},
            {"attitude_bias", vec(d.attitude_bias)},
            {"cog_offset", vec(d.cog_offset)},
            {"motor_gain_scale", vec(d.motor_gain_scale)},
            {"rotor_weakness", vec(d.rotor_weakness)},
            {"perfect_motor", d.perfect_motor},
            {"waypoint_jitter", d.waypoint_jitter},
            {"unbalance", u},
            {"seed", d.seed}};
}

json to_json(const GenerationConfig& g) {
    return {{"quad", to_json(g.quad)},
            {"controller", to_json(g.gains)},
            {"flight", to_json(g.plan)},
            {"fault", {{"eta_f", g.eta_f}, {"eta_tau", g.eta_tau}}},
            {"features", {{"window_len", g.features.window_len}, {"stride", g.features.stride}}},
            {"per_class", g.per_class}};
}

json to_json(const TrainConfig& t) {
    return {{"batch_size", t.batch_size},
            {"lr", t.lr},
            {"max_epochs", t.max_epochs},
            {"patience", t.patience},
            {"min_improvement", t.min_improvement},
            {"dropout", t.dropout},
            {"lambda_mmd", t.lambda_mmd},
            {"da_enabled", t.da_enabled},
            {"mmd_batch", t.mmd_batch},
            {"mmd_kernel", t.mmd_kernel == MmdKernel::Linear ? "linear" : "rbf"},
            {"rbf_bandwidth", t.rbf_bandwidth},
            {"filters", t.filters},
            {"hidden", t.hidden},
            {"seed", t.seed}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig t;
    read(j, "train", t);
    t.validate();
    return t;
}

json to_json(const RunConfig& c) {
    json gen = to_json(c.generation);
    return {{"quad", gen["quad"]},
            {"controller", gen["controller"]},
            {"flight", gen["flight"]},
            {"fault", gen["fault"]},
            {"features", gen["features"]},
            {"per_class", c.generation.per_class},
            {"calibration", {{"flight", to_json(c.calibration.plan)}, {"trim", c.calibration.trim}}},
            {"source", to_json(c.source)},
            {"target", to_json(c.target)},
            {"train", to_json(c.train)},
            {"runs", c.runs},
            {"seed", c.seed},
            {"experiment_seed", c.experiment_seed}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c = RunConfig::defaults();
    Reader r(j, "config");
    if (const auto* q = r.child("quad")) read(*q, "config.quad", c.generation.quad);
    if (const auto* g = r.child("controller")) read(*g, "config.controller", c.generation.gains);
    if (const auto* f = r.child("flight")) read(*f, "config.flight", c.generation.plan);
    if (const auto* f = r.child("fault")) {
        Reader fr(*f, "config.fault");
        fr.get("eta_f", c.generation.eta_f);
        fr.get("eta_tau", c.generation.eta_tau);
        fr.finish();
    }
    if (const auto* f = r.child("features")) {
        Reader fr(*f, "config.features");
        fr.get("window_len", c.generation.features.window_len);
        fr.get("stride", c.generation.features.stride);
        fr.finish();
    }
    r.get("per_class", c.generation.per_class);
    if (const auto* cal = r.child("calibration")) {
        Reader cr(*cal, "config.calibration");
        if (const auto* f = cr.child("flight")) read(*f, "config.calibration.flight", c.calibration.plan);
        cr.get("trim", c.calibration.trim);
        cr.finish();
    }
    if (const auto* s = r.child("source")) read(*s, "config.source", c.source);
    if (const auto* t = r.child("target")) read(*t, "config.target", c.target);
    if (const auto* t = r.child("train")) read(*t, "config.train", c.train);
    r.get("runs", c.runs);
    r.get("seed", c.seed);
    r.get("experiment_seed", c.experiment_seed);
    r.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.generation.plan.waypoints = {Vec3(0, 0, 2), Vec3(1, 0, 2), Vec3(1, 1, 2.5), Vec3(0, 1, 2)};

    c.source.domain = quadsim::Domain::Source;
    c.source.perfect_motor = true;
    c.source.gyro_noise_std = 0.005;
    c.source.seed = 1;

    c.target.domain = quadsim::Domain::Target;
    c.target.gyro_noise_std = 0.005;
    c.target.cog_offset = Eigen::Vector2d(0.004, -0.003);
    c.target.motor_gain_scale = Vec4(1.08, 0.92, 1.05, 0.95);
    c.target.rotor_weakness = Vec4(1.0, 1.04, 0.98, 1.02);
    c.target.perfect_motor = false;
    c.target.waypoint_jitter = 0.5;
    c.target.seed = 2;
    return c;
}

void RunConfig::validate() const {
    try {
        generation.validate();
        source.validate();
        target.validate();
        train.validate();
        calibration.plan.validate();
    } catch (const InputDomainError& e) {
        throw ConfigError(e.what());
    }
    if (source.domain != quadsim::Domain::Source) throw ConfigError("config.source.domain must be 'source'");
    if (target.domain != quadsim::Domain::Target) throw ConfigError("config.target.domain must be 'target'");
    if (runs < 1) throw ConfigError("config.runs must be >= 1");
    if (!(calibration.trim >= 0) || calibration.trim >= calibration.plan.duration)
        throw ConfigError("config.calibration.trim must lie in [0, flight duration)");
}

json to_json(const ExperimentSummary& s) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json records = json::array(), aggregates = json::array(), training = json::array();
    for (const auto& r : s.runs) {
        const std::string suite = to_string(r.suite);
        records.push_back({{"suite", suite}, {"domain", "source"}, {"run", r.run}, {"accuracy", r.source_accuracy}});
        records.push_back({{"suite", suite},
                           {"domain", "target"},
                           {"run", r.run},
                           {"accuracy", r.target_accuracy},
                           {"confusion", r.target_confusion}});
        training.push_back({{"suite", suite},
                            {"run", r.run},
                            {"seed", r.seed},
                            {"epochs", r.epochs},
                            {"best_epoch", r.best_epoch},
                            {"healthy_distance",
                             {{"initial", num(r.initial_healthy_distance)},
                              {"first_epoch", num(r.first_epoch_healthy_distance)},
                              {"last_epoch", num(r.last_epoch_healthy_distance)},
                              {"returned", num(r.final_healthy_distance)}}},
                            {"mmd", {{"first_epoch", r.first_epoch_mmd}, {"last_epoch", r.last_epoch_mmd}}}});
    }
    for (const auto& a : s.suites) {
        const std::string suite = to_string(a.suite);
        aggregates.push_back({{"suite", suite}, {"domain", "source"}, {"mean", a.source_mean}, {"std", a.source_std}});
        aggregates.push_back({{"suite", suite}, {"domain", "target"}, {"mean", a.target_mean}, {"std", a.target_std}});
    }
    return {{"records", records}, {"aggregates", aggregates}, {"training", training}};
}

json timings_json(const ExperimentSummary& s) {
    json out = json::array();
    for (const auto& r : s.runs)
        out.push_back({{"suite", to_string(r.suite)}, {"run", r.run}, {"wall_seconds", r.wall_seconds}});
    return out;
}

std::uint64_t generation_hash(const GenerationConfig& g, const quadsim::DomainConfig& d, std::uint64_t seed) {
    json j = {{"generation", to_json(g)}, {"domain", to_json(d)}, {"seed", seed}};
    const std::string s = j.dump();
    return container::fnv1a(std::as_bytes(std::span(s.data(), s.size())));
}

}  // namespace qfd
