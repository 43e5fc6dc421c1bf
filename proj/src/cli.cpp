#include "qfd/cli.hpp"

#include "qfd/config.hpp"
#include "qfd/container.hpp"
#include "qfd/error.hpp"
#include "qfd/log.hpp"
#include "qfd/quadsim/unbalance.hpp"
#include "qfd/workflow.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <thread>

namespace qfd {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const TrainingError*>(&e) || dynamic_cast<const FittingError*>(&e) ||
        dynamic_cast<const GradientCheckError*>(&e))
        return kExitTraining;
    if (dynamic_cast<const SimulationError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const DegenerateLogError*>(&e) ||
        dynamic_cast<const InputDomainError*>(&e))
        return kExitData;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitData;
    return kExitFailure;
}

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::size_t per_class = 0;
    std::size_t runs = 0;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    CLI::Option* seed_opt = nullptr;
    CLI::Option* per_class_opt = nullptr;
    CLI::Option* runs_opt = nullptr;

    RunConfig load() const {
        RunConfig c = config.empty() ? RunConfig::defaults() : load_run_config(config);
        if (per_class_opt && per_class_opt->count()) c.generation.per_class = per_class;
        if (runs_opt && runs_opt->count()) c.runs = runs;
        c.validate();
        return c;
    }
};

void write_resolved(const RunConfig& c, const fs::path& dir) {
    fs::create_directories(dir);
    container::write_json(dir / "config.json", to_json(c));
}

json unbalance_json(const quadsim::UnbalanceModel& m) {
    return {{"rho", {m.rho[0], m.rho[1], m.rho[2], m.rho[3]}}, {"omega_ref_max", m.omega_ref_max}};
}

std::vector<Variant> variants_from(const std::string& s) {
    if (s.empty()) return {Variant::NIF, Variant::CF};
    try {
        return {variant_from_string(s)};
    } catch (const InputDomainError& e) {
        throw ConfigError(std::string("--variant: ") + e.what());
    }
}

void print_counts(const Dataset& d, const fs::path& where) {
    const auto c = d.class_counts();
    std::printf("%s %s -> %s: %zu windows, per class [%zu, %zu, %zu, %zu, %zu]\n", to_string(d.domain).c_str(),
                to_string(d.variant).c_str(), where.string().c_str(), d.size(), c[0], c[1], c[2], c[3], c[4]);
}

json evaluation_json(const Evaluation& e) {
    return {{"accuracy", e.accuracy}, {"total", e.total}, {"confusion", e.confusion}};
}

int cmd_gen(const Common& common, const std::string& domain_name, const std::string& variant,
            const std::string& out) {
    RunConfig c = common.load();
    if (common.seed_opt->count()) c.seed = common.seed;
    quadsim::Domain domain;
    try {
        domain = quadsim::domain_from_string(domain_name);
    } catch (const InputDomainError& e) {
        throw ConfigError(std::string("--domain: ") + e.what());
    }
    const auto variants = variants_from(variant);
    const fs::path dir(out);
    write_resolved(c, dir);

    std::optional<quadsim::UnbalanceModel> model;
    if (domain == quadsim::Domain::Source) {
        const auto log = calibration_log(c);
        save_flight_log(log, dir / "calibration");
        model = quadsim::estimate_unbalance(log);
        container::write_json(dir / "unbalance.json", unbalance_json(*model));
        std::printf("unbalance: rho = [%.5f, %.5f, %.5f, %.5f], omega_ref_max = %.3f\n", model->rho[0], model->rho[1],
                    model->rho[2], model->rho[3], model->omega_ref_max);
    }
    const auto sets = generate_domain(c, domain, model, variants, common.jobs);
    for (const auto& d : sets) {
        const fs::path where = dir / to_string(d.variant);
        save_dataset(d, where);
        print_counts(d, where);
    }
    return kExitOk;
}

int cmd_train(const Common& common, const std::string& data, const std::string& target, bool da,
              const std::string& out) {
    RunConfig c = common.load();
    if (common.seed_opt->count()) c.train.seed = common.seed;
    if (da) c.train.da_enabled = true;
    c.validate();
    const Dataset source = load_dataset(data);
    std::optional<Dataset> tgt, th;
    if (!target.empty()) {
        tgt = load_dataset(target);
        th = healthy_subset(*tgt);
    }
    if (c.train.da_enabled && !th) throw ConfigError("--da needs --target");
    auto r = train(source, th ? &*th : nullptr, c.train, std::nullopt, [](std::size_t epoch, const EpochStats& s) {
        spdlog::info("epoch {}: ce {:.5f} mmd {:.4e} total {:.5f}", epoch, s.ce, s.mmd, s.total);
    });
    if (tgt) r.report.target = evaluate(r.params, r.normalizer, *tgt);
    const fs::path dir(out);
    save_checkpoint(r, c.train, dir);
    write_resolved(c, dir);
    json rep = {{"epochs", r.report.epochs.size()},
                {"best_epoch", r.report.best_epoch},
                {"stopped_early", r.report.stopped_early},
                {"source", evaluation_json(r.report.source)},
                {"target", r.report.target ? evaluation_json(*r.report.target) : json(nullptr)},
                {"wall_seconds", r.report.wall_seconds}};
    std::cout << rep.dump(2) << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& out) {
    const auto ck = load_checkpoint(checkpoint);
    const Dataset d = load_dataset(data);
    if (d.variant != ck.result.variant)
        throw ShapeError("dataset variant " + to_string(d.variant) + " does not match checkpoint variant " +
                         to_string(ck.result.variant));
    const auto e = evaluate(ck.result.params, ck.result.normalizer, d);
    const json j = evaluation_json(e);
    if (!out.empty()) container::write_json(out, j);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_experiment(const Common& common, const std::string& out) {
    RunConfig c = common.load();
    if (common.seed_opt->count()) c.seed = common.seed;
    const fs::path dir(out);
    write_resolved(c, dir);
    auto prepared = prepare_experiment_data(c, common.jobs);
    container::write_json(dir / "unbalance.json", unbalance_json(prepared.unbalance));
    const auto summary = run_experiment({Suite::CF, Suite::NIF, Suite::NIF_DA}, prepared.data, c.train, c.runs,
                                        c.experiment_seed, common.jobs);
    container::write_json(dir / "summary.json", to_json(summary));
    container::write_json(dir / "timings.json", timings_json(summary));
    std::printf("%-8s %18s %18s\n", "suite", "source acc (%)", "target acc (%)");
    for (const auto& s : summary.suites)
        std::printf("%-8s %10.2f +- %5.2f %10.2f +- %5.2f\n", to_string(s.suite).c_str(), 100 * s.source_mean,
                    100 * s.source_std, 100 * s.target_mean, 100 * s.target_std);
    return kExitOk;
}

int cmd_export(const std::string& checkpoint, const std::vector<std::string>& data, const std::string& out) {
    const auto ck = load_checkpoint(checkpoint);
    std::vector<Dataset> sets;
    for (const auto& p : data) sets.push_back(load_dataset(p));
    std::vector<const Dataset*> ptrs;
    for (const auto& d : sets) ptrs.push_back(&d);
    const auto f = export_features(ck.result.params, ck.result.normalizer, ptrs);
    save_features(f, out);
    std::printf("features: %zu x %zu -> %s\n", f.labels.size(), f.dim, out.c_str());
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    init_logging();
    CLI::App app{"Quadrotor propeller fault diagnosis: data generation, training and evaluation"};
    app.require_subcommand(1);

    Common common;
    std::string domain, variant, out, data, target, checkpoint;
    std::vector<std::string> datas;
    bool da = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON config file (defaults when omitted)")->check(CLI::ExistingFile);
        auto* seed = sub->add_option("--seed", common.seed, "Base seed override");
        sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
        return seed;
    };

    auto* gen = app.add_subcommand("gen", "Generate a dataset for one domain");
    auto* gen_seed = add_common(gen);
    gen->add_option("--domain", domain, "source or target")->required();
    gen->add_option("--variant", variant, "nif or cf (both when omitted)");
    auto* gen_pc = gen->add_option("--per-class", common.per_class, "Windows per class");
    gen->add_option("--out", out, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Train one model");
    auto* tr_seed = add_common(tr);
    tr->add_option("--data", data, "Source dataset directory")->required();
    tr->add_option("--target", target, "Target dataset directory (healthy windows feed DA; all are evaluated)");
    tr->add_flag("--da", da, "Enable domain adaptation");
    tr->add_option("--out", out, "Checkpoint directory")->required();

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    ev->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    ev->add_option("--data", data, "Dataset directory")->required();
    ev->add_option("--out", out, "Write the result JSON here as well");

    auto* ex = app.add_subcommand("experiment", "Run the CF / NIF / NIF+DA comparison");
    auto* ex_seed = add_common(ex);
    auto* ex_pc = ex->add_option("--per-class", common.per_class, "Windows per class");
    common.runs_opt = ex->add_option("--runs", common.runs, "Runs per suite")->check(CLI::PositiveNumber);
    ex->add_option("--out", out, "Output directory")->required();

    auto* exp = app.add_subcommand("export-features", "Export dense1 features of datasets");
    exp->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    exp->add_option("--data", datas, "Dataset directories")->required();
    exp->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) {
            common.per_class_opt = gen_pc;
            common.seed_opt = gen_seed;
            return cmd_gen(common, domain, variant, out);
        }
        if (tr->parsed()) {
            common.seed_opt = tr_seed;
            return cmd_train(common, data, target, da, out);
        }
        if (ev->parsed()) return cmd_eval(checkpoint, data, out);
        if (ex->parsed()) {
            common.per_class_opt = ex_pc;
            common.seed_opt = ex_seed;
            return cmd_experiment(common, out);
        }
        if (exp->parsed()) return cmd_export(checkpoint, datas, out);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e);
    }
    return kExitFailure;
}

}  // namespace qfd
