#include "qfd/nn/grad_check.hpp"

#include "qfd/error.hpp"
#include "qfd/nn/loss.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace qfd::nn {

std::vector<std::string> GradCheckReport::failing() const {
    std::vector<std::string> out;
    for (const auto& t : tensors)
        if (t.rel_error > tolerance) out.push_back(t.name);
    return out;
}

void require_passed(const GradCheckReport& report) {
    if (report.passed()) return;
    const auto bad = report.failing();
    std::ostringstream os;
    os << "gradient check failed at " << bad.front() << " (relative error " << report.max_rel_error << " > "
       << report.tolerance << ")";
    throw GradientCheckError(os.str(), bad.front());
}

template <typename T>
GradCheckReport grad_check(const ModelParams<T>& params, const LossFunction<T>& loss, const GradCheckOptions& opts,
                           const GradientMutator<T>& mutate) {
    const double h = opts.step > 0 ? opts.step : GradCheckDefaults<T>::step;
    GradCheckReport report;
    report.tolerance = opts.tolerance > 0 ? opts.tolerance : GradCheckDefaults<T>::tolerance;

    auto grads = ModelParams<T>::zeros(params.arch());
    loss(params, &grads);
    if (mutate) mutate(grads);

    ModelParams<T> probe = params;
    auto probe_tensors = probe.tensors();
    const auto grad_tensors = grads.tensors();
    std::mt19937_64 rng(opts.seed);

    for (std::size_t ti = 0; ti < probe_tensors.size(); ++ti) {
        auto values = probe_tensors[ti].values;
        TensorCheck check{probe_tensors[ti].name};
        double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
        std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
        const std::size_t wanted = std::min(opts.probes_per_tensor, values.size());
        std::size_t attempts = 0;
        while (check.probes < wanted && attempts < 20 * wanted) {
            ++attempts;
            const std::size_t idx = pick(rng);
            const T original = values[idx];
            const double base = loss(probe, nullptr);
            values[idx] = T(double(original) + h);
            const double plus = loss(probe, nullptr);
            values[idx] = T(double(original) - h);
            const double minus = loss(probe, nullptr);
            values[idx] = original;
            // The perturbation actually applied after rounding to T.
            const double hp = double(T(double(original) + h)) - double(original);
            const double hm = double(original) - double(T(double(original) - h));
            const double fwd = (plus - base) / hp, bwd = (base - minus) / hm;
            const double scale = std::max({std::abs(fwd), std::abs(bwd), 1e-3});
            if (std::abs(fwd - bwd) > 0.05 * scale) {
                ++check.kinks_skipped;
                continue;
            }
            const double numeric = (plus - minus) / (hp + hm);
            const double analytic = double(grad_tensors[ti].values[idx]);
            diff2 += (analytic - numeric) * (analytic - numeric);
            a2 += analytic * analytic;
            n2 += numeric * numeric;
            ++check.probes;
        }
        const double denom = std::max({std::sqrt(a2), std::sqrt(n2), opts.floor});
        check.rel_error = std::sqrt(diff2) / denom;
        if (report.worst_tensor.empty() || check.rel_error > report.max_rel_error) {
            report.max_rel_error = check.rel_error;
            report.worst_tensor = check.name;
        }
        report.tensors.push_back(check);
    }
    return report;
}

namespace {

template <typename T>
double ce_term(const ModelParams<T>& params, const std::vector<T>& inputs, const std::vector<int>& classes,
               double dropout, std::uint64_t seed, ModelParams<T>* grads) {
    ForwardPass<T> pass;
    std::mt19937_64 rng(seed);
    ForwardOptions opts{Mode::Train, dropout, &rng, false};
    model_forward<T>(params, inputs, classes.size(), opts, pass);
    std::vector<T> dlogits(pass.logits.size());
    const double value = softmax_cross_entropy<T>(pass.logits, classes, params.arch().classes, dlogits);
    if (grads) model_backward<T>(params, pass, dlogits, {}, *grads);
    return value;
}

template <typename T>
double mmd_term(const ModelParams<T>& params, const std::vector<T>& source, std::size_t ns,
                const std::vector<T>& target, std::size_t nt, double weight, ModelParams<T>* grads) {
    ForwardPass<T> ps, pt;
    ForwardOptions opts{Mode::Eval, 0.0, nullptr, true};
    model_forward<T>(params, source, ns, opts, ps);
    model_forward<T>(params, target, nt, opts, pt);
    const std::size_t dim = params.arch().hidden;
    std::vector<T> ds(ns * dim), dt(nt * dim);
    const double value = mmd_linear<T>(ps.features, ns, pt.features, nt, dim, ds, dt);
    if (grads) {
        for (auto& v : ds) v = T(double(v) * weight);
        for (auto& v : dt) v = T(double(v) * weight);
        model_backward<T>(params, ps, {}, ds, *grads);
        model_backward<T>(params, pt, {}, dt, *grads);
    }
    return weight * value;
}

}  // namespace

template <typename T>
LossFunction<T> make_ce_loss(std::vector<T> inputs, std::vector<int> classes, double dropout, std::uint64_t seed) {
    return [inputs = std::move(inputs), classes = std::move(classes), dropout, seed](const ModelParams<T>& p,
                                                                                     ModelParams<T>* g) {
        return ce_term<T>(p, inputs, classes, dropout, seed, g);
    };
}

template <typename T>
LossFunction<T> make_mmd_loss(std::vector<T> source, std::size_t ns, std::vector<T> target, std::size_t nt) {
    return [source = std::move(source), ns, target = std::move(target), nt](const ModelParams<T>& p,
                                                                            ModelParams<T>* g) {
        return mmd_term<T>(p, source, ns, target, nt, 1.0, g);
    };
}

template <typename T>
LossFunction<T> make_combined_loss(std::vector<T> inputs, std::vector<int> classes, std::vector<T> source,
                                   std::size_t ns, std::vector<T> target, std::size_t nt, double lambda,
                                   double dropout, std::uint64_t seed) {
    return [=](const ModelParams<T>& p, ModelParams<T>* g) {
        return ce_term<T>(p, inputs, classes, dropout, seed, g) + mmd_term<T>(p, source, ns, target, nt, lambda, g);
    };
}

#define QFD_INSTANTIATE_GC(T)                                                                                        \
    template GradCheckReport grad_check<T>(const ModelParams<T>&, const LossFunction<T>&, const GradCheckOptions&,   \
                                           const GradientMutator<T>&);                                              \
    template LossFunction<T> make_ce_loss<T>(std::vector<T>, std::vector<int>, double, std::uint64_t);               \
    template LossFunction<T> make_mmd_loss<T>(std::vector<T>, std::size_t, std::vector<T>, std::size_t);             \
    template LossFunction<T> make_combined_loss<T>(std::vector<T>, std::vector<int>, std::vector<T>, std::size_t,    \
                                                   std::vector<T>, std::size_t, double, double, std::uint64_t);

QFD_INSTANTIATE_GC(float)
QFD_INSTANTIATE_GC(double)

#undef QFD_INSTANTIATE_GC

}  // namespace qfd::nn
