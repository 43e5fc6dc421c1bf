#include "qfd/nn/adam.hpp"

#include "qfd/error.hpp"
#include "qfd/nn/kernels.hpp"

#include <cmath>

namespace qfd::nn {

namespace {

kernels::AdamCoefficients coefficients(const AdamConfig& c, double lr, std::uint64_t t) {
    return {lr, c.beta1, c.beta2, c.eps, 1.0 - std::pow(c.beta1, double(t)), 1.0 - std::pow(c.beta2, double(t))};
}

}  // namespace

template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, double lr) {
    if (!(params.arch() == grads.arch()) || !(params.arch() == state.m.arch()))
        throw ShapeError("adam_step: parameter, gradient and moment shapes differ");
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (const auto& t : g)
        for (const T x : t.values)
            if (!std::isfinite(double(x))) throw TrainingError("adam_step: non-finite gradient in " + t.name);
    ++state.step;
    const auto c = coefficients(state.config, lr, state.step);
    for (std::size_t i = 0; i < p.size(); ++i) kernels::adam_update(p[i].values, g[i].values, m[i].values, v[i].values, c);
}

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t& step,
               const AdamConfig& config) {
    if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size())
        throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
    for (const T x : grads)
        if (!std::isfinite(double(x))) throw TrainingError("adam_step: non-finite gradient");
    ++step;
    kernels::adam_update(params, grads, m, v, coefficients(config, config.lr, step));
}

template void adam_step<float>(ModelParams<float>&, const ModelParams<float>&, AdamState<float>&, double);
template void adam_step<double>(ModelParams<double>&, const ModelParams<double>&, AdamState<double>&, double);
template void adam_step<float>(std::span<float>, std::span<const float>, std::span<float>, std::span<float>,
                               std::uint64_t&, const AdamConfig&);
template void adam_step<double>(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                                std::uint64_t&, const AdamConfig&);

}  // namespace qfd::nn
