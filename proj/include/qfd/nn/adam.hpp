#pragma once

#include "qfd/nn/model.hpp"

#include <cstdint>
#include <span>

namespace qfd::nn {

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    bool operator==(const AdamConfig&) const = default;
};

template <typename T>
struct AdamState {
    ModelParams<T> m;
    ModelParams<T> v;
    std::uint64_t step = 0;
    AdamConfig config;

    static AdamState create(const Architecture& arch, const AdamConfig& config = {}) {
        return {ModelParams<T>::zeros(arch), ModelParams<T>::zeros(arch), 0, config};
    }
    bool operator==(const AdamState&) const = default;
};

// Bias-corrected Adam update of every parameter tensor. Throws TrainingError
// naming the tensor if any gradient is non-finite; params are untouched then.
template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, double lr);

// Same update rule on a single flat block. `step` is the count before this
// update and is incremented.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t& step,
               const AdamConfig& config);

}  // namespace qfd::nn
