#pragma once

// Finite-difference verification of the analytic backward pass.
//
// For each parameter tensor a handful of randomly chosen entries are probed
// with central differences. The tensor's error is the norm-wise relative
// error  |g_analytic - g_numeric| / max(|g_analytic|, |g_numeric|, floor)
// over its probes. Probes whose one-sided differences disagree by more than 5% are
// treated as sitting on a ReLU/max-pool kink and are re-drawn.

#include "qfd/nn/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qfd::nn {

// Computes the scalar loss at `params`; when `grads` is non-null it must also
// write the analytic gradient into it (grads arrives zeroed).
template <typename T>
using LossFunction = std::function<double(const ModelParams<T>& params, ModelParams<T>* grads)>;

template <typename T>
struct GradCheckDefaults;
template <>
struct GradCheckDefaults<float> {
    static constexpr double step = 1e-3;
    static constexpr double tolerance = 1e-2;
};
template <>
struct GradCheckDefaults<double> {
    static constexpr double step = 1e-6;
    static constexpr double tolerance = 1e-4;
};

struct GradCheckOptions {
    std::size_t probes_per_tensor = 8;
    double step = 0.0;       // 0 -> GradCheckDefaults<T>::step
    double tolerance = 0.0;  // 0 -> GradCheckDefaults<T>::tolerance
    double floor = 1e-6;
    std::uint64_t seed = 7;
};

struct TensorCheck {
    std::string name;
    double rel_error = 0.0;
    std::size_t probes = 0;
    std::size_t kinks_skipped = 0;
};

struct GradCheckReport {
    std::vector<TensorCheck> tensors;
    double max_rel_error = 0.0;
    std::string worst_tensor;
    double tolerance = 0.0;
    bool passed() const { return max_rel_error <= tolerance; }
    // Names of tensors over tolerance.
    std::vector<std::string> failing() const;
};

// Optional hook applied to the analytic gradient before comparison. Used to
// confirm that the checker catches a corrupted gradient.
template <typename T>
using GradientMutator = std::function<void(ModelParams<T>& grads)>;

template <typename T>
GradCheckReport grad_check(const ModelParams<T>& params, const LossFunction<T>& loss, const GradCheckOptions& opts = {},
                           const GradientMutator<T>& mutate = {});

// Throws GradientCheckError naming the first failing tensor.
void require_passed(const GradCheckReport& report);

// Loss builders over fixed inputs ([batch][channels][len] windows). Dropout
// runs in train mode with a mask re-seeded on every evaluation, so the loss is
// deterministic in the parameters.
template <typename T>
LossFunction<T> make_ce_loss(std::vector<T> inputs, std::vector<int> classes, double dropout, std::uint64_t seed);

template <typename T>
LossFunction<T> make_mmd_loss(std::vector<T> source, std::size_t ns, std::vector<T> target, std::size_t nt);

template <typename T>
LossFunction<T> make_combined_loss(std::vector<T> inputs, std::vector<int> classes, std::vector<T> source,
                                   std::size_t ns, std::vector<T> target, std::size_t nt, double lambda,
                                   double dropout, std::uint64_t seed);

}  // namespace qfd::nn
