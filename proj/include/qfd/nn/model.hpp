#pragma once

// The fault-classification DCNN: four (conv k=3 -> ReLU -> maxpool 2) blocks,
// flatten, dense -> ReLU -> dropout, dense -> ReLU -> dropout, linear output.
// The post-ReLU, pre-dropout activations of the first dense layer are the
// "features" used for domain alignment and export.

#include "qfd/nn/layers.hpp"
#include "qfd/nn/tensor.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qfd::nn {

struct Architecture {
    std::size_t in_channels = 7;
    std::size_t input_len = 80;
    std::size_t filters = 64;
    std::size_t conv_blocks = 4;
    std::size_t hidden = 128;
    std::size_t classes = 5;

    // Length after every conv and pool: [input_len, conv1, pool1, conv2, pool2, ...].
    std::vector<std::size_t> length_chain() const;
    std::size_t flat_dim() const;
    // Throws ShapeError if any stage would have zero or negative length.
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

template <typename T>
struct DenseParams {
    Tensor<T> weight;  // out x in
    Tensor<T> bias;    // out
    bool operator==(const DenseParams&) const = default;
};

template <typename T>
struct ConvParams {
    Tensor<T> weight;  // out x in x 3
    Tensor<T> bias;    // out
    bool operator==(const ConvParams&) const = default;
};

template <typename T>
struct NamedTensor {
    std::string name;
    std::span<T> values;
};

template <typename T>
class ModelParams {
public:
    ModelParams() = default;

    static ModelParams zeros(const Architecture& arch);
    // Fan-in scaled uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
    static ModelParams initialize(const Architecture& arch, std::uint64_t seed);

    const Architecture& arch() const noexcept { return arch_; }

    std::vector<ConvParams<T>> conv;
    DenseParams<T> dense1, dense2, output;

    // Fixed order: conv1.weight, conv1.bias, ..., dense1.*, dense2.*, output.*
    std::vector<NamedTensor<T>> tensors();
    std::vector<NamedTensor<const T>> tensors() const;
    std::size_t parameter_count() const;
    void set_zero();

    template <typename U>
    ModelParams<U> cast() const;

    bool operator==(const ModelParams&) const = default;

private:
    template <typename U>
    friend class ModelParams;
    Architecture arch_;
};

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
    auto out = ModelParams<U>::zeros(arch_);
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < src.size(); ++i)
        for (std::size_t j = 0; j < src[i].values.size(); ++j) dst[i].values[j] = U(src[i].values[j]);
    return out;
}

struct ForwardOptions {
    Mode mode = Mode::Eval;
    double dropout = 0.0;
    std::mt19937_64* rng = nullptr;  // required in Train mode with dropout > 0
    bool features_only = false;      // stop after the first dense layer
};

// Activations kept for the backward pass. Reusable across calls.
template <typename T>
struct ForwardPass {
    std::size_t batch = 0;
    bool features_only = false;
    std::vector<std::vector<T>> block_input;  // [C][B][L] per block
    std::vector<std::vector<T>> cols;
    std::vector<std::vector<T>> conv_out;  // post-ReLU
    std::vector<std::vector<std::uint32_t>> pool_arg;
    std::vector<T> pooled_last;
    std::vector<T> flat;      // [B][flat_dim]
    std::vector<T> features;  // dense1 post-ReLU, pre-dropout [B][hidden]
    std::vector<T> d1;        // after dropout
    std::vector<T> mask1;
    std::vector<T> h2;  // dense2 post-ReLU, pre-dropout
    std::vector<T> d2;
    std::vector<T> mask2;
    std::vector<T> logits;  // [B][classes]
    std::vector<T> scratch;
};

// input is [batch][in_channels][input_len] (window-major, as stored in datasets).
template <typename T>
void model_forward(const ModelParams<T>& params, std::span<const T> input, std::size_t batch,
                   const ForwardOptions& opts, ForwardPass<T>& pass);

// Accumulates parameter gradients into grads. dlogits [B][classes] may be
// empty (features-only objectives); dfeatures [B][hidden] may be empty.
template <typename T>
void model_backward(const ModelParams<T>& params, const ForwardPass<T>& pass, std::span<const T> dlogits,
                    std::span<const T> dfeatures, ModelParams<T>& grads);

}  // namespace qfd::nn
