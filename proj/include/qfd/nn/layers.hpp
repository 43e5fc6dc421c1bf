#pragma once

// Layer primitives. Batched activations use a channel-major [C][B][L] layout
// so a convolution over the whole batch is a single im2col + GEMM.

#include "qfd/nn/tensor.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qfd::nn {

inline constexpr std::size_t kConvKernel = 3;
inline constexpr std::size_t kPoolWidth = 2;

enum class Mode { Train, Eval };

// --- batched primitives --------------------------------------------------

// x: [cin][batch][len], weight: [cout][cin][3], y: [cout][batch][len-2].
// cols receives the im2col matrix [(cin*3)][batch*(len-2)] for the backward pass.
template <typename T>
void conv1d_forward(std::span<const T> x, std::size_t cin, std::size_t batch, std::size_t len,
                    std::span<const T> weight, std::span<const T> bias, std::size_t cout, std::vector<T>& cols,
                    std::span<T> y);

// Accumulates into dweight/dbias; overwrites dx unless it is empty.
template <typename T>
void conv1d_backward(std::span<const T> cols, std::span<const T> dy, std::size_t cin, std::size_t batch,
                     std::size_t len, std::span<const T> weight, std::size_t cout, std::span<T> dweight,
                     std::span<T> dbias, std::span<T> dx, std::vector<T>& scratch);

// Width-2 stride-2 max-pool over each of `rows` contiguous rows of length len.
// argmax receives the flat index of each selected input (first index on ties).
template <typename T>
void maxpool1d_forward(std::span<const T> x, std::size_t rows, std::size_t len, std::span<T> y,
                       std::span<std::uint32_t> argmax);

template <typename T>
void maxpool1d_backward(std::span<const T> dy, std::span<const std::uint32_t> argmax, std::span<T> dx);

// y[batch][out] = x[batch][in] * W^T + b with W stored [out][in].
template <typename T>
void dense_forward(std::span<const T> x, std::size_t batch, std::size_t in, std::span<const T> weight,
                   std::span<const T> bias, std::size_t out, std::span<T> y, std::vector<T>& scratch);

template <typename T>
void dense_backward(std::span<const T> x, std::span<const T> dy, std::size_t batch, std::size_t in,
                    std::span<const T> weight, std::size_t out, std::span<T> dweight, std::span<T> dbias,
                    std::span<T> dx, std::vector<T>& scratch);

// Inverted dropout, in place. In Train mode each element is zeroed with
// probability `rate` and survivors are scaled by 1/(1-rate); `mask` keeps the
// per-element multiplier. Eval mode leaves x untouched and clears the mask.
template <typename T>
void dropout_forward(std::span<T> x, double rate, Mode mode, std::mt19937_64& rng, std::vector<T>& mask);

// grad *= mask (no-op when the mask is empty).
template <typename T>
void dropout_backward(std::span<T> grad, std::span<const T> mask);

// --- single-sample convenience API ---------------------------------------

template <typename T>
struct Conv1dGrads {
    Tensor<T> input;   // C_in x L
    Tensor<T> weight;  // C_out x C_in x 3
    Tensor<T> bias;    // C_out
};

// input: C_in x L, weight: C_out x C_in x 3, bias: C_out -> C_out x (L-2).
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& dout);

template <typename T>
struct PoolResult {
    Tensor<T> output;
    std::vector<std::uint32_t> argmax;
};

// input: C x L -> C x floor(L/2); odd trailing element dropped.
template <typename T>
PoolResult<T> maxpool1d(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool1d_backward(const Tensor<T>& input, const PoolResult<T>& fwd, const Tensor<T>& dout);

// input: B x in (or a vector of length in), weight: out x in, bias: out.
template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> relu(Tensor<T> x);

template <typename T>
Tensor<T> dropout(Tensor<T> x, double rate, Mode mode, std::uint64_t seed);

}  // namespace qfd::nn
