#include "qfd/nn/layers.hpp"

#include "qfd/error.hpp"
#include "qfd/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qfd::nn {

namespace {

template <typename T>
void transpose(std::span<const T> src, std::size_t rows, std::size_t cols, std::span<T> dst) {
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

std::string dims(std::size_t a, std::size_t b) { return std::to_string(a) + " vs " + std::to_string(b); }

}  // namespace

template <typename T>
void conv1d_forward(std::span<const T> x, std::size_t cin, std::size_t batch, std::size_t len,
                    std::span<const T> weight, std::span<const T> bias, std::size_t cout, std::vector<T>& cols,
                    std::span<T> y) {
    require(len >= kConvKernel, "conv1d: length axis " + std::to_string(len) + " shorter than kernel 3");
    const std::size_t lout = len - kConvKernel + 1;
    const std::size_t n = batch * lout;
    const std::size_t kdim = cin * kConvKernel;
    require(x.size() == cin * batch * len, "conv1d: input size mismatch on channel/batch/length axes");
    require(weight.size() == cout * kdim, "conv1d: weight size mismatch on out/in channel axes");
    require(bias.size() == cout, "conv1d: bias axis " + dims(bias.size(), cout));
    require(y.size() == cout * n, "conv1d: output size mismatch");

    cols.resize(kdim * n);
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t k = 0; k < kConvKernel; ++k) {
            T* row = cols.data() + (c * kConvKernel + k) * n;
            for (std::size_t b = 0; b < batch; ++b) {
                const T* src = x.data() + (c * batch + b) * len + k;
                std::copy(src, src + lout, row + b * lout);
            }
        }
    kernels::gemm(weight.data(), cols.data(), y.data(), cout, n, kdim, false);
    for (std::size_t o = 0; o < cout; ++o) {
        T* row = y.data() + o * n;
        const T bo = bias[o];
        for (std::size_t i = 0; i < n; ++i) row[i] += bo;
    }
}

template <typename T>
void conv1d_backward(std::span<const T> cols, std::span<const T> dy, std::size_t cin, std::size_t batch,
                     std::size_t len, std::span<const T> weight, std::size_t cout, std::span<T> dweight,
                     std::span<T> dbias, std::span<T> dx, std::vector<T>& scratch) {
    const std::size_t lout = len - kConvKernel + 1;
    const std::size_t n = batch * lout;
    const std::size_t kdim = cin * kConvKernel;
    require(dy.size() == cout * n, "conv1d_backward: output-gradient size mismatch");
    require(cols.size() == kdim * n, "conv1d_backward: im2col size mismatch");

    // dW[cout][kdim] += dy[cout][n] * cols^T[n][kdim]
    scratch.resize(std::max(n * kdim, kdim * n));
    transpose<T>(cols, kdim, n, scratch);
    kernels::gemm(dy.data(), scratch.data(), dweight.data(), cout, kdim, n, true);
    for (std::size_t o = 0; o < cout; ++o) {
        const T* row = dy.data() + o * n;
        T acc = T(0);
        for (std::size_t i = 0; i < n; ++i) acc += row[i];
        dbias[o] += acc;
    }
    if (dx.empty()) return;
    require(dx.size() == cin * batch * len, "conv1d_backward: input-gradient size mismatch");

    // dcols[kdim][n] = W^T[kdim][cout] * dy[cout][n], then col2im.
    std::vector<T> wt(kdim * cout);
    transpose<T>(weight, cout, kdim, wt);
    kernels::gemm(wt.data(), dy.data(), scratch.data(), kdim, n, cout, false);
    std::fill(dx.begin(), dx.end(), T(0));
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t k = 0; k < kConvKernel; ++k) {
            const T* row = scratch.data() + (c * kConvKernel + k) * n;
            for (std::size_t b = 0; b < batch; ++b) {
                T* dst = dx.data() + (c * batch + b) * len + k;
                const T* src = row + b * lout;
                for (std::size_t t = 0; t < lout; ++t) dst[t] += src[t];
            }
        }
}

template <typename T>
void maxpool1d_forward(std::span<const T> x, std::size_t rows, std::size_t len, std::span<T> y,
                       std::span<std::uint32_t> argmax) {
    require(len >= kPoolWidth, "maxpool1d: length axis " + std::to_string(len) + " shorter than pool width 2");
    const std::size_t lout = len / kPoolWidth;
    require(x.size() == rows * len, "maxpool1d: input size mismatch");
    require(y.size() == rows * lout && argmax.size() == rows * lout, "maxpool1d: output size mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * len;
        for (std::size_t t = 0; t < lout; ++t) {
            const std::size_t i0 = base + 2 * t;
            const std::size_t pick = x[i0 + 1] > x[i0] ? i0 + 1 : i0;
            y[r * lout + t] = x[pick];
            argmax[r * lout + t] = static_cast<std::uint32_t>(pick);
        }
    }
}

template <typename T>
void maxpool1d_backward(std::span<const T> dy, std::span<const std::uint32_t> argmax, std::span<T> dx) {
    require(dy.size() == argmax.size(), "maxpool1d_backward: gradient/argmax size mismatch");
    std::fill(dx.begin(), dx.end(), T(0));
    for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax[i]] += dy[i];
}

template <typename T>
void dense_forward(std::span<const T> x, std::size_t batch, std::size_t in, std::span<const T> weight,
                   std::span<const T> bias, std::size_t out, std::span<T> y, std::vector<T>& scratch) {
    require(x.size() == batch * in, "dense: input axis " + dims(x.size(), batch * in));
    require(weight.size() == out * in, "dense: weight size mismatch on out/in axes");
    require(bias.size() == out, "dense: bias axis " + dims(bias.size(), out));
    require(y.size() == batch * out, "dense: output size mismatch");
    scratch.resize(in * out);
    transpose<T>(weight, out, in, scratch);
    kernels::gemm(x.data(), scratch.data(), y.data(), batch, out, in, false);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < out; ++o) y[b * out + o] += bias[o];
}

template <typename T>
void dense_backward(std::span<const T> x, std::span<const T> dy, std::size_t batch, std::size_t in,
                    std::span<const T> weight, std::size_t out, std::span<T> dweight, std::span<T> dbias,
                    std::span<T> dx, std::vector<T>& scratch) {
    require(dy.size() == batch * out, "dense_backward: output-gradient size mismatch");
    scratch.resize(out * batch);
    transpose<T>(dy, batch, out, scratch);
    kernels::gemm(scratch.data(), x.data(), dweight.data(), out, in, batch, true);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < out; ++o) dbias[o] += dy[b * out + o];
    if (!dx.empty()) kernels::gemm(dy.data(), weight.data(), dx.data(), batch, in, out, false);
}

template <typename T>
void dropout_forward(std::span<T> x, double rate, Mode mode, std::mt19937_64& rng, std::vector<T>& mask) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InputDomainError("dropout rate " + std::to_string(rate) + " not in [0, 1)");
    if (mode == Mode::Eval) {
        mask.clear();
        return;
    }
    const T keep_scale = T(1.0 / (1.0 - rate));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mask.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask[i] = u(rng) < rate ? T(0) : keep_scale;
        x[i] *= mask[i];
    }
}

template <typename T>
void dropout_backward(std::span<T> grad, std::span<const T> mask) {
    if (mask.empty()) return;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= mask[i];
}

// --- single-sample API ---

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
    require(input.rank() == 2, "conv1d: input must be C_in x L");
    require(weight.rank() == 3 && weight.dim(2) == kConvKernel, "conv1d: weight must be C_out x C_in x 3");
    require(weight.dim(1) == input.dim(0),
            "conv1d: in-channel axis mismatch, input C_in " + dims(input.dim(0), weight.dim(1)) + " weight C_in");
    require(bias.size() == weight.dim(0), "conv1d: bias axis " + dims(bias.size(), weight.dim(0)) + " C_out");
    require(input.dim(1) >= kConvKernel, "conv1d: length axis shorter than kernel 3");
    const std::size_t cout = weight.dim(0), lout = input.dim(1) - 2;
    Tensor<T> out({cout, lout});
    std::vector<T> cols;
    conv1d_forward<T>(input.span(), input.dim(0), 1, input.dim(1), weight.span(), bias.span(), cout, cols, out.span());
    return out;
}

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& dout) {
    require(input.rank() == 2 && weight.rank() == 3, "conv1d_backward: bad ranks");
    require(weight.dim(1) == input.dim(0), "conv1d_backward: in-channel axis mismatch");
    const std::size_t cin = input.dim(0), len = input.dim(1), cout = weight.dim(0);
    require(dout.rank() == 2 && dout.dim(0) == cout && dout.dim(1) + 2 == len,
            "conv1d_backward: output-gradient must be C_out x (L-2)");
    // Rebuild the im2col matrix from a throwaway forward.
    std::vector<T> cols;
    Tensor<T> y({cout, len - 2});
    Tensor<T> zero_bias({cout});
    conv1d_forward<T>(input.span(), cin, 1, len, weight.span(), zero_bias.span(), cout, cols, y.span());
    Conv1dGrads<T> g{Tensor<T>({cin, len}), Tensor<T>(weight.shape()), Tensor<T>({cout})};
    std::vector<T> scratch;
    conv1d_backward<T>(cols, dout.span(), cin, 1, len, weight.span(), cout, g.weight.span(), g.bias.span(),
                       g.input.span(), scratch);
    return g;
}

template <typename T>
PoolResult<T> maxpool1d(const Tensor<T>& input) {
    require(input.rank() == 2, "maxpool1d: input must be C x L");
    const std::size_t c = input.dim(0), len = input.dim(1);
    if (len < kPoolWidth) throw ShapeError("maxpool1d: length axis " + std::to_string(len) + " < 2");
    PoolResult<T> r{Tensor<T>({c, len / 2}), std::vector<std::uint32_t>(c * (len / 2))};
    maxpool1d_forward<T>(input.span(), c, len, r.output.span(), r.argmax);
    return r;
}

template <typename T>
Tensor<T> maxpool1d_backward(const Tensor<T>& input, const PoolResult<T>& fwd, const Tensor<T>& dout) {
    Tensor<T> dx(input.shape());
    maxpool1d_backward<T>(dout.span(), fwd.argmax, dx.span());
    return dx;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
    require(weight.rank() == 2, "dense: weight must be out x in");
    const std::size_t in = weight.dim(1), out = weight.dim(0);
    const std::size_t batch = input.rank() == 2 ? input.dim(0) : 1;
    require(input.size() == batch * in, "dense: input axis does not match weight in-axis " + std::to_string(in));
    Tensor<T> y(input.rank() == 2 ? std::vector<std::size_t>{batch, out} : std::vector<std::size_t>{out});
    std::vector<T> scratch;
    dense_forward<T>(input.span(), batch, in, weight.span(), bias.span(), out, y.span(), scratch);
    return y;
}

template <typename T>
Tensor<T> relu(Tensor<T> x) {
    kernels::relu(x.span());
    return x;
}

template <typename T>
Tensor<T> dropout(Tensor<T> x, double rate, Mode mode, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<T> mask;
    dropout_forward<T>(x.span(), rate, mode, rng, mask);
    return x;
}

#define QFD_INSTANTIATE_LAYERS(T)                                                                                   \
    template void conv1d_forward<T>(std::span<const T>, std::size_t, std::size_t, std::size_t, std::span<const T>, \
                                    std::span<const T>, std::size_t, std::vector<T>&, std::span<T>);               \
    template void conv1d_backward<T>(std::span<const T>, std::span<const T>, std::size_t, std::size_t, std::size_t, \
                                     std::span<const T>, std::size_t, std::span<T>, std::span<T>, std::span<T>,     \
                                     std::vector<T>&);                                                             \
    template void maxpool1d_forward<T>(std::span<const T>, std::size_t, std::size_t, std::span<T>,                 \
                                       std::span<std::uint32_t>);                                                  \
    template void maxpool1d_backward<T>(std::span<const T>, std::span<const std::uint32_t>, std::span<T>);         \
    template void dense_forward<T>(std::span<const T>, std::size_t, std::size_t, std::span<const T>,               \
                                   std::span<const T>, std::size_t, std::span<T>, std::vector<T>&);                \
    template void dense_backward<T>(std::span<const T>, std::span<const T>, std::size_t, std::size_t,              \
                                    std::span<const T>, std::size_t, std::span<T>, std::span<T>, std::span<T>,      \
                                    std::vector<T>&);                                                              \
    template void dropout_forward<T>(std::span<T>, double, Mode, std::mt19937_64&, std::vector<T>&);                \
    template void dropout_backward<T>(std::span<T>, std::span<const T>);                                          \
    template Tensor<T> conv1d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                            \
    template Conv1dGrads<T> conv1d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
    template PoolResult<T> maxpool1d<T>(const Tensor<T>&);                                                         \
    template Tensor<T> maxpool1d_backward<T>(const Tensor<T>&, const PoolResult<T>&, const Tensor<T>&);            \
    template Tensor<T> dense<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                             \
    template Tensor<T> relu<T>(Tensor<T>);                                                                         \
    template Tensor<T> dropout<T>(Tensor<T>, double, Mode, std::uint64_t);

QFD_INSTANTIATE_LAYERS(float)
QFD_INSTANTIATE_LAYERS(double)

#undef QFD_INSTANTIATE_LAYERS

}  // namespace qfd::nn
