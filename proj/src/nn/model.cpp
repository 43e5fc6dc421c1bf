#include "qfd/nn/model.hpp"

#include "qfd/error.hpp"
#include "qfd/nn/kernels.hpp"

#include <cmath>
#include <string>

namespace qfd::nn {

std::vector<std::size_t> Architecture::length_chain() const {
    std::vector<std::size_t> chain{input_len};
    std::size_t len = input_len;
    for (std::size_t b = 0; b < conv_blocks; ++b) {
        if (len < kConvKernel) throw ShapeError("architecture: block " + std::to_string(b + 1) + " conv input length " +
                                                std::to_string(len) + " < 3");
        len -= kConvKernel - 1;
        chain.push_back(len);
        if (len < kPoolWidth) throw ShapeError("architecture: block " + std::to_string(b + 1) + " pool input length " +
                                               std::to_string(len) + " < 2");
        len /= kPoolWidth;
        chain.push_back(len);
    }
    return chain;
}

std::size_t Architecture::flat_dim() const { return length_chain().back() * (conv_blocks ? filters : in_channels); }

void Architecture::validate() const {
    if (in_channels == 0 || filters == 0 || hidden == 0 || classes == 0 || conv_blocks == 0)
        throw ShapeError("architecture: channel, filter, hidden and class counts must be positive");
    (void)length_chain();
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const Architecture& arch) {
    arch.validate();
    ModelParams p;
    p.arch_ = arch;
    std::size_t cin = arch.in_channels;
    for (std::size_t b = 0; b < arch.conv_blocks; ++b) {
        p.conv.push_back({Tensor<T>({arch.filters, cin, kConvKernel}), Tensor<T>({arch.filters})});
        cin = arch.filters;
    }
    p.dense1 = {Tensor<T>({arch.hidden, arch.flat_dim()}), Tensor<T>({arch.hidden})};
    p.dense2 = {Tensor<T>({arch.hidden, arch.hidden}), Tensor<T>({arch.hidden})};
    p.output = {Tensor<T>({arch.classes, arch.hidden}), Tensor<T>({arch.classes})};
    return p;
}

template <typename T>
ModelParams<T> ModelParams<T>::initialize(const Architecture& arch, std::uint64_t seed) {
    auto p = zeros(arch);
    std::mt19937_64 rng(seed);
    auto fill = [&](Tensor<T>& w, std::size_t fan_in) {
        const double limit = std::sqrt(6.0 / double(fan_in));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (auto& v : w.values()) v = T(u(rng));
    };
    for (auto& c : p.conv) fill(c.weight, c.weight.dim(1) * kConvKernel);
    fill(p.dense1.weight, p.dense1.weight.dim(1));
    fill(p.dense2.weight, p.dense2.weight.dim(1));
    fill(p.output.weight, p.output.weight.dim(1));
    return p;
}

template <typename T>
std::vector<NamedTensor<T>> ModelParams<T>::tensors() {
    std::vector<NamedTensor<T>> out;
    for (std::size_t b = 0; b < conv.size(); ++b) {
        const std::string base = "conv" + std::to_string(b + 1);
        out.push_back({base + ".weight", conv[b].weight.span()});
        out.push_back({base + ".bias", conv[b].bias.span()});
    }
    out.push_back({"dense1.weight", dense1.weight.span()});
    out.push_back({"dense1.bias", dense1.bias.span()});
    out.push_back({"dense2.weight", dense2.weight.span()});
    out.push_back({"dense2.bias", dense2.bias.span()});
    out.push_back({"output.weight", output.weight.span()});
    out.push_back({"output.bias", output.bias.span()});
    return out;
}

template <typename T>
std::vector<NamedTensor<const T>> ModelParams<T>::tensors() const {
    std::vector<NamedTensor<const T>> out;
    for (auto& t : const_cast<ModelParams*>(this)->tensors()) out.push_back({t.name, t.values});
    return out;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += t.values.size();
    return n;
}

template <typename T>
void ModelParams<T>::set_zero() {
    for (auto& t : tensors()) std::fill(t.values.begin(), t.values.end(), T(0));
}

template <typename T>
void model_forward(const ModelParams<T>& params, std::span<const T> input, std::size_t batch,
                   const ForwardOptions& opts, ForwardPass<T>& pass) {
    const auto& arch = params.arch();
    const auto chain = arch.length_chain();
    if (batch == 0) throw ShapeError("model_forward: empty batch");
    if (input.size() != batch * arch.in_channels * arch.input_len)
        throw ShapeError("model_forward: input has " + std::to_string(input.size()) + " values, expected batch " +
                         std::to_string(batch) + " x channels " + std::to_string(arch.in_channels) + " x length " +
                         std::to_string(arch.input_len));
    if (opts.mode == Mode::Train && opts.dropout > 0.0 && !opts.rng)
        throw InputDomainError("model_forward: train-mode dropout needs an rng");

    const std::size_t nb = arch.conv_blocks;
    pass.batch = batch;
    pass.features_only = opts.features_only;
    pass.block_input.resize(nb);
    pass.cols.resize(nb);
    pass.conv_out.resize(nb);
    pass.pool_arg.resize(nb);

    // [B][C][L] -> [C][B][L]
    {
        auto& x = pass.block_input[0];
        const std::size_t c = arch.in_channels, len = arch.input_len;
        x.resize(c * batch * len);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t ch = 0; ch < c; ++ch) {
                const T* src = input.data() + (b * c + ch) * len;
                std::copy(src, src + len, x.data() + (ch * batch + b) * len);
            }
    }

    std::size_t cin = arch.in_channels;
    for (std::size_t blk = 0; blk < nb; ++blk) {
        const std::size_t len = chain[2 * blk], lconv = chain[2 * blk + 1], lpool = chain[2 * blk + 2];
        const auto& cp = params.conv[blk];
        auto& y = pass.conv_out[blk];
        y.resize(arch.filters * batch * lconv);
        conv1d_forward<T>(pass.block_input[blk], cin, batch, len, cp.weight.span(), cp.bias.span(), arch.filters,
                          pass.cols[blk], y);
        kernels::relu(std::span<T>(y));
        auto& pooled = blk + 1 < nb ? pass.block_input[blk + 1] : pass.pooled_last;
        pooled.resize(arch.filters * batch * lpool);
        pass.pool_arg[blk].resize(pooled.size());
        maxpool1d_forward<T>(y, arch.filters * batch, lconv, pooled, pass.pool_arg[blk]);
        cin = arch.filters;
    }

    // [C][B][L] -> [B][C*L]
    const std::size_t lf = chain.back(), flat_dim = arch.flat_dim();
    pass.flat.resize(batch * flat_dim);
    for (std::size_t c = 0; c < arch.filters; ++c)
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t t = 0; t < lf; ++t)
                pass.flat[b * flat_dim + c * lf + t] = pass.pooled_last[(c * batch + b) * lf + t];

    const std::size_t h = arch.hidden;
    pass.features.resize(batch * h);
    dense_forward<T>(pass.flat, batch, flat_dim, params.dense1.weight.span(), params.dense1.bias.span(), h,
                     pass.features, pass.scratch);
    kernels::relu(std::span<T>(pass.features));
    if (opts.features_only) return;

    std::mt19937_64 dummy;
    std::mt19937_64& rng = opts.rng ? *opts.rng : dummy;
    pass.d1 = pass.features;
    dropout_forward<T>(pass.d1, opts.dropout, opts.mode, rng, pass.mask1);
    pass.h2.resize(batch * h);
    dense_forward<T>(pass.d1, batch, h, params.dense2.weight.span(), params.dense2.bias.span(), h, pass.h2,
                     pass.scratch);
    kernels::relu(std::span<T>(pass.h2));
    pass.d2 = pass.h2;
    dropout_forward<T>(pass.d2, opts.dropout, opts.mode, rng, pass.mask2);
    pass.logits.resize(batch * arch.classes);
    dense_forward<T>(pass.d2, batch, h, params.output.weight.span(), params.output.bias.span(), arch.classes,
                     pass.logits, pass.scratch);
}

template <typename T>
void model_backward(const ModelParams<T>& params, const ForwardPass<T>& pass, std::span<const T> dlogits,
                    std::span<const T> dfeatures, ModelParams<T>& grads) {
    const auto& arch = params.arch();
    const auto chain = arch.length_chain();
    const std::size_t batch = pass.batch, h = arch.hidden, flat_dim = arch.flat_dim();
    if (!dlogits.empty() && pass.features_only)
        throw ShapeError("model_backward: logit gradient given for a features-only forward pass");
    if (!dlogits.empty() && dlogits.size() != batch * arch.classes)
        throw ShapeError("model_backward: logit gradient shape mismatch");
    if (!dfeatures.empty() && dfeatures.size() != batch * h)
        throw ShapeError("model_backward: feature gradient shape mismatch");

    std::vector<T> scratch;
    std::vector<T> dh1(batch * h, T(0));
    if (!dlogits.empty()) {
        std::vector<T> dd2(batch * h), dd1(batch * h);
        dense_backward<T>(pass.d2, dlogits, batch, h, params.output.weight.span(), arch.classes,
                          grads.output.weight.span(), grads.output.bias.span(), dd2, scratch);
        dropout_backward<T>(dd2, pass.mask2);
        kernels::relu_backward(std::span<const T>(pass.h2), std::span<T>(dd2));
        dense_backward<T>(pass.d1, dd2, batch, h, params.dense2.weight.span(), h, grads.dense2.weight.span(),
                          grads.dense2.bias.span(), dd1, scratch);
        dropout_backward<T>(dd1, pass.mask1);
        dh1 = std::move(dd1);
    }
    if (!dfeatures.empty())
        for (std::size_t i = 0; i < dh1.size(); ++i) dh1[i] += dfeatures[i];
    kernels::relu_backward(std::span<const T>(pass.features), std::span<T>(dh1));

    std::vector<T> dflat(batch * flat_dim);
    dense_backward<T>(pass.flat, dh1, batch, flat_dim, params.dense1.weight.span(), h, grads.dense1.weight.span(),
                      grads.dense1.bias.span(), dflat, scratch);

    const std::size_t lf = chain.back();
    std::vector<T> dpooled(arch.filters * batch * lf);
    for (std::size_t c = 0; c < arch.filters; ++c)
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t t = 0; t < lf; ++t)
                dpooled[(c * batch + b) * lf + t] = dflat[b * flat_dim + c * lf + t];

    std::vector<T> dconv, dx;
    for (std::size_t blk = arch.conv_blocks; blk-- > 0;) {
        const std::size_t len = chain[2 * blk], lconv = chain[2 * blk + 1];
        const std::size_t cin = blk == 0 ? arch.in_channels : arch.filters;
        dconv.resize(arch.filters * batch * lconv);
        maxpool1d_backward<T>(dpooled, pass.pool_arg[blk], dconv);
        kernels::relu_backward(std::span<const T>(pass.conv_out[blk]), std::span<T>(dconv));
        if (blk > 0)
            dx.resize(cin * batch * len);
        else
            dx.clear();
        conv1d_backward<T>(pass.cols[blk], dconv, cin, batch, len, params.conv[blk].weight.span(), arch.filters,
                           grads.conv[blk].weight.span(), grads.conv[blk].bias.span(), dx, scratch);
        std::swap(dpooled, dx);
    }
}

template class ModelParams<float>;
template class ModelParams<double>;
template void model_forward<float>(const ModelParams<float>&, std::span<const float>, std::size_t,
                                   const ForwardOptions&, ForwardPass<float>&);
template void model_forward<double>(const ModelParams<double>&, std::span<const double>, std::size_t,
                                    const ForwardOptions&, ForwardPass<double>&);
template void model_backward<float>(const ModelParams<float>&, const ForwardPass<float>&, std::span<const float>,
                                    std::span<const float>, ModelParams<float>&);
template void model_backward<double>(const ModelParams<double>&, const ForwardPass<double>&, std::span<const double>,
                                     std::span<const double>, ModelParams<double>&);

}  // namespace qfd::nn
