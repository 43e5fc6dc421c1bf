#include "qfd/nn/loss.hpp"

#include "qfd/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qfd::nn {

template <typename T>
void softmax(std::span<const T> logits, std::span<T> probs) {
    const T peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double e = std::exp(double(logits[i] - peak));
        probs[i] = T(e);
        total += e;
    }
    for (auto& p : probs) p = T(double(p) / total);
}

template <typename T>
double cross_entropy(std::span<const T> target, std::span<const T> predicted) {
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
        if (target[i] != T(0)) loss -= double(target[i]) * std::log(std::max(double(predicted[i]), kLogClamp));
    return loss;
}

template <typename T>
double softmax_cross_entropy(std::span<const T> logits, std::span<const int> classes, std::size_t num_classes,
                             std::span<T> dlogits) {
    const std::size_t batch = classes.size();
    if (logits.size() != batch * num_classes) throw ShapeError("softmax_cross_entropy: logits/labels batch mismatch");
    std::vector<T> q(num_classes);
    double total = 0.0;
    const double inv_batch = 1.0 / double(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const auto row = logits.subspan(b * num_classes, num_classes);
        softmax<T>(row, q);
        const int c = classes[b];
        if (c < 0 || std::size_t(c) >= num_classes) throw InputDomainError("class index out of range");
        total -= std::log(std::max(double(q[c]), kLogClamp));
        if (!dlogits.empty())
            for (std::size_t j = 0; j < num_classes; ++j)
                dlogits[b * num_classes + j] = T((double(q[j]) - (int(j) == c ? 1.0 : 0.0)) * inv_batch);
    }
    return total * inv_batch;
}

template <typename T>
double mmd_linear(std::span<const T> source, std::size_t ns, std::span<const T> target, std::size_t nt,
                  std::size_t dim, std::span<T> dsource, std::span<T> dtarget) {
    if (ns == 0 || nt == 0) throw InputDomainError("mmd_linear: empty feature set");
    if (source.size() != ns * dim || target.size() != nt * dim) throw ShapeError("mmd_linear: feature shape mismatch");
    std::vector<double> diff(dim, 0.0);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t d = 0; d < dim; ++d) diff[d] += double(source[i * dim + d]);
    for (auto& v : diff) v /= double(ns);
    std::vector<double> mt(dim, 0.0);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t d = 0; d < dim; ++d) mt[d] += double(target[i * dim + d]);
    double value = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        diff[d] -= mt[d] / double(nt);
        value += diff[d] * diff[d];
    }
    if (!dsource.empty())
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t d = 0; d < dim; ++d) dsource[i * dim + d] = T(2.0 * diff[d] / double(ns));
    if (!dtarget.empty())
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t d = 0; d < dim; ++d) dtarget[i * dim + d] = T(-2.0 * diff[d] / double(nt));
    return value;
}

template <typename T>
double mmd_rbf(std::span<const T> source, std::size_t ns, std::span<const T> target, std::size_t nt, std::size_t dim,
               double bandwidth, std::span<T> dsource, std::span<T> dtarget) {
    if (ns < 2 || nt < 2) throw InputDomainError("mmd_rbf: needs at least two samples per side");
    if (!(bandwidth > 0.0)) throw InputDomainError("mmd_rbf: bandwidth must be positive");
    if (source.size() != ns * dim || target.size() != nt * dim) throw ShapeError("mmd_rbf: feature shape mismatch");
    const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    std::vector<double> gs(ns * dim, 0.0), gt(nt * dim, 0.0);

    // Accumulates w * k(x, y) and its gradients w.r.t. x (into gx) and y (into gy).
    auto pair = [&](const T* x, const T* y, double w, double* gx, double* gy) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double e = double(x[d]) - double(y[d]);
            d2 += e * e;
        }
        const double k = std::exp(-d2 * inv2s2);
        const double coef = -2.0 * inv2s2 * w * k;
        for (std::size_t d = 0; d < dim; ++d) {
            const double e = double(x[d]) - double(y[d]);
            gx[d] += coef * e;
            gy[d] -= coef * e;
        }
        return w * k;
    };

    double value = 0.0;
    const double wss = 1.0 / double(ns * (ns - 1));
    const double wtt = 1.0 / double(nt * (nt - 1));
    const double wst = -2.0 / double(ns * nt);
    // Off-diagonal pairs are visited once and counted twice.
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = i + 1; j < ns; ++j)
            value += pair(&source[i * dim], &source[j * dim], 2.0 * wss, &gs[i * dim], &gs[j * dim]);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = i + 1; j < nt; ++j)
            value += pair(&target[i * dim], &target[j * dim], 2.0 * wtt, &gt[i * dim], &gt[j * dim]);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            value += pair(&source[i * dim], &target[j * dim], wst, &gs[i * dim], &gt[j * dim]);
    if (!dsource.empty())
        for (std::size_t i = 0; i < gs.size(); ++i) dsource[i] = T(gs[i]);
    if (!dtarget.empty())
        for (std::size_t i = 0; i < gt.size(); ++i) dtarget[i] = T(gt[i]);
    return value;
}

#define QFD_INSTANTIATE_LOSS(T)                                                                                   \
    template void softmax<T>(std::span<const T>, std::span<T>);                                                  \
    template double cross_entropy<T>(std::span<const T>, std::span<const T>);                                    \
    template double softmax_cross_entropy<T>(std::span<const T>, std::span<const int>, std::size_t, std::span<T>); \
    template double mmd_linear<T>(std::span<const T>, std::size_t, std::span<const T>, std::size_t, std::size_t,   \
                                  std::span<T>, std::span<T>);                                                   \
    template double mmd_rbf<T>(std::span<const T>, std::size_t, std::span<const T>, std::size_t, std::size_t,      \
                               double, std::span<T>, std::span<T>);

QFD_INSTANTIATE_LOSS(float)
QFD_INSTANTIATE_LOSS(double)

#undef QFD_INSTANTIATE_LOSS

}  // namespace qfd::nn
