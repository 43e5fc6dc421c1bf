#include "qfd/nn/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qfd::nn::kernels::scalar {

namespace {

template <typename T>
void gemm_impl(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    if (!accumulate) std::fill(c, c + m * n, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = a[i * k + p];
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

template <typename T>
void axpy_impl(T alpha, std::span<const T> x, std::span<T> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <typename T>
void relu_impl(std::span<T> x) {
    for (auto& v : x) v = v > T(0) ? v : T(0);
}

template <typename T>
void relu_backward_impl(std::span<const T> y, std::span<T> grad) {
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!(y[i] > T(0))) grad[i] = T(0);
}

template <typename T>
void adam_impl(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
               const AdamCoefficients& c) {
    const T b1 = T(c.beta1), b2 = T(c.beta2);
    const T one_b1 = T(1) - b1, one_b2 = T(1) - b2;
    const T inv_bc1 = T(1.0 / c.bias_correction1), inv_bc2 = T(1.0 / c.bias_correction2);
    const T lr = T(c.lr), eps = T(c.eps);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const T g = grad[i];
        m[i] = b1 * m[i] + one_b1 * g;
        v[i] = b2 * v[i] + one_b2 * (g * g);
        const T mhat = m[i] * inv_bc1;
        const T vhat = v[i] * inv_bc2;
        param[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    gemm_impl(a, b, c, m, n, k, accumulate);
}
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    gemm_impl(a, b, c, m, n, k, accumulate);
}
void axpy(float alpha, std::span<const float> x, std::span<float> y) { axpy_impl(alpha, x, y); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { axpy_impl(alpha, x, y); }
void relu(std::span<float> x) { relu_impl(x); }
void relu(std::span<double> x) { relu_impl(x); }
void relu_backward(std::span<const float> y, std::span<float> grad) { relu_backward_impl(y, grad); }
void relu_backward(std::span<const double> y, std::span<double> grad) { relu_backward_impl(y, grad); }
void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m, std::span<float> v,
                 const AdamCoefficients& c) {
    adam_impl(param, grad, m, v, c);
}
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamCoefficients& c) {
    adam_impl(param, grad, m, v, c);
}

}  // namespace qfd::nn::kernels::scalar
