// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// runtime CPU check, or directly from tests that check availability first.

#include "qfd/nn/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace qfd::nn::kernels::avx2 {

namespace {

// C[4 x 16] += A[4 x k] * B[k x 16]
inline void block_4x16(const float* a, std::size_t lda, const float* b, std::size_t ldb, float* c, std::size_t ldc,
                       std::size_t k) {
    __m256 c00 = _mm256_loadu_ps(c + 0 * ldc), c01 = _mm256_loadu_ps(c + 0 * ldc + 8);
    __m256 c10 = _mm256_loadu_ps(c + 1 * ldc), c11 = _mm256_loadu_ps(c + 1 * ldc + 8);
    __m256 c20 = _mm256_loadu_ps(c + 2 * ldc), c21 = _mm256_loadu_ps(c + 2 * ldc + 8);
    __m256 c30 = _mm256_loadu_ps(c + 3 * ldc), c31 = _mm256_loadu_ps(c + 3 * ldc + 8);
    const float* a0 = a;
    const float* a1 = a + lda;
    const float* a2 = a + 2 * lda;
    const float* a3 = a + 3 * lda;
    for (std::size_t p = 0; p < k; ++p) {
        const float* bp = b + p * ldb;
        const __m256 b0 = _mm256_loadu_ps(bp);
        const __m256 b1 = _mm256_loadu_ps(bp + 8);
        __m256 av = _mm256_broadcast_ss(a0 + p);
        c00 = _mm256_fmadd_ps(av, b0, c00);
        c01 = _mm256_fmadd_ps(av, b1, c01);
        av = _mm256_broadcast_ss(a1 + p);
        c10 = _mm256_fmadd_ps(av, b0, c10);
        c11 = _mm256_fmadd_ps(av, b1, c11);
        av = _mm256_broadcast_ss(a2 + p);
        c20 = _mm256_fmadd_ps(av, b0, c20);
        c21 = _mm256_fmadd_ps(av, b1, c21);
        av = _mm256_broadcast_ss(a3 + p);
        c30 = _mm256_fmadd_ps(av, b0, c30);
        c31 = _mm256_fmadd_ps(av, b1, c31);
    }
    _mm256_storeu_ps(c + 0 * ldc, c00);
    _mm256_storeu_ps(c + 0 * ldc + 8, c01);
    _mm256_storeu_ps(c + 1 * ldc, c10);
    _mm256_storeu_ps(c + 1 * ldc + 8, c11);
    _mm256_storeu_ps(c + 2 * ldc, c20);
    _mm256_storeu_ps(c + 2 * ldc + 8, c21);
    _mm256_storeu_ps(c + 3 * ldc, c30);
    _mm256_storeu_ps(c + 3 * ldc + 8, c31);
}

// C[1 x 16] += A[1 x k] * B[k x 16]
inline void block_1x16(const float* a, const float* b, std::size_t ldb, float* c, std::size_t k) {
    __m256 c0 = _mm256_loadu_ps(c), c1 = _mm256_loadu_ps(c + 8);
    for (std::size_t p = 0; p < k; ++p) {
        const float* bp = b + p * ldb;
        const __m256 av = _mm256_broadcast_ss(a + p);
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 8), c1);
    }
    _mm256_storeu_ps(c, c0);
    _mm256_storeu_ps(c + 8, c1);
}

// C[1 x 8] += A[1 x k] * B[k x 8]
inline void block_1x8(const float* a, const float* b, std::size_t ldb, float* c, std::size_t k) {
    __m256 c0 = _mm256_loadu_ps(c);
    for (std::size_t p = 0; p < k; ++p) c0 = _mm256_fmadd_ps(_mm256_broadcast_ss(a + p), _mm256_loadu_ps(b + p * ldb), c0);
    _mm256_storeu_ps(c, c0);
}

}  // namespace

void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    if (!accumulate) std::fill(c, c + m * n, 0.0f);
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) block_4x16(a + i * k, k, b + j, n, c + i * n + j, n, k);
        for (; i < m; ++i) block_1x16(a + i * k, b + j, n, c + i * n + j, k);
    }
    for (; j + 8 <= n; j += 8)
        for (std::size_t i = 0; i < m; ++i) block_1x8(a + i * k, b + j, n, c + i * n + j, k);
    if (j < n) {
        for (std::size_t i = 0; i < m; ++i) {
            float* crow = c + i * n;
            for (std::size_t p = 0; p < k; ++p) {
                const float aip = a[i * k + p];
                const float* brow = b + p * n;
                for (std::size_t jj = j; jj < n; ++jj) crow[jj] += aip * brow[jj];
            }
        }
    }
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    const __m256 av = _mm256_set1_ps(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y.data() + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x.data() + i), _mm256_loadu_ps(y.data() + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(std::span<float> x) {
    const std::size_t n = x.size();
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        // max(x, 0) with x first so NaN-free inputs match the scalar ternary.
        const __m256 v = _mm256_loadu_ps(x.data() + i);
        _mm256_storeu_ps(x.data() + i, _mm256_and_ps(v, _mm256_cmp_ps(v, zero, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward(std::span<const float> y, std::span<float> grad) {
    const std::size_t n = y.size();
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(y.data() + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(grad.data() + i, _mm256_and_ps(_mm256_loadu_ps(grad.data() + i), mask));
    }
    for (; i < n; ++i)
        if (!(y[i] > 0.0f)) grad[i] = 0.0f;
}

void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m, std::span<float> v,
                 const AdamCoefficients& c) {
    const float b1 = float(c.beta1), b2 = float(c.beta2);
    const float inv_bc1 = float(1.0 / c.bias_correction1), inv_bc2 = float(1.0 / c.bias_correction2);
    const float lr = float(c.lr), eps = float(c.eps);
    const __m256 vb1 = _mm256_set1_ps(b1), vb2 = _mm256_set1_ps(b2);
    const __m256 v1b1 = _mm256_set1_ps(1.0f - b1), v1b2 = _mm256_set1_ps(1.0f - b2);
    const __m256 vibc1 = _mm256_set1_ps(inv_bc1), vibc2 = _mm256_set1_ps(inv_bc2);
    const __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
    const std::size_t n = param.size();
    std::size_t i = 0;
    // Same operation order as the scalar reference and no FMA contraction, so
    // the two backends produce bit-identical updates.
    for (; i + 8 <= n; i += 8) {
        const __m256 g = _mm256_loadu_ps(grad.data() + i);
        __m256 mv = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m.data() + i)), _mm256_mul_ps(v1b1, g));
        __m256 vv = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v.data() + i)),
                                  _mm256_mul_ps(v1b2, _mm256_mul_ps(g, g)));
        _mm256_storeu_ps(m.data() + i, mv);
        _mm256_storeu_ps(v.data() + i, vv);
        const __m256 mhat = _mm256_mul_ps(mv, vibc1);
        const __m256 vhat = _mm256_mul_ps(vv, vibc2);
        const __m256 step = _mm256_mul_ps(vlr, _mm256_div_ps(mhat, _mm256_add_ps(_mm256_sqrt_ps(vhat), veps)));
        _mm256_storeu_ps(param.data() + i, _mm256_sub_ps(_mm256_loadu_ps(param.data() + i), step));
    }
    for (; i < n; ++i) {
        const float g = grad[i];
        const float mi = b1 * m[i] + (1.0f - b1) * g;
        const float vi = b2 * v[i] + (1.0f - b2) * (g * g);
        m[i] = mi;
        v[i] = vi;
        const float step = lr * ((mi * inv_bc1) / (std::sqrt(vi * inv_bc2) + eps));
        param[i] = param[i] - step;
    }
}

}  // namespace qfd::nn::kernels::avx2
