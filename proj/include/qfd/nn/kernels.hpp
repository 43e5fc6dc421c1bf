#pragma once

// Data-parallel inner loops used by the network. Every kernel has a scalar
// reference implementation; float kernels additionally have an AVX2/FMA
// variant that is picked at runtime when the CPU supports it. Double kernels
// always run the scalar reference (they back the 64-bit gradient check).
//
// Backend selection: QFD_SIMD=scalar|avx2|auto (default auto), or
// set_backend() from code. Results are deterministic for a fixed backend; the
// two backends agree to float rounding (see test_kernels).

#include <cstddef>
#include <span>
#include <string_view>

namespace qfd::nn::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_available(Backend b);
// Throws InputDomainError if the backend is not available on this CPU/build.
void set_backend(Backend b);
std::string_view backend_name(Backend b);

// C[m x n] = A[m x k] * B[k x n]  (accumulate=false)
// C[m x n] += A[m x k] * B[k x n] (accumulate=true)
// All matrices row-major and densely packed.
void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate);

// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// x = max(x, 0)
void relu(std::span<float> x);
void relu(std::span<double> x);

// grad *= (y > 0), where y is the ReLU output.
void relu_backward(std::span<const float> y, std::span<float> grad);
void relu_backward(std::span<const double> y, std::span<double> grad);

struct AdamCoefficients {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double bias_correction1;  // 1 - beta1^t
    double bias_correction2;  // 1 - beta2^t
};

// One bias-corrected Adam update over a flat parameter block.
void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m, std::span<float> v,
                 const AdamCoefficients& c);
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamCoefficients& c);

// Direct access to a specific implementation, for equivalence tests and
// benchmarks. The avx2 functions must only be called when
// backend_available(Backend::Avx2) is true.
namespace scalar {
void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void relu(std::span<float> x);
void relu(std::span<double> x);
void relu_backward(std::span<const float> y, std::span<float> grad);
void relu_backward(std::span<const double> y, std::span<double> grad);
void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m, std::span<float> v,
                 const AdamCoefficients& c);
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamCoefficients& c);
}  // namespace scalar

namespace avx2 {
void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void relu(std::span<float> x);
void relu_backward(std::span<const float> y, std::span<float> grad);
void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m, std::span<float> v,
                 const AdamCoefficients& c);
}  // namespace avx2

}  // namespace qfd::nn::kernels
