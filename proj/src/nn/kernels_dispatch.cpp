#include "qfd/error.hpp"
#include "qfd/nn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace qfd::nn::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(QFD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() {
    const bool avx2 = cpu_has_avx2();
    if (const char* env = std::getenv("QFD_SIMD")) {
        const std::string s(env);
        if (s == "scalar") return Backend::Scalar;
        if (s == "avx2" && avx2) return Backend::Avx2;
    }
    return avx2 ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() {
    static std::atomic<Backend> slot{initial_backend()};
    return slot;
}

bool use_avx2() { return backend_slot().load(std::memory_order_relaxed) == Backend::Avx2; }

}  // namespace

Backend active_backend() { return backend_slot().load(); }

bool backend_available(Backend b) { return b == Backend::Scalar || cpu_has_avx2(); }

void set_backend(Backend b) {
    if (!backend_available(b)) throw InputDomainError("kernel backend " + std::string(backend_name(b)) + " is not available");
    backend_slot().store(b);
}

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

#if defined(QFD_HAVE_AVX2)
#define QFD_DISPATCH(call) \
    do {                   \
        if (use_avx2()) {  \
            avx2::call;    \
            return;        \
        }                  \
        scalar::call;      \
    } while (0)
#else
#define QFD_DISPATCH(call) scalar::call
#endif

void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    QFD_DISPATCH(gemm(a, b, c, m, n, k, accumulate));
}
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k, bool accumulate) {
    scalar::gemm(a, b, c, m, n, k, accumulate);
}
void axpy(float alpha, std::span<const float> x, std::span<float> y) { QFD_DISPATCH(axpy(alpha, x, y)); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { scalar::axpy(alpha, x, y); }
void relu(std::span<float> x) { QFD_DISPATCH(relu(x)); }
void relu(std::span<double> x) { scalar::relu(x); }
void relu_backward(std::span<const float> y, std::span<float> grad) { QFD_DISPATCH(relu_backward(y, grad)); }
void relu_backward(std::span<const double> y, std::span<double> grad) { scalar::relu_backward(y, grad); }
void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m, std::span<float> v,
                 const AdamCoefficients& c) {
    QFD_DISPATCH(adam_update(param, grad, m, v, c));
}
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamCoefficients& c) {
    scalar::adam_update(param, grad, m, v, c);
}

#undef QFD_DISPATCH

}  // namespace qfd::nn::kernels
