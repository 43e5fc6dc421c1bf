#include <doctest.h>

#include "qfd/error.hpp"
#include "qfd/nn/grad_check.hpp"

#include <random>
#include <type_traits>

using namespace qfd::nn;

namespace {

// Smallest window that survives four conv/pool blocks with some slack.
Architecture tiny() {
    Architecture a;
    a.input_len = 48;
    a.filters = 8;
    a.hidden = 16;
    return a;
}

template <typename T>
std::vector<T> windows(std::size_t n, std::uint64_t seed, double shift = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(shift, 1.0);
    std::vector<T> x(n * 7 * 48);
    for (auto& v : x) v = T(d(rng));
    return x;
}

template <typename T>
void check_all(const LossFunction<T>& loss, std::uint64_t seed) {
    const auto params = ModelParams<T>::initialize(tiny(), seed);
    const auto report = grad_check<T>(params, loss);
    for (const auto& t : report.tensors) {
        INFO(t.name << " rel " << t.rel_error << " probes " << t.probes);
        CHECK(t.probes > 0);
        CHECK(t.rel_error <= report.tolerance);
    }
    CHECK(report.tensors.size() == 14);
    CHECK_NOTHROW(require_passed(report));
}

}  // namespace

TEST_CASE_TEMPLATE("cross-entropy gradients pass the finite-difference check", T, float, double) {
    check_all<T>(make_ce_loss<T>(windows<T>(6, 1), {0, 1, 2, 3, 4, 2}, 0.1, 77), 3);
}

TEST_CASE_TEMPLATE("MMD-only gradients pass the finite-difference check", T, float, double) {
    check_all<T>(make_mmd_loss<T>(windows<T>(4, 2), 4, windows<T>(5, 3, 0.5), 5), 4);
}

TEST_CASE_TEMPLATE("combined CE + lambda*MMD gradients pass the finite-difference check", T, float, double) {
    const double lambda = std::is_same_v<T, double> ? 1e4 : 1.0;
    check_all<T>(make_combined_loss<T>(windows<T>(5, 4), {4, 3, 2, 1, 0}, windows<T>(3, 5), 3, windows<T>(3, 6, 0.3), 3,
                                       lambda, 0.1, 78),
                 5);
}

TEST_CASE("a corrupted conv bias gradient is caught at that layer") {
    const auto params = ModelParams<double>::initialize(tiny(), 6);
    auto loss = make_ce_loss<double>(windows<double>(4, 7), {0, 1, 2, 3}, 0.0, 1);
    const auto report = grad_check<double>(params, loss, {}, [](ModelParams<double>& g) {
        for (auto& v : g.conv[1].bias.values()) v = v * 1.5 + 1e-3;
    });
    CHECK_FALSE(report.passed());
    CHECK(report.worst_tensor == "conv2.bias");
    CHECK(report.failing() == std::vector<std::string>{"conv2.bias"});
    CHECK_THROWS_WITH_AS(require_passed(report), doctest::Contains("conv2.bias"), qfd::GradientCheckError);
}
