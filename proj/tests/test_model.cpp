#include <doctest.h>

#include "qfd/error.hpp"
#include "qfd/nn/kernels.hpp"
#include "qfd/nn/model.hpp"

#include <random>

using namespace qfd::nn;

namespace {

std::vector<float> random_input(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d(0.0f, 1.0f);
    std::vector<float> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

}  // namespace

TEST_CASE("shape chain for a 7x80 window") {
    Architecture arch;
    CHECK(arch.length_chain() == std::vector<std::size_t>{80, 78, 39, 37, 18, 16, 8, 6, 3});
    CHECK(arch.flat_dim() == 192);
    auto p = ModelParams<float>::zeros(arch);
    CHECK(p.dense1.weight.shape() == std::vector<std::size_t>{128, 192});
    CHECK(p.conv[0].weight.shape() == std::vector<std::size_t>{64, 7, 3});
    CHECK(p.conv[3].weight.shape() == std::vector<std::size_t>{64, 64, 3});
    CHECK(p.output.weight.shape() == std::vector<std::size_t>{5, 128});
    const std::size_t expected = (64 * 7 * 3 + 64) + 3 * (64 * 64 * 3 + 64) + (192 * 128 + 128) + (128 * 128 + 128) +
                                 (128 * 5 + 5);
    CHECK(p.parameter_count() == expected);
}

TEST_CASE("a window too short for four blocks is rejected at construction") {
    Architecture arch;
    arch.input_len = 20;
    CHECK_THROWS_AS(ModelParams<float>::zeros(arch), qfd::ShapeError);
}

TEST_CASE("forward shapes and eval determinism") {
    Architecture arch;
    auto p = ModelParams<float>::initialize(arch, 1);
    auto x = random_input(7 * 80, 2);
    ForwardPass<float> a, b;
    model_forward<float>(p, x, 1, {}, a);
    model_forward<float>(p, x, 1, {}, b);
    CHECK(a.logits.size() == 5);
    CHECK(a.features.size() == 128);
    CHECK(a.logits == b.logits);
    CHECK(a.features == b.features);
    CHECK_THROWS_AS(model_forward<float>(p, std::span<const float>(x).first(100), 1, {}, a), qfd::ShapeError);
}

TEST_CASE("batched forward equals per-sample forward") {
    Architecture arch;
    auto p = ModelParams<float>::initialize(arch, 3);
    const std::size_t batch = 5, n = 7 * 80;
    auto x = random_input(batch * n, 4);
    ForwardPass<float> all, one;
    model_forward<float>(p, x, batch, {}, all);
    for (std::size_t b = 0; b < batch; ++b) {
        model_forward<float>(p, std::span<const float>(x).subspan(b * n, n), 1, {}, one);
        for (std::size_t k = 0; k < 5; ++k) CHECK(all.logits[b * 5 + k] == doctest::Approx(one.logits[k]).epsilon(1e-4));
    }
}

TEST_CASE("train-mode dropout is deterministic given the rng seed") {
    Architecture arch;
    auto p = ModelParams<float>::initialize(arch, 5);
    auto x = random_input(2 * 7 * 80, 6);
    ForwardPass<float> a, b;
    std::mt19937_64 r1(9), r2(9);
    model_forward<float>(p, x, 2, {Mode::Train, 0.1, &r1, false}, a);
    model_forward<float>(p, x, 2, {Mode::Train, 0.1, &r2, false}, b);
    CHECK(a.logits == b.logits);
    CHECK(a.mask1 == b.mask1);
}

TEST_CASE("float and double models agree after a cast") {
    Architecture arch;
    auto p = ModelParams<float>::initialize(arch, 7);
    auto pd = p.cast<double>();
    CHECK(pd.cast<float>() == p);
    auto x = random_input(7 * 80, 8);
    std::vector<double> xd(x.begin(), x.end());
    ForwardPass<float> a;
    ForwardPass<double> b;
    model_forward<float>(p, x, 1, {}, a);
    model_forward<double>(pd, xd, 1, {}, b);
    for (std::size_t k = 0; k < 5; ++k) CHECK(a.logits[k] == doctest::Approx(b.logits[k]).epsilon(1e-4));
}

TEST_CASE("SIMD and scalar backends give equivalent forward and backward passes") {
    if (!kernels::backend_available(kernels::Backend::Avx2)) return;
    Architecture arch;
    auto p = ModelParams<float>::initialize(arch, 10);
    const std::size_t batch = 3;
    auto x = random_input(batch * 7 * 80, 11);
    std::vector<float> dlogits = random_input(batch * 5, 12);

    auto run = [&](kernels::Backend be, ForwardPass<float>& pass, ModelParams<float>& g) {
        const auto prev = kernels::active_backend();
        kernels::set_backend(be);
        model_forward<float>(p, x, batch, {}, pass);
        g = ModelParams<float>::zeros(arch);
        model_backward<float>(p, pass, dlogits, {}, g);
        kernels::set_backend(prev);
    };
    ForwardPass<float> ps, pv;
    ModelParams<float> gs, gv;
    run(kernels::Backend::Scalar, ps, gs);
    run(kernels::Backend::Avx2, pv, gv);
    for (std::size_t i = 0; i < ps.logits.size(); ++i)
        CHECK(pv.logits[i] == doctest::Approx(ps.logits[i]).epsilon(1e-4));
    auto ts = gs.tensors();
    auto tv = gv.tensors();
    for (std::size_t t = 0; t < ts.size(); ++t) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < ts[t].values.size(); ++i) {
            const double d = double(ts[t].values[i]) - double(tv[t].values[i]);
            num += d * d;
            den += double(ts[t].values[i]) * ts[t].values[i];
        }
        INFO(ts[t].name);
        CHECK(num <= 1e-8 * std::max(den, 1e-12));
    }
}
