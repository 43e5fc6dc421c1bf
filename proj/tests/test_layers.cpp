#include <doctest.h>

#include "qfd/error.hpp"
#include "qfd/nn/layers.hpp"

#include <cmath>
#include <random>

using namespace qfd::nn;

namespace {

// Brute-force valid correlation in double; independent of the im2col path.
std::vector<double> conv_oracle(const std::vector<double>& x, std::size_t cin, std::size_t len,
                                const std::vector<double>& w, const std::vector<double>& b, std::size_t cout) {
    const std::size_t lout = len - 2;
    std::vector<double> y(cout * lout);
    for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t t = 0; t < lout; ++t) {
            double s = b[o];
            for (std::size_t c = 0; c < cin; ++c)
                for (std::size_t k = 0; k < 3; ++k) s += w[(o * cin + c) * 3 + k] * x[c * len + t + k];
            y[o * lout + t] = s;
        }
    return y;
}

double projected(const std::vector<double>& y, const std::vector<double>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
    return s;
}

template <typename T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    Tensor<T> t(std::move(shape));
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& v : t.values()) v = T(n(rng));
    return t;
}

std::vector<double> as_double(const Tensor<float>& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

TEST_CASE("conv1d with a delta kernel trims one sample on each side") {
    Tensor<float> x({1, 6}, std::vector<float>{1, 2, 3, 4, 5, 6});
    Tensor<float> w({1, 1, 3}, std::vector<float>{0, 1, 0});
    Tensor<float> b({1});
    const auto y = conv1d(x, w, b);
    CHECK(y.shape() == std::vector<std::size_t>{1, 4});
    CHECK(y.values() == std::vector<float>{2, 3, 4, 5});
}

TEST_CASE("conv1d of all-ones input with all-ones kernel is 3*C_in") {
    const std::size_t cin = 4;
    Tensor<float> x({cin, 10}, 1.0f);
    Tensor<float> w({2, cin, 3}, 1.0f);
    Tensor<float> b({2});
    const auto y = conv1d(x, w, b);
    for (float v : y.values()) CHECK(v == 12.0f);
}

TEST_CASE("conv1d shape errors name the offending axis") {
    Tensor<float> x({3, 10});
    Tensor<float> w({2, 2, 3});
    Tensor<float> b({2});
    CHECK_THROWS_WITH_AS(conv1d(x, w, b), doctest::Contains("in-channel"), qfd::ShapeError);
    Tensor<float> short_x({2, 2});
    CHECK_THROWS_WITH_AS(conv1d(short_x, w, b), doctest::Contains("length"), qfd::ShapeError);
}

TEST_CASE("conv1d forward matches the brute-force oracle and backward matches finite differences") {
    std::mt19937_64 rng(11);
    const std::size_t cin = 2, len = 8, cout = 3;
    auto x = random_tensor<float>({cin, len}, rng);
    auto w = random_tensor<float>({cout, cin, 3}, rng);
    auto b = random_tensor<float>({cout}, rng);
    auto r = random_tensor<float>({cout, len - 2}, rng);  // projection L = <r, y>

    const auto y = conv1d(x, w, b);
    const auto yref = conv_oracle(as_double(x), cin, len, as_double(w), as_double(b), cout);
    for (std::size_t i = 0; i < yref.size(); ++i) CHECK(y[i] == doctest::Approx(yref[i]).epsilon(1e-5));

    const auto g = conv1d_backward(x, w, r);
    const auto rd = as_double(r);
    const double h = 1e-6;
    std::vector<std::vector<double>> vars{as_double(x), as_double(w), as_double(b)};
    auto fd = [&](std::size_t which, std::size_t i) {
        auto v = vars;
        v[which][i] += h;
        const double plus = projected(conv_oracle(v[0], cin, len, v[1], v[2], cout), rd);
        v[which][i] -= 2 * h;
        const double minus = projected(conv_oracle(v[0], cin, len, v[1], v[2], cout), rd);
        return (plus - minus) / (2 * h);
    };
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); };
    const Tensor<float>* analytic[] = {&g.input, &g.weight, &g.bias};
    for (std::size_t which = 0; which < 3; ++which)
        for (std::size_t i = 0; i < vars[which].size(); ++i) CHECK(rel((*analytic[which])[i], fd(which, i)) < 1e-3);
}

TEST_CASE("maxpool1d picks pair maxima and drops the odd tail") {
    Tensor<float> x({1, 4}, std::vector<float>{1, 3, 2, 5});
    CHECK(maxpool1d(x).output.values() == std::vector<float>{3, 5});
    Tensor<float> odd({1, 5}, std::vector<float>{1, 3, 2, 5, 9});
    CHECK(maxpool1d(odd).output.values() == std::vector<float>{3, 5});
    Tensor<float> tiny({1, 1});
    CHECK_THROWS_AS(maxpool1d(tiny), qfd::ShapeError);
}

TEST_CASE("maxpool1d routes gradient to the first element on ties") {
    Tensor<float> x({2, 6}, 4.0f);
    const auto fwd = maxpool1d(x);
    CHECK(fwd.output.values() == std::vector<float>(6, 4.0f));
    Tensor<float> dy({2, 3}, 1.0f);
    const auto dx = maxpool1d_backward(x, fwd, dy);
    for (std::size_t i = 0; i < dx.size(); ++i) CHECK(dx[i] == (i % 2 == 0 ? 1.0f : 0.0f));
}

TEST_CASE("maxpool1d backward matches finite differences away from ties") {
    std::mt19937_64 rng(12);
    auto x = random_tensor<double>({3, 9}, rng);
    auto r = random_tensor<double>({3, 4}, rng);
    const auto fwd = maxpool1d(x);
    const auto dx = maxpool1d_backward(x, fwd, r);
    const double h = 1e-7;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double plus = 0, minus = 0;
        const auto yp = maxpool1d(xp).output, ym = maxpool1d(xm).output;
        for (std::size_t j = 0; j < r.size(); ++j) {
            plus += yp[j] * r[j];
            minus += ym[j] * r[j];
        }
        CHECK(dx[i] == doctest::Approx((plus - minus) / (2 * h)).epsilon(1e-3));
    }
}

TEST_CASE("dense is an affine map and relu clips negatives") {
    Tensor<float> x({2, 3}, std::vector<float>{1, 2, 3, -1, 0, 1});
    Tensor<float> w({2, 3}, std::vector<float>{1, 0, 0, 0, 1, 1});
    Tensor<float> b({2}, std::vector<float>{0.5f, -10});
    const auto y = dense(x, w, b);
    CHECK(y.values() == std::vector<float>{1.5f, -5, -0.5f, -9});
    CHECK(relu(y).values() == std::vector<float>{1.5f, 0, 0, 0});
    Tensor<float> bad({4});
    CHECK_THROWS_AS(dense(bad, w, b), qfd::ShapeError);
}

TEST_CASE("dropout contracts") {
    std::mt19937_64 rng(13);
    auto x = random_tensor<float>({4, 50}, rng);
    SUBCASE("rate 0 in train mode is the identity") { CHECK(dropout(x, 0.0, Mode::Train, 1) == x); }
    SUBCASE("eval mode is the identity for any rate") { CHECK(dropout(x, 0.9, Mode::Eval, 1) == x); }
    SUBCASE("same seed gives the same mask") {
        CHECK(dropout(x, 0.3, Mode::Train, 5) == dropout(x, 0.3, Mode::Train, 5));
        CHECK_FALSE(dropout(x, 0.3, Mode::Train, 5) == dropout(x, 0.3, Mode::Train, 6));
    }
    SUBCASE("rate outside [0,1) is rejected") {
        CHECK_THROWS_AS(dropout(x, 1.0, Mode::Train, 1), qfd::InputDomainError);
        CHECK_THROWS_AS(dropout(x, -0.1, Mode::Train, 1), qfd::InputDomainError);
    }
}

TEST_CASE("dropout preserves the expectation (Monte Carlo over 1e5 masks)") {
    Tensor<float> x({8}, std::vector<float>{0.5f, 1, 1.5f, 2, -1, 3, 0.25f, 4});
    double input_mean = 0;
    for (float v : x.values()) input_mean += v;
    input_mean /= x.size();
    std::mt19937_64 rng(99);
    std::vector<float> mask;
    double total = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        auto y = x.values();
        dropout_forward<float>(y, 0.1, Mode::Train, rng, mask);
        for (float v : y) total += v;
    }
    const double mc_mean = total / (double(trials) * x.size());
    CHECK(std::abs(mc_mean - input_mean) / std::abs(input_mean) < 0.01);
}
