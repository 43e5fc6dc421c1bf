#include <doctest.h>

#include "qfd/error.hpp"
#include "qfd/nn/loss.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace qfd::nn;

TEST_CASE("softmax of equal logits is uniform and cross-entropy is ln 5") {
    std::vector<float> z(5, 0.0f), q(5);
    softmax<float>(z, q);
    for (float v : q) CHECK(v == doctest::Approx(0.2).epsilon(1e-7));
    std::vector<float> p{0, 0, 1, 0, 0};
    CHECK(cross_entropy<float>(p, q) == doctest::Approx(std::log(5.0)).epsilon(1e-6));
}

TEST_CASE("softmax is stable for large logits") {
    std::vector<float> z{1000, 0, 0, 0, 0}, q(5);
    softmax<float>(z, q);
    for (float v : q) CHECK(std::isfinite(v));
    CHECK(q[0] == doctest::Approx(1.0));
    double sum = 0;
    for (float v : q) sum += v;
    CHECK(sum == doctest::Approx(1.0));
    std::vector<float> p{0, 1, 0, 0, 0};
    const double ce = cross_entropy<float>(p, q);
    CHECK(std::isfinite(ce));
    CHECK(ce == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("softmax cross-entropy gradient is (q - p)/B and matches finite differences") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 2);
    const std::size_t batch = 4, k = 5;
    std::vector<double> z(batch * k);
    for (auto& v : z) v = n(rng);
    std::vector<int> cls{0, 3, 4, 1};
    std::vector<double> dz(z.size());
    const double loss = softmax_cross_entropy<double>(z, cls, k, dz);
    CHECK(loss > 0);
    const double h = 1e-6;
    for (std::size_t i = 0; i < z.size(); ++i) {
        auto zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (softmax_cross_entropy<double>(zp, cls, k, {}) - softmax_cross_entropy<double>(zm, cls, k, {})) /
                          (2 * h);
        CHECK(dz[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("linear MMD properties") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    const std::size_t dim = 6, ns = 5, nt = 7;
    std::vector<double> s(ns * dim), t(nt * dim);
    for (auto& v : s) v = n(rng);
    for (auto& v : t) v = n(rng);

    SUBCASE("identical sets give zero") { CHECK(mmd_linear<double>(s, ns, s, ns, dim, {}, {}) == doctest::Approx(0.0)); }
    SUBCASE("symmetric and non-negative") {
        const double a = mmd_linear<double>(s, ns, t, nt, dim, {}, {});
        const double b = mmd_linear<double>(t, nt, s, ns, dim, {}, {});
        CHECK(a >= 0);
        CHECK(a == doctest::Approx(b));
    }
    SUBCASE("a constant shift c gives |c|^2") {
        std::vector<double> shifted = s;
        std::vector<double> c{0.5, -1, 2, 0, 0.25, 1};
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < dim; ++j) shifted[i * dim + j] += c[j];
        double c2 = 0;
        for (double v : c) c2 += v * v;
        CHECK(mmd_linear<double>(shifted, ns, s, ns, dim, {}, {}) == doctest::Approx(c2));
    }
    SUBCASE("gradients match finite differences") {
        std::vector<double> ds(s.size()), dt(t.size());
        mmd_linear<double>(s, ns, t, nt, dim, ds, dt);
        const double h = 1e-6;
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto sp = s, sm = s;
            sp[i] += h;
            sm[i] -= h;
            const double fd =
                (mmd_linear<double>(sp, ns, t, nt, dim, {}, {}) - mmd_linear<double>(sm, ns, t, nt, dim, {}, {})) / (2 * h);
            CHECK(ds[i] == doctest::Approx(fd).epsilon(1e-5));
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto tp = t, tm = t;
            tp[i] += h;
            tm[i] -= h;
            const double fd =
                (mmd_linear<double>(s, ns, tp, nt, dim, {}, {}) - mmd_linear<double>(s, ns, tm, nt, dim, {}, {})) / (2 * h);
            CHECK(dt[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
    SUBCASE("an empty side is rejected") {
        CHECK_THROWS_AS(mmd_linear<double>(s, ns, {}, 0, dim, {}, {}), qfd::InputDomainError);
    }
}

TEST_CASE("Gaussian MMD is near zero for identical sets and its gradient matches finite differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0, 1);
    const std::size_t dim = 3, ns = 4, nt = 5;
    std::vector<double> s(ns * dim), t(nt * dim);
    for (auto& v : s) v = n(rng);
    for (auto& v : t) v = n(rng) + 0.7;
    CHECK(mmd_rbf<double>(s, ns, s, ns, dim, 1.0, {}, {}) < 1e-12);
    std::vector<double> ds(s.size()), dt(t.size());
    mmd_rbf<double>(s, ns, t, nt, dim, 1.5, ds, dt);
    const double h = 1e-6;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto sp = s, sm = s;
        sp[i] += h;
        sm[i] -= h;
        const double fd = (mmd_rbf<double>(sp, ns, t, nt, dim, 1.5, {}, {}) - mmd_rbf<double>(sm, ns, t, nt, dim, 1.5, {}, {})) /
                          (2 * h);
        CHECK(ds[i] == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK_THROWS_AS(mmd_rbf<double>(s, 1, t, nt, dim, 1.0, {}, {}), qfd::InputDomainError);
}

TEST_CASE("softmax is shift invariant and a perfect prediction has zero loss") {
    std::vector<double> z{0.3, -1.2, 2.0, 0.0, 0.7}, zc(5), q(5), qc(5);
    for (std::size_t i = 0; i < 5; ++i) zc[i] = z[i] + 37.5;
    softmax<double>(z, q);
    softmax<double>(zc, qc);
    for (std::size_t i = 0; i < 5; ++i) CHECK(q[i] == doctest::Approx(qc[i]).epsilon(1e-12));
    std::vector<double> p{1, 0, 0, 0, 0}, perfect{1, 0, 0, 0, 0};
    CHECK(cross_entropy<double>(p, perfect) == 0.0);
}

TEST_CASE("feature means one unit apart give linear MMD 1") {
    const std::size_t dim = 8;
    std::vector<float> s(4 * dim, 0.5f), t(4 * dim, 0.5f);
    for (std::size_t i = 0; i < 4; ++i) t[i * dim + 2] += 1.0f;
    CHECK(mmd_linear<float>(s, 4, t, 4, dim, {}, {}) == doctest::Approx(1.0));
}
