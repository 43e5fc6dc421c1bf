#include <doctest.h>

#include "fixtures.hpp"
#include "qfd/container.hpp"
#include "qfd/dataset.hpp"
#include "qfd/error.hpp"

#include <algorithm>
#include <set>

using namespace qfd;
using fixtures::TempDir;

TEST_CASE("generate is balanced and truncated exactly") {
    const auto g = fixtures::small_generation(30);
    const auto d = generate(g, fixtures::noisy_target(), 11);
    CHECK(d.size() == 150);
    CHECK(d.class_counts() == ClassCounts{30, 30, 30, 30, 30});
    CHECK(d.domain == quadsim::Domain::Target);
    CHECK(d.channels == 7);
    CHECK(d.window_len == 80);
    CHECK(d.data.size() == 150 * 7 * 80);
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d.labels[i - 1] <= d.labels[i]);
}

TEST_CASE("per_class = 1 gives five windows") {
    const auto d = generate(fixtures::small_generation(1), fixtures::noisy_target(), 3);
    CHECK(d.size() == 5);
    CHECK(d.labels == std::vector<std::uint8_t>{1, 2, 3, 4, 5});
}

TEST_CASE("generation is deterministic and independent of the thread count") {
    const auto g = fixtures::small_generation(25);
    const auto a = generate(g, fixtures::noisy_target(), 5, 1);
    const auto b = generate(g, fixtures::noisy_target(), 5, 4);
    CHECK(a == b);
    const auto c = generate(g, fixtures::noisy_target(), 6, 1);
    CHECK(a.data != c.data);
    CHECK(a.config_hash != c.config_hash);
}

TEST_CASE("variants come from the same flights") {
    const auto g = fixtures::small_generation(12);
    const Variant vs[] = {Variant::NIF, Variant::CF};
    const auto both = generate_variants(g, fixtures::noisy_target(), 9, vs);
    REQUIRE(both.size() == 2);
    CHECK(both[0].labels == both[1].labels);
    CHECK(both[1].channels == 9);
    // omega_cmd^2 in NIF rows 3..6 equals the square of CF rows 5..8.
    const auto n = both[0].window(17), c = both[1].window(17);
    for (std::size_t t = 0; t < 80; t += 7) {
        const double w = c[5 * 80 + t];
        CHECK(n[3 * 80 + t] == doctest::Approx(w * w).epsilon(1e-6));
    }
    auto g_nif = g;
    g_nif.features.variant = Variant::NIF;
    CHECK(generate(g_nif, fixtures::noisy_target(), 9) == both[0]);
}

TEST_CASE("divergence names label and seed") {
    auto g = fixtures::small_generation(2);
    g.quad.inertia_diag = quadsim::Vec3(1e-4, 1e-4, 2e-4);  // rate loop far too stiff
    const auto d = fixtures::noisy_target();
    try {
        generate(g, d, 1);
        FAIL("expected divergence");
    } catch (const EpisodeDivergedError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("label ") != std::string::npos);
        CHECK(msg.find("step") != std::string::npos);
        CHECK(msg.find("seed") != std::string::npos);
        CHECK(e.step() > 0);
    }
}

TEST_CASE("save and load round-trip bit-exactly") {
    TempDir tmp("ds");
    const auto d = generate(fixtures::small_generation(8), fixtures::noisy_target(), 2);
    save_dataset(d, tmp / "a");
    const auto back = load_dataset(tmp / "a");
    CHECK(back == d);
    CHECK(back.class_counts() == d.class_counts());
    const auto m = container::read_json(tmp / "a" / "manifest.json");
    CHECK(m.at("class_counts").get<ClassCounts>() == back.class_counts());
    CHECK(m.at("format") == "qfd-dataset");

    save_dataset(back, tmp / "b");
    CHECK(fixtures::tree(tmp / "a") == fixtures::tree(tmp / "b"));
}

TEST_CASE("corrupted containers raise distinct errors") {
    TempDir tmp("corrupt");
    const auto d = generate(fixtures::small_generation(2), fixtures::noisy_target(), 2);
    const auto dir = tmp / "d";
    const auto data = dir / "data.f32";
    const auto manifest = dir / "manifest.json";
    auto fresh = [&] {
        std::filesystem::remove_all(dir);
        save_dataset(d, dir);
    };

    SUBCASE("dropping the last byte is a truncated file") {
        fresh();
        auto b = fixtures::bytes(data);
        b.pop_back();
        fixtures::write_bytes(data, b);
        CHECK_THROWS_AS(load_dataset(dir), TruncatedFileError);
    }
    SUBCASE("an extra byte is a count mismatch") {
        fresh();
        auto b = fixtures::bytes(data);
        b.push_back(0);
        fixtures::write_bytes(data, b);
        CHECK_THROWS_AS(load_dataset(dir), CountMismatchError);
    }
    SUBCASE("a flipped byte is a checksum mismatch") {
        fresh();
        auto b = fixtures::bytes(data);
        b.back() ^= 0x40;
        fixtures::write_bytes(data, b);
        CHECK_THROWS_AS(load_dataset(dir), ChecksumMismatchError);
    }
    SUBCASE("a newer version is a version mismatch") {
        fresh();
        auto m = container::read_json(manifest);
        m["version"] = container::kVersion + 1;
        container::write_json(manifest, m);
        CHECK_THROWS_AS(load_dataset(dir), VersionMismatchError);
    }
    SUBCASE("manifest window count disagreeing with the tensors") {
        fresh();
        auto m = container::read_json(manifest);
        m["windows"] = d.size() + 1;
        container::write_json(manifest, m);
        CHECK_THROWS_AS(load_dataset(dir), CountMismatchError);
    }
    SUBCASE("manifest class counts disagreeing with the labels") {
        fresh();
        auto m = container::read_json(manifest);
        m["class_counts"][0] = 3;
        m["class_counts"][1] = 1;
        container::write_json(manifest, m);
        CHECK_THROWS_AS(load_dataset(dir), CountMismatchError);
    }
    SUBCASE("another container kind") {
        fresh();
        auto m = container::read_json(manifest);
        m["format"] = "qfd-checkpoint";
        container::write_json(manifest, m);
        CHECK_THROWS_AS(load_dataset(dir), FormatError);
    }
    SUBCASE("missing directory") { CHECK_THROWS_AS(load_dataset(tmp / "nope"), FormatError); }
}

TEST_CASE("flight logs persist in the container format") {
    TempDir tmp("log");
    const auto log = quadsim::fly_episode({}, quadsim::FaultSpec::for_label(3), fixtures::noisy_target(),
                                          fixtures::small_generation(1).plan, 4);
    save_flight_log(log, tmp / "log");
    const auto back = load_flight_log(tmp / "log");
    CHECK(back.gyro == log.gyro);
    CHECK(back.attitude == log.attitude);
    CHECK(back.omega_cmd == log.omega_cmd);
    CHECK(back.label == 3);
    CHECK(back.domain == quadsim::Domain::Target);
    CHECK(back.dt == log.dt);
}

TEST_CASE("batch sampler") {
    SUBCASE("4000 windows in batches of 128") {
        const BatchSampler s(4000, 128);
        CHECK(s.batches() == 32);
        const auto e = s.epoch(1);
        REQUIRE(e.size() == 32);
        CHECK(e.back().size() == 32);
        for (std::size_t i = 0; i + 1 < e.size(); ++i) CHECK(e[i].size() == 128);
    }
    SUBCASE("seeded order") {
        const BatchSampler s(1000, 64);
        CHECK(s.epoch(3) == s.epoch(3));
        CHECK(s.epoch(3) != s.epoch(4));
    }
    SUBCASE("each index exactly once per epoch") {
        const BatchSampler s(777, 50);
        for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
            std::vector<std::size_t> all;
            for (const auto& b : s.epoch(seed)) all.insert(all.end(), b.begin(), b.end());
            std::sort(all.begin(), all.end());
            REQUIRE(all.size() == 777);
            for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(BatchSampler(0, 4), InputDomainError);
        CHECK_THROWS_AS(BatchSampler(4, 0), InputDomainError);
    }
}

TEST_CASE("healthy subset") {
    const auto d = generate(fixtures::small_generation(10), fixtures::noisy_target(), 8);
    const auto h = healthy_subset(d);
    CHECK(h.size() == 10);
    CHECK(h.domain == d.domain);
    for (auto l : h.labels) CHECK(l == 1);
    std::size_t k = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.labels[i] == 1) {
            const auto a = d.window(i), b = h.window(k++);
            CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
        }

    std::vector<std::size_t> faulty;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.labels[i] != 1) faulty.push_back(i);
    CHECK(healthy_subset(subset(d, faulty)).size() == 0);
}

TEST_CASE("gather copies windows and zero-based classes") {
    const auto d = generate(fixtures::small_generation(3), fixtures::noisy_target(), 8);
    const std::size_t idx[] = {14, 0, 7};
    std::vector<float> x;
    std::vector<int> y;
    gather(d, idx, x, y);
    CHECK(y == std::vector<int>{4, 0, 2});
    const auto w = d.window(7);
    CHECK(std::equal(w.begin(), w.end(), x.begin() + 2 * long(d.window_size())));
}

TEST_CASE("dataset append checks shape and domain") {
    Dataset d;
    Window w;
    w.data.assign(7 * 80, 0.0f);
    w.label = 2;
    d.append(w);
    CHECK(d.size() == 1);
    w.data.pop_back();
    CHECK_THROWS_AS(d.append(w), ShapeError);
    w.data.push_back(0);
    w.domain = quadsim::Domain::Target;
    CHECK_THROWS_AS(d.append(w), InputDomainError);
}
