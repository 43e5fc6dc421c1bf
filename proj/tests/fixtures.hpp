#pragma once

#include "qfd/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("qfd-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::vector<char> bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<char>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

// Every regular file under `dir`, relative path -> contents.
inline std::vector<std::pair<std::string, std::vector<char>>> tree(const std::filesystem::path& dir) {
    std::vector<std::pair<std::string, std::vector<char>>> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.emplace_back(std::filesystem::relative(e.path(), dir).string(), bytes(e.path()));
    std::sort(out.begin(), out.end());
    return out;
}

// Short flights so a handful of windows costs milliseconds.
inline qfd::GenerationConfig small_generation(std::size_t per_class, double duration = 3.0) {
    qfd::GenerationConfig g;
    g.plan.waypoints = {qfd::quadsim::Vec3(0, 0, 2), qfd::quadsim::Vec3(0.5, 0, 2)};
    g.plan.hold = 1.5;
    g.plan.duration = duration;
    g.per_class = per_class;
    return g;
}

inline qfd::quadsim::DomainConfig noisy_target() {
    qfd::quadsim::DomainConfig d;
    d.domain = qfd::quadsim::Domain::Target;
    d.gyro_noise_std = 0.005;
    d.waypoint_jitter = 0.2;
    d.seed = 7;
    return d;
}

}  // namespace fixtures
