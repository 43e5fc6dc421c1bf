#pragma once

#include "qfd/quadsim/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qfd {

// NIF: p', q', r', w1^2..w4^2 (7 channels). CF: roll, pitch, p, q, r, w1..w4 (9 channels).
enum class Variant : std::uint8_t { NIF = 0, CF = 1 };

std::size_t channel_count(Variant v);
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct FeatureConfig {
    std::size_t window_len = 80;
    std::size_t stride = 10;
    Variant variant = Variant::NIF;

    void validate() const;
    bool operator==(const FeatureConfig&) const = default;
};

struct Window {
    std::vector<float> data;  // [channel][time]
    int label = 1;
    quadsim::Domain domain = quadsim::Domain::Source;

    bool operator==(const Window&) const = default;
};

// Central differences inside, second-order one-sided differences at the ends.
std::vector<double> angular_accel_from_gyro(std::span<const double> series, double dt);

// Number of windows build_windows produces for a log of n samples.
std::size_t window_count(std::size_t n, const FeatureConfig& cfg);

// Windows end at samples T-1, T-1+stride, ...; each holds the T samples up to
// and including its end.
std::vector<Window> build_windows(const quadsim::FlightLog& log, const FeatureConfig& cfg);

// Per-channel standardization statistics over every sample of every window.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(std::vector<double> mean, std::vector<double> stddev);

    // Throws FittingError on a zero-variance channel and InputDomainError if
    // any window is not from the source domain.
    static Normalizer fit(std::span<const Window> windows, std::size_t channels);
    // Same, on a raw [n][channels][len] buffer.
    static Normalizer fit(std::span<const float> data, std::size_t n, std::size_t channels, std::size_t len);

    std::size_t channels() const noexcept { return mean_.size(); }
    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& stddev() const noexcept { return std_; }

    Window apply(const Window& w) const;
    // In place on a [n][channels][len] buffer.
    void apply(std::span<float> data, std::size_t len) const;

    bool operator==(const Normalizer&) const = default;

private:
    std::vector<double> mean_, std_;
};

}  // namespace qfd
