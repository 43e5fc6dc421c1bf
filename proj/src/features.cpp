#include "qfd/features.hpp"

#include "qfd/error.hpp"

#include <cmath>

namespace qfd {

std::size_t channel_count(Variant v) { return v == Variant::NIF ? 7 : 9; }

std::string to_string(Variant v) { return v == Variant::NIF ? "nif" : "cf"; }

Variant variant_from_string(const std::string& s) {
    if (s == "nif" || s == "NIF") return Variant::NIF;
    if (s == "cf" || s == "CF") return Variant::CF;
    throw InputDomainError("unknown feature variant '" + s + "' (expected nif or cf)");
}

void FeatureConfig::validate() const {
    if (window_len < 2) throw InputDomainError("feature config: window length must be >= 2");
    if (stride < 1) throw InputDomainError("feature config: stride must be >= 1");
}

std::vector<double> angular_accel_from_gyro(std::span<const double> x, double dt) {
    const std::size_t n = x.size();
    if (n < 3) throw InputDomainError("angular_accel_from_gyro: need at least 3 samples, got " + std::to_string(n));
    if (!(dt > 0)) throw InputDomainError("angular_accel_from_gyro: dt must be positive");
    std::vector<double> d(n);
    const double inv2 = 1.0 / (2.0 * dt);
    d[0] = (4.0 * (x[1] - x[0]) - (x[2] - x[0])) * inv2;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) * inv2;
    d[n - 1] = (4.0 * (x[n - 1] - x[n - 2]) - (x[n - 1] - x[n - 3])) * inv2;
    return d;
}

std::size_t window_count(std::size_t n, const FeatureConfig& cfg) {
    cfg.validate();
    return n < cfg.window_len ? 0 : (n - cfg.window_len) / cfg.stride + 1;
}

std::vector<Window> build_windows(const quadsim::FlightLog& log, const FeatureConfig& cfg) {
    cfg.validate();
    log.validate();
    const std::size_t n = log.size(), T = cfg.window_len;
    if (n < T || n < 3)
        throw ShapeError("build_windows: log has " + std::to_string(n) + " samples, need at least " +
                         std::to_string(std::max<std::size_t>(T, 3)));

    // Full-length channel series first, then slice.
    const std::size_t C = channel_count(cfg.variant);
    std::vector<std::vector<double>> rows(C, std::vector<double>(n));
    std::vector<double> axis(n);
    if (cfg.variant == Variant::NIF) {
        for (int a = 0; a < 3; ++a) {
            for (std::size_t k = 0; k < n; ++k) axis[k] = log.gyro[k][a];
            rows[a] = angular_accel_from_gyro(axis, log.dt);
        }
        for (int i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < n; ++k) rows[3 + i][k] = log.omega_cmd[k][i] * log.omega_cmd[k][i];
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            rows[0][k] = log.attitude[k][0];
            rows[1][k] = log.attitude[k][1];
            for (int a = 0; a < 3; ++a) rows[2 + a][k] = log.gyro[k][a];
            for (int i = 0; i < 4; ++i) rows[5 + i][k] = log.omega_cmd[k][i];
        }
    }

    const std::size_t count = window_count(n, cfg);
    std::vector<Window> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t start = j * cfg.stride;  // end = start + T - 1
        Window& w = out[j];
        w.label = log.label;
        w.domain = log.domain;
        w.data.resize(C * T);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t t = 0; t < T; ++t) {
                const double v = rows[c][start + t];
                if (!std::isfinite(v)) throw InputDomainError("build_windows: non-finite value in log");
                w.data[c * T + t] = static_cast<float>(v);
            }
    }
    return out;
}

Normalizer::Normalizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), std_(std::move(stddev)) {
    if (mean_.size() != std_.size()) throw ShapeError("normalizer: mean and std differ in length");
    for (double s : std_)
        if (!(s > 0) || !std::isfinite(s)) throw FittingError("normalizer: std must be positive");
}

Normalizer Normalizer::fit(std::span<const float> data, std::size_t n, std::size_t channels, std::size_t len) {
    if (n == 0 || channels == 0 || len == 0) throw FittingError("normalizer: nothing to fit");
    if (data.size() != n * channels * len) throw ShapeError("normalizer: buffer size does not match n x C x T");
    std::vector<double> mean(channels, 0.0), var(channels, 0.0);
    const double count = double(n) * double(len);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < channels; ++c) {
            const float* row = data.data() + (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) mean[c] += row[t];
        }
    for (auto& m : mean) m /= count;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < channels; ++c) {
            const float* row = data.data() + (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) {
                const double e = row[t] - mean[c];
                var[c] += e * e;
            }
        }
    std::vector<double> sd(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        sd[c] = std::sqrt(var[c] / count);
        if (!(sd[c] > 1e-12 * std::max(1.0, std::abs(mean[c]))))
            throw FittingError("normalizer: channel " + std::to_string(c) + " has zero variance");
    }
    return Normalizer(std::move(mean), std::move(sd));
}

Normalizer Normalizer::fit(std::span<const Window> windows, std::size_t channels) {
    if (windows.empty()) throw FittingError("normalizer: no windows to fit");
    const std::size_t len = windows.front().data.size() / channels;
    std::vector<float> flat;
    flat.reserve(windows.size() * channels * len);
    for (const auto& w : windows) {
        if (w.domain != quadsim::Domain::Source)
            throw InputDomainError("normalizer: statistics must come from source-domain windows only");
        if (w.data.size() != channels * len) throw ShapeError("normalizer: windows differ in shape");
        flat.insert(flat.end(), w.data.begin(), w.data.end());
    }
    return fit(flat, windows.size(), channels, len);
}

void Normalizer::apply(std::span<float> data, std::size_t len) const {
    const std::size_t C = channels();
    if (C == 0 || len == 0 || data.size() % (C * len) != 0)
        throw ShapeError("normalizer: buffer is not a whole number of " + std::to_string(C) + " x " +
                         std::to_string(len) + " windows");
    const std::size_t n = data.size() / (C * len);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < C; ++c) {
            float* row = data.data() + (i * C + c) * len;
            const double m = mean_[c], inv = 1.0 / std_[c];
            for (std::size_t t = 0; t < len; ++t) row[t] = static_cast<float>((row[t] - m) * inv);
        }
}

Window Normalizer::apply(const Window& w) const {
    Window out = w;
    apply(out.data, w.data.size() / channels());
    return out;
}

}  // namespace qfd
