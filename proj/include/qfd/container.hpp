#pragma once

// Shared on-disk conventions: a directory holding manifest.json plus flat
// little-endian binary arrays. Manifests carry a format name, a version and
// an FNV-1a 64 checksum per array.

#include <json.hpp>

#include "qfd/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qfd::container {

static_assert(std::endian::native == std::endian::little, "container files assume a little-endian host");

inline constexpr int kVersion = 1;
inline constexpr char kManifest[] = "manifest.json";

std::uint64_t fnv1a(std::span<const std::byte> bytes);

template <typename T>
std::uint64_t checksum(std::span<const T> values) {
    return fnv1a(std::as_bytes(values));
}

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Writes the manifest of `dir` after stamping format and version.
void write_manifest(const std::filesystem::path& dir, const std::string& format, nlohmann::json manifest);
// Reads and checks format name and version (VersionMismatchError on a version skew).
nlohmann::json read_manifest(const std::filesystem::path& dir, const std::string& format);

void write_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

template <typename T>
void write_array(const std::filesystem::path& path, std::span<const T> values) {
    write_bytes(path, std::as_bytes(values));
}

// Reads exactly `count` elements. A short file is TruncatedFileError, a long
// one CountMismatchError, and a checksum mismatch ChecksumMismatchError.
std::vector<std::byte> read_bytes(const std::filesystem::path& path, std::size_t expected_size,
                                  std::uint64_t expected_checksum);

template <typename T>
std::vector<T> read_array(const std::filesystem::path& path, std::size_t count, std::uint64_t expected_checksum) {
    const auto bytes = read_bytes(path, count * sizeof(T), expected_checksum);
    std::vector<T> out(count);
    if (count) std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

// Typed field access that reports the manifest key on failure.
template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("manifest: missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: bad value for '") + key + "': " + e.what());
    }
}

}  // namespace qfd::container
