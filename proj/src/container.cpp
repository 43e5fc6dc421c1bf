#include "qfd/container.hpp"

#include "qfd/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qfd::container {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::span<const std::byte> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::byte b : bytes) {
        h ^= std::to_integer<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    if (s.size() != 16) throw FormatError("manifest: checksum '" + s + "' is not 16 hex digits");
    std::uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= std::uint64_t(c - '0');
        else if (c >= 'a' && c <= 'f') v |= std::uint64_t(c - 'a' + 10);
        else throw FormatError("manifest: checksum '" + s + "' is not hex");
    }
    return v;
}

void write_bytes(const fs::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path.string());
}

std::vector<std::byte> read_bytes(const fs::path& path, std::size_t expected_size, std::uint64_t expected_checksum) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw FormatError("cannot open " + path.string());
    const auto size = static_cast<std::size_t>(in.tellg());
    if (size < expected_size)
        throw TruncatedFileError(path.string() + ": " + std::to_string(size) + " bytes, manifest implies " +
                                 std::to_string(expected_size));
    if (size > expected_size)
        throw CountMismatchError(path.string() + ": " + std::to_string(size) + " bytes, manifest implies " +
                                 std::to_string(expected_size));
    std::vector<std::byte> bytes(size);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw FormatError("read failed: " + path.string());
    if (fnv1a(bytes) != expected_checksum)
        throw ChecksumMismatchError(path.string() + ": checksum " + hex64(fnv1a(bytes)) + " does not match manifest " +
                                    hex64(expected_checksum));
    return bytes;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw FormatError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_manifest(const fs::path& dir, const std::string& format, nlohmann::json manifest) {
    fs::create_directories(dir);
    manifest["format"] = format;
    manifest["version"] = kVersion;
    write_json(dir / kManifest, manifest);
}

nlohmann::json read_manifest(const fs::path& dir, const std::string& format) {
    auto j = read_json(dir / kManifest);
    const auto name = field<std::string>(j, "format");
    if (name != format) throw FormatError(dir.string() + ": expected a " + format + " container, found " + name);
    const auto version = field<int>(j, "version");
    if (version != kVersion)
        throw VersionMismatchError(dir.string() + ": format version " + std::to_string(version) + ", reader supports " +
                                   std::to_string(kVersion));
    return j;
}

}  // namespace qfd::container
