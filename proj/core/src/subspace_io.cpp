#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "aerorecog/errors.hpp"
#include "aerorecog/subspace.hpp"

namespace aerorecog {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'B', '1', '\0', '\0', '\0', '\0'};

// Payload doubles are little-endian on disk; byte-swap on big-endian hosts.
void write_doubles_le(std::ofstream& out, const double* data, size_t count) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), std::streamsize(count * 8));
    } else {
        for (size_t i = 0; i < count; ++i) {
            uint64_t bits;
            std::memcpy(&bits, &data[i], 8);
            char buf[8];
            for (int b = 0; b < 8; ++b) buf[b] = char((bits >> (8 * b)) & 0xff);
            out.write(buf, 8);
        }
    }
}

void read_doubles_le(std::ifstream& in, double* data, size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), std::streamsize(count * 8));
    } else {
        for (size_t i = 0; i < count; ++i) {
            char buf[8];
            in.read(buf, 8);
            uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= uint64_t(uint8_t(buf[b])) << (8 * b);
            std::memcpy(&data[i], &bits, 8);
        }
    }
}

}  // namespace

void save_subspace(const Subspace& s, const std::filesystem::path& path,
                   const std::string& source_id,
                   const std::map<std::string, std::string>& extra) {
    nlohmann::json header;
    header["ambient"] = s.ambient();
    header["d"] = s.dimension();
    header["energy"] = s.energy;
    header["has_mean"] = s.mean.size() > 0;
    header["source"] = source_id;
    header["creator"] = "aerorecog 0.1.0";
    for (const auto& [k, v] : extra) header[k] = v;
    const std::string header_bytes = header.dump();
    if (header_bytes.size() > UINT32_MAX)
        throw IoError("subspace header too large");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic, 8);
    const uint32_t len = uint32_t(header_bytes.size());
    char lenbuf[4] = {char(len & 0xff), char((len >> 8) & 0xff), char((len >> 16) & 0xff),
                      char((len >> 24) & 0xff)};
    out.write(lenbuf, 4);
    out.write(header_bytes.data(), std::streamsize(header_bytes.size()));
    write_doubles_le(out, s.basis.data(), size_t(s.basis.size()));  // column-major
    if (s.mean.size() > 0) write_doubles_le(out, s.mean.data(), size_t(s.mean.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

LoadedSubspace load_subspace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError(path.string() + ": not a subspace file (bad magic)");

    char lenbuf[4];
    in.read(lenbuf, 4);
    if (!in) throw IoError(path.string() + ": truncated header length");
    uint32_t len = 0;
    for (int b = 0; b < 4; ++b) len |= uint32_t(uint8_t(lenbuf[b])) << (8 * b);

    std::string header_bytes(len, '\0');
    in.read(header_bytes.data(), std::streamsize(len));
    if (!in) throw IoError(path.string() + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_bytes);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": malformed header: " + e.what());
    }
    if (!header.contains("ambient") || !header.contains("d"))
        throw IoError(path.string() + ": header missing dimensions");

    LoadedSubspace out;
    const long ambient = header["ambient"].get<long>();
    const long d = header["d"].get<long>();
    if (ambient <= 0 || d <= 0 || d > ambient)
        throw IoError(path.string() + ": implausible dimensions");
    out.subspace.energy = header.value("energy", 0.0);
    out.source_id = header.value("source", std::string{});
    for (const auto& [k, v] : header.items())
        if (v.is_string()) out.header[k] = v.get<std::string>();

    out.subspace.basis.resize(ambient, d);
    read_doubles_le(in, out.subspace.basis.data(), size_t(ambient * d));
    if (!in) throw IoError(path.string() + ": truncated basis payload");
    if (header.value("has_mean", false)) {
        out.subspace.mean.resize(ambient);
        read_doubles_le(in, out.subspace.mean.data(), size_t(ambient));
        if (!in) throw IoError(path.string() + ": truncated mean payload");
    }
    return out;
}

}  // namespace aerorecog
