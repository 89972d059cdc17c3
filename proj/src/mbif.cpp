#include "respan/mbif.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace respan {

namespace {

constexpr char kMagic[4] = {'M', 'B', 'I', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

float f32_from_le(const unsigned char* p) {
    std::uint32_t bits = read_u32_le(p);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

} // namespace

ImageTensor read_mbif(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MbifError("cannot open '" + path.string() + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw MbifError("'" + path.string() + "': bad magic at byte offset 0");
    }
    if (bytes.size() < 20) {
        throw MbifError("'" + path.string() + "': truncated header at byte offset " +
                        std::to_string(bytes.size()));
    }
    const std::uint32_t version = read_u32_le(bytes.data() + 4);
    if (version != kVersion) {
        throw MbifError("'" + path.string() + "': unsupported version " + std::to_string(version) +
                        " at byte offset 4");
    }
    const std::uint32_t c = read_u32_le(bytes.data() + 8);
    const std::uint32_t h = read_u32_le(bytes.data() + 12);
    const std::uint32_t w = read_u32_le(bytes.data() + 16);
    if (c == 0 || h == 0 || w == 0) {
        throw MbifError("'" + path.string() + "': zero dimension in header at byte offset 8");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(c) * h * w;
    const std::uint64_t need = 20 + count * 4;
    if (bytes.size() < need) {
        throw MbifError("'" + path.string() + "': truncated payload at byte offset " +
                        std::to_string(bytes.size()) + " (expected " + std::to_string(need) +
                        " bytes)");
    }
    if (bytes.size() > need) {
        throw MbifError("'" + path.string() + "': trailing data at byte offset " +
                        std::to_string(need));
    }

    std::vector<double> data(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const float f = f32_from_le(bytes.data() + 20 + i * 4);
        if (!std::isfinite(f)) {
            throw MbifError("'" + path.string() + "': non-finite value at byte offset " +
                            std::to_string(20 + i * 4));
        }
        data[i] = static_cast<double>(f);
    }
    return ImageTensor(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w),
                       std::move(data));
}

void write_mbif(const ImageTensor& t, const std::filesystem::path& path) {
    if (t.size() == 0) throw std::invalid_argument("write_mbif: empty tensor");
    if (!all_finite(t)) throw std::invalid_argument("write_mbif: tensor contains non-finite values");

    std::string buf;
    buf.reserve(20 + t.size() * 4);
    buf.append(kMagic, 4);
    put_u32_le(buf, kVersion);
    put_u32_le(buf, static_cast<std::uint32_t>(t.bands()));
    put_u32_le(buf, static_cast<std::uint32_t>(t.height()));
    put_u32_le(buf, static_cast<std::uint32_t>(t.width()));
    for (double v : t.data()) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        put_u32_le(buf, bits);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MbifError("cannot open '" + path.string() + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw MbifError("short write to '" + path.string() + "'");
}

} // namespace respan
