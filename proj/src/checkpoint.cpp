#include "respan/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace respan {

namespace {

constexpr char kMagic[4] = {'R', 'P', 'D', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u16_le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32_le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32_le(out, bits);
}

struct Reader {
    const std::vector<unsigned char>& bytes;
    std::size_t pos = 0;
    std::string where;

    void need(std::size_t n, const char* what) {
        if (pos + n > bytes.size()) {
            throw CheckpointError(where + ": truncated while reading " + what + " at byte " +
                                  std::to_string(pos));
        }
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        const std::uint16_t v =
            static_cast<std::uint16_t>(bytes[pos]) | (static_cast<std::uint16_t>(bytes[pos + 1]) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        return f;
    }
    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
};

constexpr std::size_t kMetaLen = 6;

std::vector<float> meta_payload(const DenoiserConfig& cfg) {
    return {static_cast<float>(cfg.bands),   static_cast<float>(cfg.hidden),
            static_cast<float>(cfg.blocks),  static_cast<float>(cfg.emb_dim),
            cfg.input_is_latent ? 1.f : 0.f, cfg.use_condition ? 1.f : 0.f};
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params) {
    std::string buf;
    buf.append(kMagic, 4);
    put_u32_le(buf, kVersion);
    put_u32_le(buf, static_cast<std::uint32_t>(params.blocks.size() + 1));

    const auto write_block = [&](const std::string& name, const std::vector<std::size_t>& dims,
                                 const double* data, std::size_t count) {
        put_u16_le(buf, static_cast<std::uint16_t>(name.size()));
        buf.append(name);
        put_u32_le(buf, static_cast<std::uint32_t>(dims.size()));
        for (std::size_t d : dims) put_u32_le(buf, static_cast<std::uint32_t>(d));
        for (std::size_t i = 0; i < count; ++i) put_f32_le(buf, static_cast<float>(data[i]));
    };

    const auto meta = meta_payload(params.cfg);
    std::vector<double> meta_d(meta.begin(), meta.end());
    write_block("meta", {kMetaLen}, meta_d.data(), meta_d.size());
    for (const auto& b : params.blocks) write_block(b.name, b.dims, b.values.data(), b.count());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("short write to '" + path.string() + "'");
}

DenoiserParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path.string() + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    Reader r{bytes, 0, "'" + path.string() + "'"};

    r.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw CheckpointError(r.where + ": bad magic at byte 0");
    }
    r.pos = 4;
    const std::uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw CheckpointError(r.where + ": unsupported version " + std::to_string(version));
    }
    const std::uint32_t block_count = r.u32("block count");

    struct RawBlock {
        std::string name;
        std::vector<std::size_t> dims;
        std::vector<double> values;
    };
    std::vector<RawBlock> raw;
    raw.reserve(block_count);
    for (std::uint32_t bi = 0; bi < block_count; ++bi) {
        RawBlock b;
        const std::uint16_t name_len = r.u16("name length");
        b.name = r.str(name_len, "name");
        const std::uint32_t rank = r.u32("rank");
        std::size_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const std::uint32_t dim = r.u32("dim");
            if (dim == 0) throw CheckpointError(r.where + ": zero dimension in '" + b.name + "'");
            b.dims.push_back(dim);
            count *= dim;
        }
        b.values.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            b.values[i] = static_cast<double>(r.f32("payload"));
        }
        raw.push_back(std::move(b));
    }
    if (r.pos != bytes.size()) {
        throw CheckpointError(r.where + ": trailing data at byte " + std::to_string(r.pos));
    }

    const auto* meta = [&]() -> const RawBlock* {
        for (const auto& b : raw) {
            if (b.name == "meta") return &b;
        }
        return nullptr;
    }();
    if (!meta || meta->values.size() != kMetaLen) {
        throw CheckpointError(r.where + ": missing or malformed meta block");
    }

    DenoiserConfig cfg;
    cfg.bands = static_cast<int>(meta->values[0]);
    cfg.hidden = static_cast<int>(meta->values[1]);
    cfg.blocks = static_cast<int>(meta->values[2]);
    cfg.emb_dim = static_cast<int>(meta->values[3]);
    cfg.input_is_latent = meta->values[4] != 0.0;
    cfg.use_condition = meta->values[5] != 0.0;

    // Build the canonical layout, then fill from the named blocks.
    SeededGaussian dummy(0);
    DenoiserParams params = DenoiserParams::init(cfg, dummy);
    for (auto& b : params.blocks) {
        const RawBlock* src = nullptr;
        for (const auto& rb : raw) {
            if (rb.name == b.name) {
                src = &rb;
                break;
            }
        }
        if (!src) throw CheckpointError(r.where + ": missing parameter block '" + b.name + "'");
        if (src->dims != b.dims) {
            throw CheckpointError(r.where + ": block '" + b.name + "' has unexpected shape");
        }
        b.values = src->values;
    }
    return params;
}

} // namespace respan
