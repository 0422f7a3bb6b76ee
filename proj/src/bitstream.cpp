#include "dvc/bitstream.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dvc {

namespace {

constexpr char kMagic[4] = {'D', 'V', 'C', '1'};

struct ByteWriter {
    std::vector<uint8_t>& out;
    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(static_cast<uint8_t>(v));
        out.push_back(static_cast<uint8_t>(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void bytes(const std::vector<uint8_t>& b) { out.insert(out.end(), b.begin(), b.end()); }
};

struct ByteReader {
    const uint8_t* p;
    const uint8_t* end;
    void need(size_t n) const {
        if (static_cast<size_t>(end - p) < n) throw std::runtime_error("bitstream: truncated");
    }
    uint8_t u8() {
        need(1);
        return *p++;
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
        p += 4;
        return v;
    }
    std::vector<uint8_t> bytes(size_t n) {
        need(n);
        std::vector<uint8_t> b(p, p + n);
        p += n;
        return b;
    }
};

const std::array<uint32_t, 256>& crc_table() {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    return table;
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed) {
    uint32_t c = seed ^ 0xFFFFFFFFu;
    const auto& t = crc_table();
    for (size_t i = 0; i < n; ++i) c = t[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

int StreamHeader::vmax_for(LatentGroup g) const {
    for (const auto& [id, v] : vmax)
        if (id == static_cast<uint8_t>(g)) return static_cast<int>(v);
    throw std::runtime_error("bitstream: missing V_max entry for group");
}

std::vector<uint8_t> write_bitstream(const StreamHeader& header,
                                     const std::vector<EncodedFrame>& frames) {
    if (frames.size() != header.num_frames)
        throw std::invalid_argument("write_bitstream: frame count mismatch");
    std::vector<uint8_t> out;
    ByteWriter w{out};
    out.insert(out.end(), kMagic, kMagic + 4);
    w.u8(header.version);
    w.u16(header.width);
    w.u16(header.height);
    w.u8(header.gop_size);
    w.u16(header.num_frames);
    w.u8(header.lambda_id);
    w.u8(static_cast<uint8_t>(header.vmax.size()));
    for (const auto& [id, v] : header.vmax) {
        w.u8(id);
        w.u16(v);
    }
    for (const auto& f : frames) {
        if (f.type == FrameType::Intra && !f.motion_payload.empty())
            throw std::invalid_argument("write_bitstream: intra frame with motion payload");
        const size_t rec_start = out.size();
        w.u8(static_cast<uint8_t>(f.type));
        w.u32(static_cast<uint32_t>(f.motion_payload.size()));
        w.u32(static_cast<uint32_t>(f.residual_payload.size()));
        w.bytes(f.motion_payload);
        w.bytes(f.residual_payload);
        w.u32(crc32(out.data() + rec_start, out.size() - rec_start));
    }
    return out;
}

std::pair<StreamHeader, std::vector<EncodedFrame>> read_bitstream(
    const std::vector<uint8_t>& bytes) {
    ByteReader r{bytes.data(), bytes.data() + bytes.size()};
    r.need(4);
    if (std::memcmp(r.p, kMagic, 4) != 0) throw std::runtime_error("bitstream: bad magic");
    r.p += 4;
    StreamHeader h;
    h.version = r.u8();
    if (h.version != 1) throw std::runtime_error("bitstream: unsupported version");
    h.width = r.u16();
    h.height = r.u16();
    h.gop_size = r.u8();
    h.num_frames = r.u16();
    h.lambda_id = r.u8();
    const int ngroups = r.u8();
    for (int i = 0; i < ngroups; ++i) {
        const uint8_t id = r.u8();
        const uint16_t v = r.u16();
        h.vmax.emplace_back(id, v);
    }
    std::vector<EncodedFrame> frames;
    frames.reserve(h.num_frames);
    for (int i = 0; i < h.num_frames; ++i) {
        const uint8_t* rec_start = r.p;
        EncodedFrame f;
        const uint8_t type = r.u8();
        if (type > 1) throw std::runtime_error("bitstream: bad frame type");
        f.type = static_cast<FrameType>(type);
        const uint32_t mlen = r.u32();
        const uint32_t rlen = r.u32();
        f.motion_payload = r.bytes(mlen);
        f.residual_payload = r.bytes(rlen);
        const uint32_t expect = crc32(rec_start, static_cast<size_t>(r.p - rec_start));
        const uint32_t got = r.u32();
        if (expect != got) throw std::runtime_error("bitstream: frame crc mismatch");
        if (f.type == FrameType::Intra && !f.motion_payload.empty())
            throw std::runtime_error("bitstream: intra frame with motion payload");
        frames.push_back(std::move(f));
    }
    return {h, frames};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot open: " + path);
    const std::streamsize n = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) throw std::runtime_error("read failed: " + path);
    return bytes;
}

}  // namespace dvc
