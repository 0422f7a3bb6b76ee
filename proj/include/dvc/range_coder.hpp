#pragma once

#include <cstdint>
#include <vector>

namespace dvc {

// Frequency table for one channel: integer counts summing to exactly 2^16,
// every symbol >= 1 count so anything in range stays codable.
class SymbolTable {
public:
    static constexpr uint32_t kTotal = 1u << 16;

    explicit SymbolTable(std::vector<uint32_t> freqs);
    static SymbolTable from_pmf(const std::vector<double>& pmf);
    static SymbolTable flat(int nsyms);

    int nsyms() const { return static_cast<int>(freq_.size()); }
    uint32_t freq(int s) const { return freq_[static_cast<size_t>(s)]; }
    uint32_t cum(int s) const { return cum_[static_cast<size_t>(s)]; }
    int find(uint32_t cum_target) const;  // largest s with cum(s) <= cum_target

private:
    std::vector<uint32_t> freq_;
    std::vector<uint32_t> cum_;
};

class RangeEncoder {
public:
    void encode(uint32_t cum, uint32_t freq, uint32_t total);
    void encode_symbol(const SymbolTable& t, int sym) {
        encode(t.cum(sym), t.freq(sym), SymbolTable::kTotal);
    }
    std::vector<uint8_t> finish();

private:
    void shift_low();
    std::vector<uint8_t> out_;
    uint64_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint8_t cache_ = 0;
    uint64_t cache_size_ = 1;
};

class RangeDecoder {
public:
    RangeDecoder(const uint8_t* data, size_t size);

    uint32_t decode_freq(uint32_t total);
    void decode_update(uint32_t cum, uint32_t freq);
    int decode_symbol(const SymbolTable& t);

private:
    uint8_t next_byte();
    const uint8_t* p_;
    const uint8_t* end_;
    uint32_t code_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint32_t r_ = 0;
};

// Latent grid <-> payload. Values in [-vmax, vmax] are coded with the
// per-channel tables (symbol index v+vmax); anything outside is escape-coded
// as raw bytes. Payload starts with a u32 element count.
//
// tables.size() must equal `channels`; the escape symbol is table index
// 2*vmax+1. plane = elements per channel.
std::vector<uint8_t> encode_latent(const std::vector<int32_t>& values, int channels, int64_t plane,
                                   const std::vector<SymbolTable>& tables, int vmax);
std::vector<int32_t> decode_latent(const std::vector<uint8_t>& payload, int channels, int64_t plane,
                                   const std::vector<SymbolTable>& tables, int vmax);

}  // namespace dvc
