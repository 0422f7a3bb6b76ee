#include "dvc/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dvc {

namespace {
constexpr uint32_t kTop = 1u << 24;
}

SymbolTable::SymbolTable(std::vector<uint32_t> freqs) : freq_(std::move(freqs)) {
    cum_.resize(freq_.size() + 1);
    uint32_t acc = 0;
    for (size_t i = 0; i < freq_.size(); ++i) {
        if (freq_[i] == 0) throw std::invalid_argument("SymbolTable: zero count");
        cum_[i] = acc;
        acc += freq_[i];
    }
    cum_[freq_.size()] = acc;
    if (acc != kTotal) throw std::invalid_argument("SymbolTable: counts must sum to 2^16");
}

SymbolTable SymbolTable::from_pmf(const std::vector<double>& pmf) {
    const size_t n = pmf.size();
    if (n == 0 || n > kTotal) throw std::invalid_argument("SymbolTable: bad pmf size");
    const uint32_t budget = kTotal - static_cast<uint32_t>(n);  // one reserved per symbol
    std::vector<uint32_t> f(n);
    uint64_t sum = 0;
    size_t argmax = 0;
    for (size_t i = 0; i < n; ++i) {
        double p = pmf[i];
        if (!(p >= 0.0)) p = 0.0;
        if (p > 1.0) p = 1.0;
        f[i] = 1u + static_cast<uint32_t>(p * budget);
        sum += f[i];
        if (pmf[i] > pmf[argmax]) argmax = i;
    }
    // exact total: dump slack on the most probable symbol, or claw back
    while (sum > kTotal) {
        for (size_t i = 0; i < n && sum > kTotal; ++i) {
            if (f[i] > 1) {
                --f[i];
                --sum;
            }
        }
    }
    if (sum < kTotal) f[argmax] += static_cast<uint32_t>(kTotal - sum);
    return SymbolTable(std::move(f));
}

SymbolTable SymbolTable::flat(int nsyms) {
    if (nsyms <= 0 || nsyms > static_cast<int>(kTotal))
        throw std::invalid_argument("SymbolTable: bad size");
    std::vector<uint32_t> f(static_cast<size_t>(nsyms), kTotal / static_cast<uint32_t>(nsyms));
    uint32_t rem = kTotal % static_cast<uint32_t>(nsyms);
    for (uint32_t i = 0; i < rem; ++i) ++f[i];
    return SymbolTable(std::move(f));
}

int SymbolTable::find(uint32_t cum_target) const {
    // greatest s with cum_[s] <= cum_target; cum_ has nsyms+1 entries
    int lo = 0, hi = nsyms() - 1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (cum_[static_cast<size_t>(mid)] <= cum_target)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

void RangeEncoder::shift_low() {
    if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        uint8_t carry = static_cast<uint8_t>(low_ >> 32);
        uint8_t temp = cache_;
        do {
            out_.push_back(static_cast<uint8_t>(temp + carry));
            temp = 0xFF;
        } while (--cache_size_ != 0);
        cache_ = static_cast<uint8_t>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::encode(uint32_t cum, uint32_t freq, uint32_t total) {
    const uint32_t r = range_ / total;
    low_ += static_cast<uint64_t>(r) * cum;
    range_ = r * freq;
    while (range_ < kTop) {
        range_ <<= 8;
        shift_low();
    }
}

std::vector<uint8_t> RangeEncoder::finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t size) : p_(data), end_(data + size) {
    next_byte();  // matches the encoder's initial cache byte
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
    if (p_ >= end_) throw std::runtime_error("range decoder: payload truncated");
    return *p_++;
}

uint32_t RangeDecoder::decode_freq(uint32_t total) {
    r_ = range_ / total;
    const uint32_t f = code_ / r_;
    return f < total - 1 ? f : total - 1;
}

void RangeDecoder::decode_update(uint32_t cum, uint32_t freq) {
    code_ -= cum * r_;
    range_ = r_ * freq;
    while (range_ < kTop) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
}

int RangeDecoder::decode_symbol(const SymbolTable& t) {
    const uint32_t f = decode_freq(SymbolTable::kTotal);
    const int s = t.find(f);
    decode_update(t.cum(s), t.freq(s));
    return s;
}

namespace {

const SymbolTable& byte_table() {
    static const SymbolTable t = SymbolTable::flat(256);
    return t;
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<uint8_t> encode_latent(const std::vector<int32_t>& values, int channels, int64_t plane,
                                   const std::vector<SymbolTable>& tables, int vmax) {
    if (static_cast<int64_t>(values.size()) != channels * plane)
        throw std::invalid_argument("encode_latent: count mismatch");
    if (static_cast<int>(tables.size()) != channels)
        throw std::invalid_argument("encode_latent: table count mismatch");
    std::vector<uint8_t> out;
    put_u32(out, static_cast<uint32_t>(values.size()));
    if (values.empty()) return out;

    const int escape = 2 * vmax + 1;
    RangeEncoder enc;
    for (int c = 0; c < channels; ++c) {
        const SymbolTable& t = tables[static_cast<size_t>(c)];
        for (int64_t i = 0; i < plane; ++i) {
            const int32_t v = values[static_cast<size_t>(c * plane + i)];
            if (v >= -vmax && v <= vmax) {
                enc.encode_symbol(t, v + vmax);
            } else {
                enc.encode_symbol(t, escape);
                const uint32_t raw = static_cast<uint32_t>(v);
                for (int k = 0; k < 4; ++k)
                    enc.encode_symbol(byte_table(), static_cast<int>((raw >> (8 * k)) & 0xFF));
            }
        }
    }
    auto body = enc.finish();
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

std::vector<int32_t> decode_latent(const std::vector<uint8_t>& payload, int channels, int64_t plane,
                                   const std::vector<SymbolTable>& tables, int vmax) {
    if (payload.size() < 4) throw std::runtime_error("decode_latent: payload too short");
    const uint32_t count = get_u32(payload.data());
    if (count != static_cast<uint64_t>(channels) * static_cast<uint64_t>(plane))
        throw std::runtime_error("decode_latent: payload element count mismatch");
    std::vector<int32_t> values(count);
    if (count == 0) return values;

    const int escape = 2 * vmax + 1;
    RangeDecoder dec(payload.data() + 4, payload.size() - 4);
    for (int c = 0; c < channels; ++c) {
        const SymbolTable& t = tables[static_cast<size_t>(c)];
        for (int64_t i = 0; i < plane; ++i) {
            int s = dec.decode_symbol(t);
            int32_t v;
            if (s == escape) {
                uint32_t raw = 0;
                for (int k = 0; k < 4; ++k)
                    raw |= static_cast<uint32_t>(dec.decode_symbol(byte_table())) << (8 * k);
                v = static_cast<int32_t>(raw);
            } else {
                v = s - vmax;
            }
            values[static_cast<size_t>(c * plane + i)] = v;
        }
    }
    return values;
}

}  // namespace dvc
