#include <doctest.h>

#include <cmath>

#include "dvc/entropy.hpp"
#include "dvc/pipeline.hpp"
#include "dvc/range_coder.hpp"

using namespace dvc;

namespace {

std::vector<SymbolTable> random_tables(Rng& rng, int channels, int vmax) {
    std::vector<SymbolTable> tables;
    const int n = 2 * vmax + 2;
    for (int c = 0; c < channels; ++c) {
        std::vector<double> pmf(static_cast<size_t>(n));
        double sum = 0.0;
        for (auto& p : pmf) {
            p = rng.uniform(0.0, 1.0);
            p = p * p * p;  // skewed
            sum += p;
        }
        for (auto& p : pmf) p /= sum;
        tables.push_back(SymbolTable::from_pmf(pmf));
    }
    return tables;
}

}  // namespace

TEST_CASE("symbol tables: counts sum to 2^16 with no zero entries") {
    Rng rng(51);
    for (int vmax : {0, 1, 7, 200}) {
        const auto tables = random_tables(rng, 3, vmax);
        for (const auto& t : tables) {
            uint32_t sum = 0;
            for (int s = 0; s < t.nsyms(); ++s) {
                CHECK(t.freq(s) >= 1);
                sum += t.freq(s);
            }
            CHECK(sum == SymbolTable::kTotal);
            // find() inverts cum()
            for (int s = 0; s < t.nsyms(); ++s) {
                CHECK(t.find(t.cum(s)) == s);
                CHECK(t.find(t.cum(s) + t.freq(s) - 1) == s);
            }
        }
    }
    CHECK_THROWS(SymbolTable(std::vector<uint32_t>{1, 2, 3}));  // wrong total
}

TEST_CASE("range coder: random grids roundtrip losslessly") {
    Rng rng(52);
    for (int iter = 0; iter < 200; ++iter) {
        const int channels = rng.uniform_int(1, 5);
        const int vmax = rng.uniform_int(0, 24);
        const int64_t plane = rng.uniform_int(1, 400);
        const auto tables = random_tables(rng, channels, vmax);
        std::vector<int32_t> values(static_cast<size_t>(channels * plane));
        for (auto& v : values) {
            if (rng.uniform() < 0.02)
                v = rng.uniform_int(-100000, 100000);  // escape path
            else
                v = rng.uniform_int(-vmax, vmax);
        }
        const auto payload = encode_latent(values, channels, plane, tables, vmax);
        const auto decoded = decode_latent(payload, channels, plane, tables, vmax);
        REQUIRE(decoded.size() == values.size());
        for (size_t i = 0; i < values.size(); ++i) REQUIRE(decoded[i] == values[i]);
    }
}

TEST_CASE("range coder: empty grid is a header-only payload") {
    const auto payload = encode_latent({}, 0, 0, {}, 5);
    CHECK(payload.size() == 4);
    CHECK(decode_latent(payload, 0, 0, {}, 5).empty());
}

TEST_CASE("range coder: wrong shape is rejected") {
    Rng rng(53);
    const auto tables = random_tables(rng, 2, 4);
    std::vector<int32_t> values(2 * 64, 1);
    const auto payload = encode_latent(values, 2, 64, tables, 4);
    CHECK_THROWS(decode_latent(payload, 2, 32, tables, 4));
    CHECK_THROWS(decode_latent(std::vector<uint8_t>{1, 2}, 2, 64, tables, 4));
}

TEST_CASE("range coder: truncated payload raises instead of looping") {
    Rng rng(54);
    const auto tables = random_tables(rng, 1, 8);
    std::vector<int32_t> values(512);
    for (auto& v : values) v = rng.uniform_int(-8, 8);
    auto payload = encode_latent(values, 1, 512, tables, 8);
    payload.resize(payload.size() / 2);
    CHECK_THROWS(decode_latent(payload, 1, 512, tables, 8));
}

TEST_CASE("range coder: actual bytes track the model's own bit estimate") {
    Rng rng(55);
    DensityConfig dcfg;
    FactorizedDensity density(4, dcfg, rng);
    const int vmax = 15;
    const auto tables = density_tables(density, vmax);

    const int64_t plane = 2048;  // 8192 symbols total
    std::vector<int32_t> values(static_cast<size_t>(4 * plane));
    // sample from each channel's own table: model-distributed data
    for (int c = 0; c < 4; ++c) {
        const auto& t = tables[static_cast<size_t>(c)];
        for (int64_t i = 0; i < plane; ++i) {
            const uint32_t r = static_cast<uint32_t>(rng.next_u64() & 0xFFFF);
            int s = t.find(r);
            if (s == 2 * vmax + 1) s = vmax;  // fold escapes into 0
            values[static_cast<size_t>(c * plane + i)] = s - vmax;
        }
    }
    Tensor latent({4, 1, static_cast<int>(plane)});
    for (size_t i = 0; i < values.size(); ++i) latent.at(static_cast<int64_t>(i)) = static_cast<float>(values[i]);

    const double est = density.bits_tensor(latent);
    const auto payload = encode_latent(values, 4, plane, tables, vmax);
    const double actual = static_cast<double>(payload.size()) * 8.0;
    CHECK(std::abs(actual - est) <= 0.02 * est + 64.0 * 8.0);
}
