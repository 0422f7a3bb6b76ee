#include <doctest.h>

#include <cmath>

#include "dvc/metrics.hpp"
#include "dvc/pipeline.hpp"
#include "dvc/synthetic.hpp"

using namespace dvc;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.flow.levels = 3;
    cfg.mc.channels = 16;
    cfg.mc.num_residual_blocks = 1;
    cfg.residual.filters = 32;
    cfg.residual.latent_channels = 16;
    cfg.init_seed = 321;
    return cfg;
}

std::vector<Tensor> small_sequence(int frames, int size, uint64_t seed = 11) {
    SynthConfig s;
    s.frames = frames;
    s.width = size;
    s.height = size;
    s.seed = seed;
    s.max_shift = 1.5f;
    return synth_sequence(s);
}

double max_abs_diff(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].same_shape(b[i]));
        for (int64_t k = 0; k < a[i].numel(); ++k)
            m = std::max(m, static_cast<double>(std::abs(a[i].at(k) - b[i].at(k))));
    }
    return m;
}

}  // namespace

TEST_CASE("encode/decode: decoder output equals the encoder-side reconstruction exactly") {
    CodecModel model(small_config());
    const auto frames = small_sequence(6, 48);
    const auto enc = encode_video(frames, model, 3);
    REQUIRE(enc.report.frames.size() == 6);
    const auto dec = decode_video(enc.bitstream, model);
    CHECK(max_abs_diff(dec, enc.reconstructions) == 0.0);
    // decode twice: deterministic
    const auto dec2 = decode_video(enc.bitstream, model);
    CHECK(max_abs_diff(dec, dec2) == 0.0);
}

TEST_CASE("encode: gop structure, payloads and report integrity") {
    CodecModel model(small_config());
    const auto frames = small_sequence(5, 48);
    const auto enc = encode_video(frames, model, 3);

    const auto [header, coded] = read_bitstream(enc.bitstream);
    CHECK(header.width == 48);
    CHECK(header.height == 48);
    CHECK(header.gop_size == 3);
    REQUIRE(coded.size() == 5);
    CHECK(coded[0].type == FrameType::Intra);
    CHECK(coded[1].type == FrameType::Predicted);
    CHECK(coded[3].type == FrameType::Intra);  // second gop
    CHECK(coded[0].motion_payload.empty());
    CHECK(!coded[1].motion_payload.empty());

    for (size_t i = 0; i < coded.size(); ++i) {
        const auto& fb = enc.report.frames[i];
        CHECK(fb.actual_motion_bits == static_cast<int64_t>(coded[i].motion_payload.size()) * 8);
        CHECK(fb.actual_residual_bits ==
              static_cast<int64_t>(coded[i].residual_payload.size()) * 8);
        CHECK(fb.est_residual_bits > 0.0);
    }
    CHECK(enc.report.bpp_actual() > 0.0);
    CHECK(enc.report.motion_fraction() > 0.0);
    CHECK(enc.report.motion_fraction() < 1.0);
}

TEST_CASE("encode: single frame video has one intra frame and zero motion bits") {
    CodecModel model(small_config());
    const auto frames = small_sequence(1, 48);
    const auto enc = encode_video(frames, model, 10);
    REQUIRE(enc.report.frames.size() == 1);
    CHECK(enc.report.frames[0].type == FrameType::Intra);
    CHECK(enc.report.frames[0].actual_motion_bits == 0);
    CHECK(enc.report.motion_fraction() == 0.0);
    const auto dec = decode_video(enc.bitstream, model);
    CHECK(max_abs_diff(dec, enc.reconstructions) == 0.0);
}

TEST_CASE("encode: non-multiple-of-16 dims pad and crop back to original size") {
    CodecModel model(small_config());
    SynthConfig s;
    s.frames = 3;
    s.width = 52;  // pads to 64
    s.height = 44;
    s.seed = 12;
    const auto frames = synth_sequence(s);
    const auto enc = encode_video(frames, model, 3);
    CHECK(enc.reconstructions[0].shape() == std::vector<int>{3, 44, 52});
    const auto dec = decode_video(enc.bitstream, model);
    CHECK(dec[0].shape() == std::vector<int>{3, 44, 52});
    CHECK(max_abs_diff(dec, enc.reconstructions) == 0.0);
    // bpp divides by the original dims
    const auto [header, coded] = read_bitstream(enc.bitstream);
    CHECK(header.width == 52);
    CHECK(header.height == 44);
}

TEST_CASE("decode: mismatched checkpoint is rejected") {
    CodecModel model(small_config());
    const auto frames = small_sequence(4, 48);
    const auto enc = encode_video(frames, model, 2);

    ModelConfig other = small_config();
    other.residual.latent_channels = 24;  // different latent geometry
    CodecModel wrong(other);
    CHECK_THROWS(decode_video(enc.bitstream, wrong));

    auto truncated = enc.bitstream;
    truncated.resize(truncated.size() - 5);
    CHECK_THROWS(decode_video(truncated, model));
}

TEST_CASE("ablations: disabled motion codes every frame against a zero prediction") {
    ModelConfig cfg = small_config();
    cfg.ablation.use_motion = false;
    CodecModel model(cfg);
    const auto frames = small_sequence(4, 48);
    const auto enc = encode_video(frames, model, 4);
    for (size_t i = 1; i < enc.report.frames.size(); ++i) {
        CHECK(enc.report.frames[i].actual_motion_bits == 32);  // count-only payload
        CHECK(enc.report.frames[i].est_motion_bits == 0.0);
    }
    const auto dec = decode_video(enc.bitstream, model);
    CHECK(max_abs_diff(dec, enc.reconstructions) == 0.0);
}

TEST_CASE("ablations: raw quarter-pel flow coding roundtrips") {
    ModelConfig cfg = small_config();
    cfg.ablation.use_mv_codec = false;
    CodecModel model(cfg);
    const auto frames = small_sequence(4, 48);
    const auto enc = encode_video(frames, model, 4);
    const auto dec = decode_video(enc.bitstream, model);
    CHECK(max_abs_diff(dec, enc.reconstructions) == 0.0);

    // the raw-flow stream cannot be decoded by a learned-mv model
    ModelConfig normal = small_config();
    CodecModel wrong(normal);
    CHECK_THROWS(decode_video(enc.bitstream, wrong));
}

TEST_CASE("ablations: warp-only prediction (no mc net) roundtrips") {
    ModelConfig cfg = small_config();
    cfg.ablation.use_mc_net = false;
    CodecModel model(cfg);
    const auto frames = small_sequence(4, 48);
    const auto enc = encode_video(frames, model, 4);
    const auto dec = decode_video(enc.bitstream, model);
    CHECK(max_abs_diff(dec, enc.reconstructions) == 0.0);
    for (size_t i = 1; i < enc.report.frames.size(); ++i)
        CHECK(enc.report.frames[i].psnr_warped ==
              doctest::Approx(enc.report.frames[i].psnr_predicted));
}

TEST_CASE("decode_video_detailed: flows and bit estimates line up with the encoder") {
    CodecModel model(small_config());
    const auto frames = small_sequence(4, 48);
    const auto enc = encode_video(frames, model, 4);
    const auto detail = decode_video_detailed(enc.bitstream, model, true);
    REQUIRE(detail.frames.size() == 4);
    REQUIRE(detail.flows.size() == 4);
    CHECK(!detail.flows[0].defined());
    for (size_t i = 1; i < 4; ++i) {
        CHECK(detail.flows[i].defined());
        CHECK(detail.frame_bits[i].est_motion_bits ==
              doctest::Approx(enc.report.frames[i].est_motion_bits).epsilon(1e-9));
        CHECK(detail.frame_bits[i].est_residual_bits ==
              doctest::Approx(enc.report.frames[i].est_residual_bits).epsilon(1e-9));
    }
}

TEST_CASE("analyze_flow: zero flow and constant flow histograms") {
    Tensor zero = Tensor::zeros({2, 8, 8});
    const auto s0 = analyze_flow(zero);
    CHECK(s0.zero_fraction == 1.0);
    CHECK(s0.histogram[0] == 64);

    Tensor c({2, 8, 8});
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            c(0, y, x) = 2.0f;
            c(1, y, x) = 0.0f;
        }
    const auto s2 = analyze_flow(c);
    CHECK(s2.zero_fraction == 0.0);
    // |flow| = 2.0 lands in bin [2.0, 2.25)
    REQUIRE(s2.histogram.size() == 9);
    CHECK(s2.histogram[8] == 64);
}
