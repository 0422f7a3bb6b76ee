#pragma once

#include <optional>

#include "dvc/bitstream.hpp"
#include "dvc/model.hpp"
#include "dvc/range_coder.hpp"

namespace dvc {

struct FrameBits {
    FrameType type = FrameType::Intra;
    double est_motion_bits = 0.0;
    double est_residual_bits = 0.0;
    int64_t actual_motion_bits = 0;
    int64_t actual_residual_bits = 0;
    // encoder-side quality probes (vs the original frame)
    double psnr_recon = 0.0;
    double psnr_warped = 0.0;     // warp-only prediction, P frames
    double psnr_predicted = 0.0;  // after motion compensation, P frames
};

struct BitrateReport {
    int width = 0, height = 0;  // original dims; bpp always divides by these
    std::vector<FrameBits> frames;

    int64_t actual_bits() const;
    int64_t actual_motion_bits() const;
    double estimated_bits() const;
    double estimated_motion_bits() const;
    double bpp_actual() const;
    double bpp_estimated() const;
    double bpp_motion_actual() const;
    double motion_fraction() const;  // share of motion bits in the whole stream
};

struct EncodeResult {
    std::vector<uint8_t> bitstream;
    BitrateReport report;
    std::vector<Tensor> reconstructions;  // encoder-side, cropped to original dims
    std::vector<Tensor> decoded_flows;    // per frame; empty tensor for intra frames
};

// Full inference-path encoder: integer latents, learned tables, range-coded
// payloads. The reported reconstructions are produced by the same decode
// routines the standalone decoder runs.
EncodeResult encode_video(const std::vector<Tensor>& frames, const CodecModel& model, int gop_size);

// Reconstruction from bitstream + weights alone.
std::vector<Tensor> decode_video(const std::vector<uint8_t>& bitstream, const CodecModel& model);

// Decoder-side detail for analysis: frames plus decoded flow fields and the
// per-frame bit split (estimates recomputed from the decoded latents when
// estimate_bits is set).
struct DecodeDetail {
    std::vector<Tensor> frames;
    std::vector<Tensor> flows;  // empty tensor for intra frames
    std::vector<FrameBits> frame_bits;
    StreamHeader header;
};
DecodeDetail decode_video_detailed(const std::vector<uint8_t>& bitstream, const CodecModel& model,
                                   bool estimate_bits);

// Per-channel coder tables for one latent group.
std::vector<SymbolTable> density_tables(const FactorizedDensity& density, int vmax);
std::vector<SymbolTable> flat_tables(int channels, int vmax);

// Flow statistics ("analyze" surface): histogram over |flow| with fixed
// 0.25px bins plus the fraction of pixels with |flow| below the first bin.
struct FlowStats {
    std::vector<int64_t> histogram;  // bin i counts |flow| in [0.25*i, 0.25*(i+1))
    double zero_fraction = 0.0;
    int64_t total = 0;
};
FlowStats analyze_flow(const Tensor& flow);
FlowStats analyze_flows(const std::vector<Tensor>& flows);

}  // namespace dvc
