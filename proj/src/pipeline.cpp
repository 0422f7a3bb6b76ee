#include "dvc/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "dvc/entropy.hpp"
#include "dvc/frame_io.hpp"
#include "dvc/kernels.hpp"
#include "dvc/metrics.hpp"
#include "dvc/range_coder.hpp"

namespace dvc {

namespace {

constexpr int kVmaxMargin = 4;
constexpr int kVmaxCap = 32000;

int vmax_from(int max_abs) { return std::min(max_abs + kVmaxMargin, kVmaxCap); }

int track_max_abs(const Tensor& t, int acc) {
    const float* p = t.data();
    for (int64_t i = 0; i < t.numel(); ++i) {
        const int v = static_cast<int>(std::fabs(p[i]));
        if (v > acc) acc = v;
    }
    return acc;
}

struct PFrameOut {
    Tensor recon;      // clamped, padded dims
    Tensor flow;       // decoded motion field
    Tensor predicted;  // motion-compensated prediction
    Tensor warped;     // warp-only prediction
};

// The one decode path both sides run: identical inputs give identical floats.
Tensor decode_intra(const CodecModel& m, const Tensor& latent) {
    nn::NoGradGuard ng;
    return ag::clamp01(m.intra.decode(ag::leaf(latent))->value);
}

// Motion side of the decode path (shared verbatim by encoder and decoder).
PFrameOut predict_p(const CodecModel& m, const Tensor& prev_recon, const Tensor& motion_latent) {
    nn::NoGradGuard ng;
    PFrameOut out;
    const auto& ab = m.cfg.ablation;
    if (ab.use_motion) {
        if (ab.use_mv_codec) {
            out.flow = m.mv.decode(ag::leaf(motion_latent))->value;
        } else {
            Tensor f(motion_latent.shape());
            kern::ops().scale(0.25f, motion_latent.data(), f.data(), f.numel());
            out.flow = std::move(f);
        }
        out.warped = ag::warp_tensor(prev_recon, out.flow);
        if (ab.use_mc_net)
            out.predicted = m.mc.compensate(ag::leaf(prev_recon), ag::leaf(out.flow))->value;
        else
            out.predicted = out.warped;
    } else {
        out.predicted = Tensor::zeros(prev_recon.shape());
        out.warped = out.predicted;
        out.flow = Tensor::zeros({2, prev_recon.dim(1), prev_recon.dim(2)});
    }
    return out;
}

Tensor finish_p(const CodecModel& m, const Tensor& predicted, const Tensor& residual_latent) {
    nn::NoGradGuard ng;
    return reconstruct_frame(predicted, m.residual.decode(ag::leaf(residual_latent))->value);
}

struct FrameLatents {
    FrameType type;
    Tensor motion;    // undefined for intra; [2,H,W] when the mv codec is off
    Tensor residual;  // intra latent for intra frames
};

}  // namespace

std::vector<SymbolTable> density_tables(const FactorizedDensity& density, int vmax) {
    std::vector<SymbolTable> tables;
    tables.reserve(static_cast<size_t>(density.channels()));
    for (int c = 0; c < density.channels(); ++c)
        tables.push_back(SymbolTable::from_pmf(density.pmf(c, vmax)));
    return tables;
}

std::vector<SymbolTable> flat_tables(int channels, int vmax) {
    std::vector<SymbolTable> tables;
    const SymbolTable t = SymbolTable::flat(2 * vmax + 2);
    for (int c = 0; c < channels; ++c) tables.push_back(t);
    return tables;
}

int64_t BitrateReport::actual_bits() const {
    int64_t acc = 0;
    for (const auto& f : frames) acc += f.actual_motion_bits + f.actual_residual_bits;
    return acc;
}
int64_t BitrateReport::actual_motion_bits() const {
    int64_t acc = 0;
    for (const auto& f : frames) acc += f.actual_motion_bits;
    return acc;
}
double BitrateReport::estimated_bits() const {
    double acc = 0.0;
    for (const auto& f : frames) acc += f.est_motion_bits + f.est_residual_bits;
    return acc;
}
double BitrateReport::estimated_motion_bits() const {
    double acc = 0.0;
    for (const auto& f : frames) acc += f.est_motion_bits;
    return acc;
}
double BitrateReport::bpp_actual() const {
    return bpp(static_cast<uint64_t>(actual_bits()), width, height) /
           static_cast<double>(frames.empty() ? 1 : frames.size());
}
double BitrateReport::bpp_estimated() const {
    return estimated_bits() / (static_cast<double>(width) * height) /
           static_cast<double>(frames.empty() ? 1 : frames.size());
}
double BitrateReport::bpp_motion_actual() const {
    return bpp(static_cast<uint64_t>(actual_motion_bits()), width, height) /
           static_cast<double>(frames.empty() ? 1 : frames.size());
}
double BitrateReport::motion_fraction() const {
    const int64_t total = actual_bits();
    return total == 0 ? 0.0 : static_cast<double>(actual_motion_bits()) / static_cast<double>(total);
}

EncodeResult encode_video(const std::vector<Tensor>& frames, const CodecModel& model,
                          int gop_size) {
    if (frames.empty()) throw std::invalid_argument("encode_video: no frames");
    if (gop_size < 1 || gop_size > 255) throw std::invalid_argument("encode_video: bad gop size");
    if (frames.size() > 65535) throw std::invalid_argument("encode_video: too many frames");
    nn::NoGradGuard ng;

    const int W = frames[0].dim(2), H = frames[0].dim(1);
    for (const auto& f : frames)
        if (f.dim(1) != H || f.dim(2) != W)
            throw std::invalid_argument("encode_video: frames must share dimensions");

    std::vector<Tensor> padded;
    padded.reserve(frames.size());
    for (const auto& f : frames) padded.push_back(pad_to_multiple(f).pixels);

    const auto& ab = model.cfg.ablation;
    EncodeResult res;
    res.report.width = W;
    res.report.height = H;

    // pass 1: run the pipeline, collect integer latents and reconstructions
    std::vector<FrameLatents> latents(frames.size());
    int vmax_intra = 0, vmax_motion = 0, vmax_res = 0;
    Tensor prev_recon;
    for (size_t t = 0; t < padded.size(); ++t) {
        FrameBits fb;
        const bool intra = (t % static_cast<size_t>(gop_size)) == 0;
        if (intra) {
            fb.type = FrameType::Intra;
            latents[t].type = FrameType::Intra;
            latents[t].residual =
                quantize_inference(model.intra.encode(ag::leaf(padded[t]))->value);
            vmax_intra = track_max_abs(latents[t].residual, vmax_intra);
            prev_recon = decode_intra(model, latents[t].residual);
            fb.est_residual_bits = model.intra_density.bits_tensor(latents[t].residual);
            res.decoded_flows.emplace_back();
        } else {
            fb.type = FrameType::Predicted;
            latents[t].type = FrameType::Predicted;
            if (ab.use_motion) {
                const Tensor flow = model.flow.estimate_tensor(padded[t], prev_recon);
                if (ab.use_mv_codec) {
                    latents[t].motion =
                        quantize_inference(model.mv.encode(ag::leaf(flow))->value);
                    fb.est_motion_bits = model.mv_density.bits_tensor(latents[t].motion);
                } else {
                    Tensor q(flow.shape());
                    kern::ops().scale(4.0f, flow.data(), q.data(), q.numel());
                    latents[t].motion = quantize_inference(q);
                    // flat model: rate is fixed per symbol once V_max is known
                }
                vmax_motion = track_max_abs(latents[t].motion, vmax_motion);
            } else {
                latents[t].motion = Tensor({0});
            }
            // residual is taken against the decode-path prediction
            const PFrameOut out = predict_p(model, prev_recon, latents[t].motion);
            Tensor resid(padded[t].shape());
            kern::ops().sub(padded[t].data(), out.predicted.data(), resid.data(), resid.numel());
            latents[t].residual = quantize_inference(model.residual.encode(ag::leaf(resid))->value);
            vmax_res = track_max_abs(latents[t].residual, vmax_res);
            fb.est_residual_bits = model.res_density.bits_tensor(latents[t].residual);

            prev_recon = finish_p(model, out.predicted, latents[t].residual);
            fb.psnr_warped = psnr(crop_to(out.warped, W, H), frames[t]);
            fb.psnr_predicted = psnr(crop_to(out.predicted, W, H), frames[t]);
            res.decoded_flows.push_back(out.flow);
        }
        res.reconstructions.push_back(crop_to(prev_recon, W, H));
        fb.psnr_recon = psnr(res.reconstructions.back(), frames[t]);
        res.report.frames.push_back(fb);
    }

    // pass 2: freeze V_max per group, build tables, code payloads
    const int vi = vmax_from(vmax_intra), vm = vmax_from(vmax_motion), vr = vmax_from(vmax_res);
    const auto intra_tables = density_tables(model.intra_density, vi);
    const auto res_tables = density_tables(model.res_density, vr);
    const auto motion_tables = ab.use_mv_codec ? density_tables(model.mv_density, vm)
                                               : flat_tables(2, vm);

    StreamHeader header;
    header.width = static_cast<uint16_t>(W);
    header.height = static_cast<uint16_t>(H);
    header.gop_size = static_cast<uint8_t>(gop_size);
    header.num_frames = static_cast<uint16_t>(frames.size());
    header.lambda_id = lambda_id_for(model.cfg.lambda);
    header.vmax = {{static_cast<uint8_t>(LatentGroup::IntraResidual), static_cast<uint16_t>(vi)},
                   {static_cast<uint8_t>(LatentGroup::Motion), static_cast<uint16_t>(vm)},
                   {static_cast<uint8_t>(LatentGroup::Residual), static_cast<uint16_t>(vr)}};

    std::vector<EncodedFrame> enc(frames.size());
    for (size_t t = 0; t < frames.size(); ++t) {
        FrameBits& fb = res.report.frames[t];
        if (latents[t].type == FrameType::Intra) {
            enc[t].type = FrameType::Intra;
            const Tensor& li = latents[t].residual;
            enc[t].residual_payload = encode_latent(to_symbols(li), li.dim(0),
                                                    li.numel() / li.dim(0), intra_tables, vi);
        } else {
            enc[t].type = FrameType::Predicted;
            const Tensor& lm = latents[t].motion;
            if (ab.use_motion) {
                enc[t].motion_payload = encode_latent(to_symbols(lm), lm.dim(0),
                                                      lm.numel() / lm.dim(0), motion_tables, vm);
                if (!ab.use_mv_codec)
                    fb.est_motion_bits =
                        static_cast<double>(lm.numel()) * std::log2(2.0 * vm + 2.0);
            } else {
                enc[t].motion_payload = encode_latent({}, 0, 0, {}, vm);
            }
            const Tensor& lr = latents[t].residual;
            enc[t].residual_payload = encode_latent(to_symbols(lr), lr.dim(0),
                                                    lr.numel() / lr.dim(0), res_tables, vr);
        }
        fb.actual_motion_bits = static_cast<int64_t>(enc[t].motion_payload.size()) * 8;
        fb.actual_residual_bits = static_cast<int64_t>(enc[t].residual_payload.size()) * 8;
    }

    res.bitstream = write_bitstream(header, enc);
    return res;
}

std::vector<Tensor> decode_video(const std::vector<uint8_t>& bitstream, const CodecModel& model) {
    return decode_video_detailed(bitstream, model, false).frames;
}

DecodeDetail decode_video_detailed(const std::vector<uint8_t>& bitstream, const CodecModel& model,
                                   bool estimate_bits) {
    nn::NoGradGuard ng;
    auto [header, enc] = read_bitstream(bitstream);
    const int W = header.width, H = header.height;
    const int ph = (H + 15) / 16 * 16, pw = (W + 15) / 16 * 16;
    const int lh = ph / 16, lw = pw / 16;
    const auto& ab = model.cfg.ablation;

    const int vi = header.vmax_for(LatentGroup::IntraResidual);
    const int vm = header.vmax_for(LatentGroup::Motion);
    const int vr = header.vmax_for(LatentGroup::Residual);
    const auto intra_tables = density_tables(model.intra_density, vi);
    const auto res_tables = density_tables(model.res_density, vr);
    const auto motion_tables = ab.use_mv_codec ? density_tables(model.mv_density, vm)
                                               : flat_tables(2, vm);
    const int cy = model.cfg.residual.latent_channels;

    DecodeDetail out;
    out.header = header;
    out.frames.reserve(enc.size());
    Tensor prev_recon;
    for (size_t t = 0; t < enc.size(); ++t) {
        FrameBits fb;
        fb.type = enc[t].type;
        fb.actual_motion_bits = static_cast<int64_t>(enc[t].motion_payload.size()) * 8;
        fb.actual_residual_bits = static_cast<int64_t>(enc[t].residual_payload.size()) * 8;
        if (enc[t].type == FrameType::Intra) {
            const auto syms = decode_latent(enc[t].residual_payload, cy,
                                            static_cast<int64_t>(lh) * lw, intra_tables, vi);
            const Tensor latent = from_symbols(syms, {cy, lh, lw});
            if (estimate_bits) fb.est_residual_bits = model.intra_density.bits_tensor(latent);
            prev_recon = decode_intra(model, latent);
            out.flows.emplace_back();
        } else {
            if (t == 0)
                throw std::runtime_error("decode_video: stream does not start with an intra frame");
            Tensor motion({0});
            if (ab.use_motion) {
                if (ab.use_mv_codec) {
                    const auto ms = decode_latent(enc[t].motion_payload, MvCodec::kLatentChannels,
                                                  static_cast<int64_t>(lh) * lw, motion_tables, vm);
                    motion = from_symbols(ms, {MvCodec::kLatentChannels, lh, lw});
                    if (estimate_bits) fb.est_motion_bits = model.mv_density.bits_tensor(motion);
                } else {
                    const auto ms = decode_latent(enc[t].motion_payload, 2,
                                                  static_cast<int64_t>(ph) * pw, motion_tables, vm);
                    motion = from_symbols(ms, {2, ph, pw});
                    if (estimate_bits)
                        fb.est_motion_bits =
                            static_cast<double>(motion.numel()) * std::log2(2.0 * vm + 2.0);
                }
            }
            const auto rs = decode_latent(enc[t].residual_payload, cy,
                                          static_cast<int64_t>(lh) * lw, res_tables, vr);
            const Tensor rlat = from_symbols(rs, {cy, lh, lw});
            if (estimate_bits) fb.est_residual_bits = model.res_density.bits_tensor(rlat);
            const PFrameOut o = predict_p(model, prev_recon, motion);
            prev_recon = finish_p(model, o.predicted, rlat);
            out.flows.push_back(o.flow);
        }
        out.frames.push_back(crop_to(prev_recon, W, H));
        out.frame_bits.push_back(fb);
    }
    return out;
}

FlowStats analyze_flow(const Tensor& flow) { return analyze_flows({flow}); }

FlowStats analyze_flows(const std::vector<Tensor>& flows) {
    FlowStats s;
    double maxmag = 0.0;
    for (const auto& f : flows) {
        if (!f.defined() || f.numel() == 0) continue;
        const int H = f.dim(1), Wd = f.dim(2);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < Wd; ++x) {
                const double m = std::hypot(f(0, y, x), f(1, y, x));
                maxmag = std::max(maxmag, m);
                const size_t bin = static_cast<size_t>(m / 0.25);
                if (s.histogram.size() <= bin) s.histogram.resize(bin + 1, 0);
                ++s.histogram[bin];
                ++s.total;
            }
    }
    if (s.total > 0 && !s.histogram.empty())
        s.zero_fraction = static_cast<double>(s.histogram[0]) / static_cast<double>(s.total);
    return s;
}

}  // namespace dvc
