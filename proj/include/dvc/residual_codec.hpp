#pragma once

#include "dvc/nn.hpp"

namespace dvc {

struct ResidualCodecConfig {
    int filters = 128;          // width of the hidden analysis/synthesis stages
    int latent_channels = 96;   // bottleneck channels
};

// Nonlinear analysis/synthesis transform for prediction residuals (and, with
// separate weights, for intra frames). 5x5 stride-2 stages, /16 total.
class ResidualCodec {
public:
    ResidualCodec(const ResidualCodecConfig& cfg, Rng& rng);

    ag::Var encode(const ag::Var& residual) const;  // [3,H,W] -> [Cy,H/16,W/16]
    ag::Var decode(const ag::Var& latent) const;    // inverse shapes, linear output

    const ResidualCodecConfig& config() const { return cfg_; }
    void project();
    void collect(nn::NamedParams& out, const std::string& prefix);

private:
    ResidualCodecConfig cfg_;
    nn::Conv2d e0_, e1_, e2_, e3_;
    nn::Gdn g0_, g1_, g2_, g3_;
    nn::ConvTranspose2d d0_, d1_, d2_, d3_;
    nn::Gdn i0_, i1_, i2_;
};

// x_hat = clamp(predicted + residual_hat, 0, 1). Output-side only; training
// losses are computed on the unclamped sum.
Tensor reconstruct_frame(const Tensor& predicted, const Tensor& residual_hat);

}  // namespace dvc
