#include "dvc/residual_codec.hpp"

#include <stdexcept>

namespace dvc {

ResidualCodec::ResidualCodec(const ResidualCodecConfig& cfg, Rng& rng)
    : cfg_(cfg),
      e0_(3, cfg.filters, 5, 2, 2, rng),
      e1_(cfg.filters, cfg.filters, 5, 2, 2, rng),
      e2_(cfg.filters, cfg.filters, 5, 2, 2, rng),
      e3_(cfg.filters, cfg.latent_channels, 5, 2, 2, rng),
      g0_(cfg.filters, false),
      g1_(cfg.filters, false),
      g2_(cfg.filters, false),
      g3_(cfg.latent_channels, false),
      d0_(cfg.latent_channels, cfg.filters, 5, 2, 2, 1, rng),
      d1_(cfg.filters, cfg.filters, 5, 2, 2, 1, rng),
      d2_(cfg.filters, cfg.filters, 5, 2, 2, 1, rng),
      d3_(cfg.filters, 3, 5, 2, 2, 1, rng),
      i0_(cfg.filters, true),
      i1_(cfg.filters, true),
      i2_(cfg.filters, true) {}

ag::Var ResidualCodec::encode(const ag::Var& residual) const {
    const Tensor& v = residual->value;
    if (v.ndim() != 3 || v.dim(0) != 3)
        throw std::runtime_error("ResidualCodec::encode: expected [3,H,W]");
    if (v.dim(1) % 16 || v.dim(2) % 16)
        throw std::runtime_error("ResidualCodec::encode: dims must be divisible by 16 (pad first)");
    auto h = g0_.forward(e0_.forward(residual));
    h = g1_.forward(e1_.forward(h));
    h = g2_.forward(e2_.forward(h));
    return g3_.forward(e3_.forward(h));
}

ag::Var ResidualCodec::decode(const ag::Var& latent) const {
    if (latent->value.dim(0) != cfg_.latent_channels)
        throw std::runtime_error("ResidualCodec::decode: latent channel mismatch");
    auto h = i0_.forward(d0_.forward(latent));
    h = i1_.forward(d1_.forward(h));
    h = i2_.forward(d2_.forward(h));
    return d3_.forward(h);
}

void ResidualCodec::project() {
    g0_.project();
    g1_.project();
    g2_.project();
    g3_.project();
    i0_.project();
    i1_.project();
    i2_.project();
}

void ResidualCodec::collect(nn::NamedParams& out, const std::string& prefix) {
    e0_.collect(out, prefix + ".e0");
    e1_.collect(out, prefix + ".e1");
    e2_.collect(out, prefix + ".e2");
    e3_.collect(out, prefix + ".e3");
    g0_.collect(out, prefix + ".g0");
    g1_.collect(out, prefix + ".g1");
    g2_.collect(out, prefix + ".g2");
    g3_.collect(out, prefix + ".g3");
    d0_.collect(out, prefix + ".d0");
    d1_.collect(out, prefix + ".d1");
    d2_.collect(out, prefix + ".d2");
    d3_.collect(out, prefix + ".d3");
    i0_.collect(out, prefix + ".i0");
    i1_.collect(out, prefix + ".i1");
    i2_.collect(out, prefix + ".i2");
}

Tensor reconstruct_frame(const Tensor& predicted, const Tensor& residual_hat) {
    if (!predicted.same_shape(residual_hat))
        throw std::runtime_error("reconstruct_frame: shape mismatch");
    Tensor sum(predicted.shape());
    const float* a = predicted.data();
    const float* b = residual_hat.data();
    float* y = sum.data();
    for (int64_t i = 0; i < sum.numel(); ++i) {
        float v = a[i] + b[i];
        y[i] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    }
    return sum;
}

}  // namespace dvc
