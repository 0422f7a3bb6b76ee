#include "dvc/mv_codec.hpp"

#include <stdexcept>

namespace dvc {

namespace {
constexpr int C = MvCodec::kLatentChannels;
}

MvCodec::MvCodec(Rng& rng)
    : e0_(2, C, 3, 2, 1, rng),
      e1_(C, C, 3, 2, 1, rng),
      e2_(C, C, 3, 2, 1, rng),
      e3_(C, C, 3, 2, 1, rng),
      g0_(C, false),
      g1_(C, false),
      g2_(C, false),
      g3_(C, false),
      d0_(C, C, 3, 2, 1, 1, rng),
      d1_(C, C, 3, 2, 1, 1, rng),
      d2_(C, C, 3, 2, 1, 1, rng),
      d3_(C, 2, 3, 2, 1, 1, rng),
      i0_(C, true),
      i1_(C, true),
      i2_(C, true) {}

ag::Var MvCodec::encode(const ag::Var& flow) const {
    const Tensor& v = flow->value;
    if (v.ndim() != 3 || v.dim(0) != 2) throw std::runtime_error("MvCodec::encode: expected [2,H,W]");
    if (v.dim(1) % 16 || v.dim(2) % 16)
        throw std::runtime_error("MvCodec::encode: dims must be divisible by 16 (pad first)");
    auto h = g0_.forward(e0_.forward(flow));
    h = g1_.forward(e1_.forward(h));
    h = g2_.forward(e2_.forward(h));
    return g3_.forward(e3_.forward(h));
}

ag::Var MvCodec::decode(const ag::Var& latent) const {
    if (latent->value.dim(0) != C) throw std::runtime_error("MvCodec::decode: expected 128 channels");
    auto h = i0_.forward(d0_.forward(latent));
    h = i1_.forward(d1_.forward(h));
    h = i2_.forward(d2_.forward(h));
    return d3_.forward(h);
}

void MvCodec::project() {
    g0_.project();
    g1_.project();
    g2_.project();
    g3_.project();
    i0_.project();
    i1_.project();
    i2_.project();
}

void MvCodec::collect(nn::NamedParams& out, const std::string& prefix) {
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

}  // namespace dvc
