#pragma once

#include "dvc/nn.hpp"

namespace dvc {

// Motion vector autoencoder: four stride-2 conv+GDN stages squeeze a [2,H,W]
// flow field into a [128,H/16,W/16] latent; the decoder mirrors them with
// transposed convolutions and IGDN, ending in a linear 2-channel stage.
class MvCodec {
public:
    static constexpr int kLatentChannels = 128;

    explicit MvCodec(Rng& rng);

    ag::Var encode(const ag::Var& flow) const;
    ag::Var decode(const ag::Var& latent) const;

    void project();
    void collect(nn::NamedParams& out, const std::string& prefix);

private:
    nn::Conv2d e0_, e1_, e2_, e3_;
    nn::Gdn g0_, g1_, g2_, g3_;
    nn::ConvTranspose2d d0_, d1_, d2_, d3_;
    nn::Gdn i0_, i1_, i2_;
};

}  // namespace dvc
