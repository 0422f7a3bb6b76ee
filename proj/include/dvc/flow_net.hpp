#pragma once

#include "dvc/nn.hpp"

namespace dvc {

struct FlowNetConfig {
    int levels = 5;         // trained refinement nets, finest first
    int min_coarse_dim = 8; // pyramid stops before going below this
};

// Coarse-to-fine optical flow. Each pyramid level warps the reference by the
// upsampled coarser flow and predicts a residual displacement from
// [target, warped, flow]. Level nets are indexed by distance from the finest
// resolution, so a net trained at one input size is reused at the same
// relative position for other sizes.
class FlowNet {
public:
    FlowNet(const FlowNetConfig& cfg, Rng& rng);

    // target/reference: [3,H,W] with H,W divisible by 2^(used_levels-1).
    // Returns [2,H,W]: backward displacement from target into reference.
    ag::Var estimate(const ag::Var& target, const ag::Var& reference) const;
    Tensor estimate_tensor(const Tensor& target, const Tensor& reference) const;

    int levels_for(int h, int w) const;
    void collect(nn::NamedParams& out, const std::string& prefix);

private:
    struct LevelNet {
        LevelNet(Rng& rng);
        ag::Var forward(const ag::Var& x) const;
        void collect(nn::NamedParams& out, const std::string& prefix);
        nn::Conv2d c0, c1, c2, c3, c4;
    };

    FlowNetConfig cfg_;
    std::vector<LevelNet> nets_;
};

// Bilinear 2x flow upsampling: displacement values double with resolution.
ag::Var upsample_flow2(const ag::Var& flow);
Tensor upsample_flow2_tensor(const Tensor& flow);

}  // namespace dvc
