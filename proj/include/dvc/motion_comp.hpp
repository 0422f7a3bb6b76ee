#pragma once

#include "dvc/nn.hpp"

namespace dvc {

struct McNetConfig {
    int channels = 64;
    int num_residual_blocks = 2;  // per pyramid level
};

// Motion compensation: warp the reference by the decoded flow, then add a
// CNN correction predicted from [warped, reference, flow]. The correction
// net is a small two-downsampling U-shape of pre-activation residual blocks
// with additive skips, ending in a zero-initialized 3-channel conv so the
// untrained module degenerates to plain warping.
class McNet {
public:
    McNet(const McNetConfig& cfg, Rng& rng);

    ag::Var compensate(const ag::Var& reference, const ag::Var& flow) const;
    ag::Var refine(const ag::Var& stack) const;  // [8,H,W] -> [3,H,W], H,W divisible by 4

    const McNetConfig& config() const { return cfg_; }
    void collect(nn::NamedParams& out, const std::string& prefix);

private:
    McNetConfig cfg_;
    nn::Conv2d conv_in_, conv_out_;
    std::vector<nn::ResBlock> l0_pre_, l1_down_, l2_, l1_up_, l0_post_;
};

}  // namespace dvc
