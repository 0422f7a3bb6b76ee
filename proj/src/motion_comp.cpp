#include "dvc/motion_comp.hpp"

#include <stdexcept>

namespace dvc {

McNet::McNet(const McNetConfig& cfg, Rng& rng)
    : cfg_(cfg),
      conv_in_(8, cfg.channels, 3, 1, 1, rng),
      conv_out_(cfg.channels, 3, 3, 1, 1, rng, 0.0f) {
    if (cfg.channels < 8 || cfg.num_residual_blocks < 1)
        throw std::invalid_argument("McNet: bad config");
    const int n = cfg.num_residual_blocks;
    const int n_pre = (n + 1) / 2, n_post = n / 2;
    for (int i = 0; i < n_pre; ++i) l0_pre_.emplace_back(cfg.channels, rng);
    for (int i = 0; i < n_post; ++i) l0_post_.emplace_back(cfg.channels, rng);
    for (int i = 0; i < n_pre; ++i) l1_down_.emplace_back(cfg.channels, rng);
    for (int i = 0; i < n_post; ++i) l1_up_.emplace_back(cfg.channels, rng);
    for (int i = 0; i < n; ++i) l2_.emplace_back(cfg.channels, rng);
}

ag::Var McNet::refine(const ag::Var& stack) const {
    const Tensor& v = stack->value;
    if (v.ndim() != 3 || v.dim(0) != 8) throw std::runtime_error("McNet::refine: expected [8,H,W]");
    if (v.dim(1) % 4 || v.dim(2) % 4)
        throw std::runtime_error("McNet::refine: dims must be divisible by 4");

    auto x0 = conv_in_.forward(stack);
    for (const auto& b : l0_pre_) x0 = b.forward(x0);
    auto x1 = ag::avg_pool2(x0);
    for (const auto& b : l1_down_) x1 = b.forward(x1);
    auto x2 = ag::avg_pool2(x1);
    for (const auto& b : l2_) x2 = b.forward(x2);
    auto u1 = ag::add(x1, ag::upsample2_bilinear(x2));
    for (const auto& b : l1_up_) u1 = b.forward(u1);
    auto u0 = ag::add(x0, ag::upsample2_bilinear(u1));
    for (const auto& b : l0_post_) u0 = b.forward(u0);
    return conv_out_.forward(ag::relu(u0));
}

ag::Var McNet::compensate(const ag::Var& reference, const ag::Var& flow) const {
    if (reference->value.dim(1) != flow->value.dim(1) ||
        reference->value.dim(2) != flow->value.dim(2))
        throw std::runtime_error("McNet::compensate: reference/flow dimension mismatch");
    auto warped = ag::warp(reference, flow);
    auto stack = ag::concat_channels({warped, reference, flow});
    return ag::add(warped, refine(stack));
}

void McNet::collect(nn::NamedParams& out, const std::string& prefix) {
    conv_in_.collect(out, prefix + ".conv_in");
    conv_out_.collect(out, prefix + ".conv_out");
    auto coll = [&](std::vector<nn::ResBlock>& blocks, const std::string& name) {
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i].collect(out, prefix + "." + name + std::to_string(i));
    };
    coll(l0_pre_, "l0_pre");
    coll(l1_down_, "l1_down");
    coll(l2_, "l2");
    coll(l1_up_, "l1_up");
    coll(l0_post_, "l0_post");
}

}  // namespace dvc
