#include "dvc/flow_net.hpp"

#include <stdexcept>

namespace dvc {

FlowNet::LevelNet::LevelNet(Rng& rng)
    : c0(8, 32, 7, 1, 3, rng),
      c1(32, 32, 7, 1, 3, rng),
      c2(32, 32, 5, 1, 2, rng),
      c3(32, 16, 5, 1, 2, rng),
      c4(16, 2, 3, 1, 1, rng, 0.0f) {}  // zero start: initial flow is the upsampled coarse flow

ag::Var FlowNet::LevelNet::forward(const ag::Var& x) const {
    auto h = ag::relu(c0.forward(x));
    h = ag::relu(c1.forward(h));
    h = ag::relu(c2.forward(h));
    h = ag::relu(c3.forward(h));
    return c4.forward(h);
}

void FlowNet::LevelNet::collect(nn::NamedParams& out, const std::string& prefix) {
    c0.collect(out, prefix + ".c0");
    c1.collect(out, prefix + ".c1");
    c2.collect(out, prefix + ".c2");
    c3.collect(out, prefix + ".c3");
    c4.collect(out, prefix + ".c4");
}

FlowNet::FlowNet(const FlowNetConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.levels < 1) throw std::invalid_argument("FlowNet: levels must be >= 1");
    nets_.reserve(static_cast<size_t>(cfg.levels));
    for (int i = 0; i < cfg.levels; ++i) nets_.emplace_back(rng);
}

int FlowNet::levels_for(int h, int w) const {
    int d = 1;
    while (d < cfg_.levels && (std::min(h, w) >> d) >= cfg_.min_coarse_dim) ++d;
    return d;
}

ag::Var FlowNet::estimate(const ag::Var& target, const ag::Var& reference) const {
    const Tensor& tv = target->value;
    if (tv.ndim() != 3 || !tv.same_shape(reference->value))
        throw std::runtime_error("FlowNet: target/reference dimension mismatch");
    const int H = tv.dim(1), W = tv.dim(2);
    const int d = levels_for(H, W);
    if (H % (1 << (d - 1)) || W % (1 << (d - 1)))
        throw std::runtime_error("FlowNet: dims not divisible by 2^(levels-1)");

    // image pyramids, index = levels below full resolution
    std::vector<ag::Var> tpyr{target}, rpyr{reference};
    for (int i = 1; i < d; ++i) {
        tpyr.push_back(ag::avg_pool2(tpyr.back()));
        rpyr.push_back(ag::avg_pool2(rpyr.back()));
    }

    ag::Var flow;
    for (int i = d - 1; i >= 0; --i) {
        if (!flow)
            flow = ag::leaf(Tensor::zeros({2, tpyr[i]->value.dim(1), tpyr[i]->value.dim(2)}));
        else
            flow = upsample_flow2(flow);
        auto warped = ag::warp(rpyr[i], flow);
        auto inp = ag::concat_channels({tpyr[i], warped, flow});
        flow = ag::add(flow, nets_[static_cast<size_t>(i)].forward(inp));
    }
    return flow;
}

Tensor FlowNet::estimate_tensor(const Tensor& target, const Tensor& reference) const {
    nn::NoGradGuard ng;
    return estimate(ag::leaf(target), ag::leaf(reference))->value;
}

void FlowNet::collect(nn::NamedParams& out, const std::string& prefix) {
    for (size_t i = 0; i < nets_.size(); ++i)
        nets_[i].collect(out, prefix + ".level" + std::to_string(i));
}

ag::Var upsample_flow2(const ag::Var& flow) { return ag::upsample2_bilinear(flow, 2.0f); }

Tensor upsample_flow2_tensor(const Tensor& flow) {
    return ag::upsample2_bilinear_tensor(flow, 2.0f);
}

}  // namespace dvc
