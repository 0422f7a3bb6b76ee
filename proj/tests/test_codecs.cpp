#include <doctest.h>

#include "dvc/flow_net.hpp"
#include "dvc/motion_comp.hpp"
#include "dvc/mv_codec.hpp"
#include "dvc/residual_codec.hpp"
#include "gradcheck.hpp"

using namespace dvc;
using dvc::testing::gradcheck;

TEST_CASE("mv codec shape law: [2,H,W] <-> [128,H/16,W/16]") {
    Rng rng(31);
    MvCodec codec(rng);

    Tensor flow({2, 64, 64});
    rng.fill_normal(flow, 0.0f, 1.0f);
    auto latent = codec.encode(ag::leaf(flow));
    CHECK(latent->value.shape() == std::vector<int>{128, 4, 4});
    auto back = codec.decode(latent);
    CHECK(back->value.shape() == std::vector<int>{2, 64, 64});

    Tensor flow2({2, 32, 48});
    auto l2 = codec.encode(ag::leaf(flow2));
    CHECK(l2->value.shape() == std::vector<int>{128, 2, 3});
    CHECK(codec.decode(l2)->value.shape() == std::vector<int>{2, 32, 48});

    Tensor bad({2, 60, 64});
    CHECK_THROWS(codec.encode(ag::leaf(bad)));
    Tensor bad_latent({64, 4, 4});
    CHECK_THROWS(codec.decode(ag::leaf(bad_latent)));
}

TEST_CASE("mv codec: zero flow stays finite through a fresh model") {
    Rng rng(32);
    MvCodec codec(rng);
    auto latent = codec.encode(ag::leaf(Tensor::zeros({2, 32, 32})));
    for (int64_t i = 0; i < latent->value.numel(); ++i)
        CHECK(std::isfinite(latent->value.at(i)));
}

TEST_CASE("residual codec shape law and determinism") {
    Rng rng(33);
    ResidualCodecConfig cfg;
    cfg.filters = 32;
    cfg.latent_channels = 96;
    ResidualCodec codec(cfg, rng);

    Tensor r({3, 64, 64});
    rng.fill_normal(r, 0.0f, 0.1f);
    auto y1 = codec.encode(ag::leaf(r));
    CHECK(y1->value.shape() == std::vector<int>{96, 4, 4});
    auto y2 = codec.encode(ag::leaf(r));
    for (int64_t i = 0; i < y1->value.numel(); ++i) CHECK(y1->value.at(i) == y2->value.at(i));

    auto back = codec.decode(y1);
    CHECK(back->value.shape() == std::vector<int>{3, 64, 64});

    auto zero_out = codec.decode(ag::leaf(Tensor::zeros({96, 4, 4})));
    for (int64_t i = 0; i < zero_out->value.numel(); ++i) CHECK(std::isfinite(zero_out->value.at(i)));

    CHECK_THROWS(codec.encode(ag::leaf(Tensor({3, 60, 64}))));
}

TEST_CASE("reconstruct_frame clamps the sum at the output only") {
    Tensor pred = Tensor::full({3, 2, 2}, 0.5f);
    Tensor rhat = Tensor::full({3, 2, 2}, 0.7f);
    Tensor out = reconstruct_frame(pred, rhat);
    for (int64_t i = 0; i < out.numel(); ++i) CHECK(out.at(i) == 1.0f);

    Tensor zero = Tensor::zeros({3, 2, 2});
    Tensor same = reconstruct_frame(pred, zero);
    for (int64_t i = 0; i < same.numel(); ++i) CHECK(same.at(i) == 0.5f);

    // additivity wherever no clamping happened
    Tensor small = Tensor::full({3, 2, 2}, 0.25f);
    Tensor sum = reconstruct_frame(pred, small);
    for (int64_t i = 0; i < sum.numel(); ++i)
        CHECK(sum.at(i) - pred.at(i) == doctest::Approx(small.at(i)));
}

TEST_CASE("flow net: level selection and zero-initialized output") {
    Rng rng(34);
    FlowNet net(FlowNetConfig{}, rng);
    CHECK(net.levels_for(64, 64) == 4);
    CHECK(net.levels_for(256, 256) == 5);
    CHECK(net.levels_for(16, 16) == 2);

    Tensor a({3, 32, 32}), b({3, 32, 32});
    rng.fill_uniform(a, 0.0f, 1.0f);
    rng.fill_uniform(b, 0.0f, 1.0f);
    // fresh net has zeroed last convs: the estimate is exactly zero motion
    Tensor f = net.estimate_tensor(a, b);
    CHECK(f.shape() == std::vector<int>{2, 32, 32});
    double mean_mag = 0.0;
    for (int64_t i = 0; i < f.numel(); ++i) mean_mag += std::abs(f.at(i));
    CHECK(mean_mag == 0.0);

    Tensor c({3, 32, 48});
    CHECK_THROWS(net.estimate_tensor(a, c));
}

TEST_CASE("flow net: a single-level pyramid is one refinement pass") {
    Rng rng(35);
    FlowNetConfig cfg;
    cfg.levels = 1;
    FlowNet net(cfg, rng);
    Tensor a({3, 16, 16}), b({3, 16, 16});
    rng.fill_uniform(a, 0.0f, 1.0f);
    rng.fill_uniform(b, 0.0f, 1.0f);
    CHECK(net.estimate_tensor(a, b).shape() == std::vector<int>{2, 16, 16});
}

TEST_CASE("flow upsampling scale law") {
    Tensor f = Tensor::full({2, 4, 4}, 1.0f);
    Tensor up = upsample_flow2_tensor(f);
    CHECK(up.shape() == std::vector<int>{2, 8, 8});
    for (int64_t i = 0; i < up.numel(); ++i) CHECK(up.at(i) == 2.0f);
}

TEST_CASE("mc net: zero correction at init makes compensate == warp") {
    Rng rng(36);
    McNetConfig cfg;
    cfg.channels = 16;
    cfg.num_residual_blocks = 1;
    McNet mc(cfg, rng);

    Tensor ref({3, 16, 16});
    rng.fill_uniform(ref, 0.0f, 1.0f);

    // zero flow: compensate must return the reference exactly (out conv starts at zero)
    auto out = mc.compensate(ag::leaf(ref), ag::leaf(Tensor::zeros({2, 16, 16})));
    for (int64_t i = 0; i < ref.numel(); ++i) CHECK(out->value.at(i) == ref.at(i));

    // general flow: compensate == warp while the correction is zero
    Tensor flow({2, 16, 16});
    rng.fill_uniform(flow, -1.5f, 1.5f);
    auto comp = mc.compensate(ag::leaf(ref), ag::leaf(flow));
    Tensor warped = ag::warp_tensor(ref, flow);
    for (int64_t i = 0; i < ref.numel(); ++i) CHECK(comp->value.at(i) == warped.at(i));
}

TEST_CASE("mc net: refine shape contract and input gradient") {
    Rng rng(37);
    McNetConfig cfg;
    cfg.channels = 8;
    cfg.num_residual_blocks = 1;
    McNet mc(cfg, rng);
    // replace the zero output init so the correction (and its gradient) is
    // well above finite-difference noise
    nn::NamedParams ps;
    mc.collect(ps, "mc");
    for (auto& [name, p] : ps)
        if (name.find("conv_out.w") != std::string::npos) rng.fill_normal(p->value, 0.0f, 0.6f);

    for (int h : {8, 12}) {
        auto y = mc.refine(ag::leaf(Tensor::zeros({8, h, 8})));
        CHECK(y->value.shape() == std::vector<int>{3, h, 8});
    }
    CHECK_THROWS(mc.refine(ag::leaf(Tensor::zeros({8, 10, 8}))));
    CHECK_THROWS(mc.compensate(ag::leaf(Tensor::zeros({3, 8, 8})),
                               ag::leaf(Tensor::zeros({2, 16, 16}))));

    Tensor stack({8, 8, 8});
    rng.fill_normal(stack, 0.0f, 0.5f);
    Tensor target({3, 8, 8});
    rng.fill_normal(target, 0.0f, 0.5f);
    // eps 1e-3: this net is deep enough that wider probes cross relu corners
    CHECK(gradcheck({stack}, [&](const std::vector<ag::Var>& v) {
              return ag::mse(mc.refine(v[0]), ag::leaf(target));
          }, 1e-3) < 1e-3);
}

TEST_CASE("mc net: all-zero input with zero out conv gives zero correction") {
    Rng rng(38);
    McNetConfig cfg;
    cfg.channels = 8;
    cfg.num_residual_blocks = 1;
    McNet mc(cfg, rng);
    auto y = mc.refine(ag::leaf(Tensor::zeros({8, 8, 8})));
    for (int64_t i = 0; i < y->value.numel(); ++i) CHECK(y->value.at(i) == 0.0f);
}
