#include <doctest.h>

#include <cmath>

#include "dvc/metrics.hpp"
#include "dvc/synthetic.hpp"
#include "dvc/training.hpp"

using namespace dvc;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.flow.levels = 3;
    cfg.mc.channels = 16;
    cfg.mc.num_residual_blocks = 1;
    cfg.residual.filters = 32;
    cfg.residual.latent_channels = 16;
    cfg.init_seed = 99;
    cfg.lambda = 1024.0f;
    return cfg;
}

std::vector<TrainingClip> small_dataset(int clips = 2, int frames = 3, int size = 32,
                                        uint64_t seed = 17) {
    SynthConfig s;
    s.clips = clips;
    s.frames = frames;
    s.width = size;
    s.height = size;
    s.seed = seed;
    s.max_shift = 1.0f;
    return synth_translating_clips(s);
}

}  // namespace

TEST_CASE("rd_loss arithmetic") {
    CHECK(rd_loss(0.0, 0.0, 0.0, 1024.0, 64, 64) == 0.0);
    // lambda*mse + bits per pixel: 1024*0.001 + 0.1 = 1.124
    const int W = 100, H = 100;
    CHECK(rd_loss(0.001, 600.0, 400.0, 1024.0, W, H) == doctest::Approx(1.124));
    // lambda = 0 degenerates to pure bpp
    CHECK(rd_loss(0.5, 600.0, 400.0, 0.0, W, H) == doctest::Approx(0.1));
    CHECK_THROWS(rd_loss(-0.1, 0.0, 0.0, 1.0, 4, 4));
}

TEST_CASE("reconstruction buffer: causal entries, helpful error when missing") {
    ReconstructionBuffer buf;
    CHECK(!buf.has(0, 0));
    CHECK_THROWS_WITH_AS(static_cast<void>(buf.get(3, 1)),
                         doctest::Contains("warm-start"), std::runtime_error);
    buf.put(3, 1, Tensor::zeros({3, 4, 4}));
    CHECK(buf.has(3, 1));
    CHECK(buf.get(3, 1).numel() == 48);
}

TEST_CASE("train_sample writes reconstructions into the buffer") {
    CodecModel model(small_config());
    TrainConfig tc;
    tc.batch = 1;
    Trainer tr(model, tc);
    const auto data = small_dataset();

    const auto s0 = tr.train_sample(data[0], 0, true, 1.0f);
    CHECK(s0.intra);
    CHECK(s0.loss > 0.0);
    CHECK(tr.buffer().has(data[0].clip_id, 0));

    const auto s1 = tr.train_sample(data[0], 1, false, 1.0f);
    CHECK(!s1.intra);
    CHECK(s1.est_bits_motion > 0.0);
    CHECK(tr.buffer().has(data[0].clip_id, 1));

    // buffered entries are clamped frames
    const Tensor& rec = tr.buffer().get(data[0].clip_id, 1);
    for (int64_t i = 0; i < rec.numel(); ++i) {
        CHECK(rec.at(i) >= 0.0f);
        CHECK(rec.at(i) <= 1.0f);
    }
}

TEST_CASE("frozen flow: gradients are exactly zero and weights never move") {
    ModelConfig cfg = small_config();
    cfg.ablation.joint_flow_training = false;
    CodecModel model(cfg);
    TrainConfig tc;
    tc.batch = 1;
    Trainer tr(model, tc);
    const auto data = small_dataset();

    nn::NamedParams flow_params;
    model.flow.collect(flow_params, "flow");
    std::vector<Tensor> before;
    for (auto& [n, p] : flow_params) before.push_back(p->value.clone());

    model.zero_grads();
    tr.train_sample(data[0], 1, true, 1.0f);
    for (auto& [n, p] : flow_params)
        for (int64_t i = 0; i < p->grad.numel(); ++i) CHECK(p->grad.at(i) == 0.0f);

    for (int i = 0; i < 3; ++i) tr.step(data);
    size_t k = 0;
    for (auto& [n, p] : flow_params) {
        for (int64_t i = 0; i < p->value.numel(); ++i)
            CHECK(p->value.at(i) == before[k].at(i));
        ++k;
    }
}

TEST_CASE("no-motion ablation: zero motion bits in the training loss") {
    ModelConfig cfg = small_config();
    cfg.ablation.use_motion = false;
    CodecModel model(cfg);
    TrainConfig tc;
    tc.batch = 1;
    Trainer tr(model, tc);
    const auto data = small_dataset();
    const auto s = tr.train_sample(data[0], 1, true, 1.0f);
    CHECK(s.est_bits_motion == 0.0);
    CHECK(s.est_bits_residual > 0.0);
}

TEST_CASE("buffer-free ablation always trains against clean references") {
    ModelConfig cfg = small_config();
    cfg.ablation.use_buffer = false;
    CodecModel model(cfg);
    TrainConfig tc;
    tc.batch = 2;
    tc.warmup_steps = 0;  // would fail immediately if the buffer were consulted
    Trainer tr(model, tc);
    const auto data = small_dataset();
    for (int i = 0; i < 4; ++i) CHECK_NOTHROW(tr.step(data));
}

TEST_CASE("adam steps move parameters and projections keep gdn feasible") {
    CodecModel model(small_config());
    TrainConfig tc;
    tc.batch = 1;
    tc.lr = 1e-3f;
    Trainer tr(model, tc);
    const auto data = small_dataset();
    for (int i = 0; i < 3; ++i) tr.step(data);

    for (auto& [name, p] : model.params()) {
        if (name.find(".beta") != std::string::npos)
            for (int64_t i = 0; i < p->value.numel(); ++i)
                CHECK(p->value.at(i) >= nn::Gdn::kBetaMin);
        if (name.find(".gamma") != std::string::npos)
            for (int64_t i = 0; i < p->value.numel(); ++i) CHECK(p->value.at(i) >= 0.0f);
    }
}

TEST_CASE("plateau detection drops the learning rate") {
    CodecModel model(small_config());
    TrainConfig tc;
    tc.batch = 1;
    tc.steps = 0;
    tc.plateau_window = 4;
    tc.plateau_threshold = 1.0;  // any non-doubling improvement counts as a plateau
    Trainer tr(model, tc);
    const auto data = small_dataset();
    const float lr0 = tr.optimizer().lr();
    tr.run(data);  // zero steps: untouched
    CHECK(tr.optimizer().lr() == lr0);
    TrainConfig tc2 = tc;
    tc2.steps = 12;
    Trainer tr2(model, tc2);
    tr2.run(data);
    CHECK(tr2.optimizer().lr() < lr0);
}

TEST_CASE("overfit: 200 steps on one translating pair halve the loss [slow]") {
    ModelConfig cfg = small_config();
    cfg.lambda = 2048.0f;
    CodecModel model(cfg);
    TrainConfig tc;
    tc.batch = 1;
    tc.lr = 3e-4f;
    tc.seed = 4;
    Trainer tr(model, tc);

    auto data = small_dataset(1, 2, 32, 23);
    double first_p_loss = -1.0, last_loss = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto s = tr.step(data);
        if (!s.intra && first_p_loss < 0.0) first_p_loss = s.loss;
        last_loss = s.loss;
    }
    REQUIRE(first_p_loss > 0.0);
    CHECK(last_loss < 0.5 * first_p_loss);
}

TEST_CASE("flow pretraining: overfit recovers a pure translation [slow]") {
    ModelConfig cfg = small_config();
    cfg.flow.levels = 3;
    CodecModel model(cfg);
    TrainConfig tc;
    tc.flow_pretrain_lr = 1e-3f;
    tc.seed = 9;
    Trainer tr(model, tc);

    // reference = target shifted right by 2px, cut from one larger canvas so
    // the pair is an exact integer shift away from borders
    Tensor big({3, 40, 40});
    Rng trng(77);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 40; ++x)
                big(c, y, x) = static_cast<float>(
                    0.5 + 0.25 * std::sin(0.9 * x + 1.7 * c) * std::cos(1.1 * y) +
                    0.15 * trng.uniform(-1.0, 1.0));
    auto crop = [&](int ox) {
        Tensor f({3, 32, 32});
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x) f(c, y, x) = big(c, y + 4, x + ox);
        return ag::clamp01(f);
    };
    TrainingClip pair;
    pair.clip_id = 0;
    // target(x) = big(x+4), reference(x) = big(x+2) = target(x-2): flow (+2,0)
    pair.frames = {crop(2), crop(4)};

    tr.pretrain_flow({pair}, 350);
    const Tensor flow = model.flow.estimate_tensor(pair.frames[1], pair.frames[0]);

    // interior agreement with the true (+2, 0) displacement
    int good = 0, total = 0;
    for (int y = 6; y < 26; ++y)
        for (int x = 6; x < 26; ++x) {
            const double du = flow(0, y, x) - 2.0, dv = flow(1, y, x);
            if (std::sqrt(du * du + dv * dv) <= 0.5) ++good;
            ++total;
        }
    CHECK(static_cast<double>(good) / total >= 0.9);
}
