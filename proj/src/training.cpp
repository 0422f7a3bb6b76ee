#include "dvc/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "dvc/entropy.hpp"
#include "dvc/kernels.hpp"

namespace dvc {

double rd_loss(double mse, double bits_motion, double bits_residual, double lambda, int width,
               int height) {
    if (mse < 0.0 || bits_motion < 0.0 || bits_residual < 0.0)
        throw std::invalid_argument("rd_loss: negative distortion or rate");
    return lambda * mse + (bits_motion + bits_residual) / (static_cast<double>(width) * height);
}

const Tensor& ReconstructionBuffer::get(int clip, int frame) const {
    auto it = map_.find({clip, frame});
    if (it == map_.end())
        throw std::runtime_error(
            "reconstruction buffer: missing entry for clip " + std::to_string(clip) + " frame " +
            std::to_string(frame) + " (run a warm-start pass with clean references first)");
    return it->second;
}

Trainer::Trainer(CodecModel& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg), rng_(cfg.seed) {
    nn::AdamConfig acfg;
    acfg.lr = cfg.lr;
    opt_ = std::make_unique<nn::Adam>(model_.params(), acfg);
    for (auto& [name, p] : model_.params()) {
        if (!model_.cfg.ablation.joint_flow_training && name.rfind("flow.", 0) == 0)
            p->trainable = false;
        if (name.find("density.") != std::string::npos) p->lr_scale = cfg.density_lr_scale;
    }
}

StepStats Trainer::intra_sample(const Tensor& frame, int clip, float grad_scale) {
    const int W = frame.dim(2), H = frame.dim(1);
    auto x = ag::leaf(frame);
    auto y = model_.intra.encode(x);
    auto yq = quantize_train(y, rng_);
    auto bits = model_.intra_density.bits(yq);
    auto xhat = model_.intra.decode(yq);
    auto dist = ag::mse(x, xhat);
    auto loss = ag::add(ag::scale(dist, model_.cfg.lambda),
                        ag::scale(bits, 1.0f / static_cast<float>(W * H)));
    ag::backward(ag::scale(loss, grad_scale));
    buffer_.put(clip, 0, ag::clamp01(xhat->value));

    StepStats s;
    s.intra = true;
    s.loss = ag::scalar(loss);
    s.distortion = ag::scalar(dist);
    s.est_bits_residual = ag::scalar(bits);
    s.bpp = s.est_bits_residual / (W * H);
    if (!(s.distortion >= 0.0) || !(s.est_bits_residual >= 0.0))
        throw std::runtime_error("train: negative loss term");
    return s;
}

StepStats Trainer::p_sample(const Tensor& frame, const Tensor& reference, int clip, int t,
                            float grad_scale) {
    const int W = frame.dim(2), H = frame.dim(1);
    const auto& ab = model_.cfg.ablation;
    auto x = ag::leaf(frame);
    auto ref = ag::leaf(reference);

    ag::Var predicted;
    ag::Var bits_motion;
    if (ab.use_motion) {
        ag::Var flow;
        if (ab.joint_flow_training) {
            flow = model_.flow.estimate(x, ref);
        } else {
            flow = ag::leaf(model_.flow.estimate_tensor(frame, reference));
        }
        ag::Var flow_hat;
        if (ab.use_mv_codec) {
            auto m = model_.mv.encode(flow);
            auto mq = quantize_train(m, rng_);
            bits_motion = model_.mv_density.bits(mq);
            flow_hat = model_.mv.decode(mq);
        } else {
            // quarter-pel grid, flat-coded: rate does not depend on the values
            auto q = quantize_train(ag::scale(flow, 4.0f), rng_);
            flow_hat = ag::scale(q, 0.25f);
            int vmax = 4;
            const float* p = q->value.data();
            for (int64_t i = 0; i < q->value.numel(); ++i)
                vmax = std::max(vmax, static_cast<int>(std::fabs(p[i])) + 4);
            Tensor cb({1});
            cb.at(0) = static_cast<float>(q->value.numel() * std::log2(2.0 * vmax + 2.0));
            bits_motion = ag::leaf(cb);
        }
        predicted = ab.use_mc_net ? model_.mc.compensate(ref, flow_hat)
                                  : ag::warp(ref, flow_hat);
    } else {
        predicted = ag::leaf(Tensor::zeros(frame.shape()));
        bits_motion = ag::leaf(Tensor::zeros({1}));
    }

    auto residual = ag::sub(x, predicted);
    auto y = model_.residual.encode(residual);
    auto yq = quantize_train(y, rng_);
    auto bits_residual = model_.res_density.bits(yq);
    auto rhat = model_.residual.decode(yq);
    auto xhat = ag::add(predicted, rhat);  // unclamped in the loss
    auto dist = ag::mse(x, xhat);
    auto loss = ag::add(ag::scale(dist, model_.cfg.lambda),
                        ag::scale(ag::add(bits_motion, bits_residual),
                                  1.0f / static_cast<float>(W * H)));
    ag::backward(ag::scale(loss, grad_scale));
    buffer_.put(clip, t, ag::clamp01(xhat->value));

    StepStats s;
    s.loss = ag::scalar(loss);
    s.distortion = ag::scalar(dist);
    s.est_bits_motion = ag::scalar(bits_motion);
    s.est_bits_residual = ag::scalar(bits_residual);
    s.bpp = (s.est_bits_motion + s.est_bits_residual) / (W * H);
    if (!(s.distortion >= 0.0) || !(s.est_bits_motion >= 0.0) || !(s.est_bits_residual >= 0.0))
        throw std::runtime_error("train: negative loss term");
    return s;
}

StepStats Trainer::train_sample(const TrainingClip& clip, int t, bool clean_reference,
                                float grad_scale) {
    if (clip.frames.empty() || t < 0 || t >= static_cast<int>(clip.frames.size()))
        throw std::invalid_argument("train_sample: bad frame index");
    if (t == 0) return intra_sample(clip.frames[0], clip.clip_id, grad_scale);
    const Tensor& ref = clean_reference ? clip.frames[static_cast<size_t>(t - 1)]
                                        : buffer_.get(clip.clip_id, t - 1);
    return p_sample(clip.frames[static_cast<size_t>(t)], ref, clip.clip_id, t, grad_scale);
}

StepStats Trainer::step(const std::vector<TrainingClip>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    if (cursor_.size() != dataset.size()) {
        cursor_.assign(dataset.size(), 0);
        clip_order_.resize(dataset.size());
        for (size_t i = 0; i < dataset.size(); ++i) clip_order_[i] = static_cast<int>(i);
        order_pos_ = 0;
    }
    const int warmup = cfg_.warmup_steps >= 0
                           ? cfg_.warmup_steps
                           : static_cast<int>((dataset.size() * dataset[0].frames.size() +
                                               cfg_.batch - 1) /
                                              cfg_.batch);
    const bool clean_refs = !model_.cfg.ablation.use_buffer || step_ < warmup;

    model_.zero_grads();
    StepStats agg;
    const float gs = 1.0f / static_cast<float>(cfg_.batch);
    for (int b = 0; b < cfg_.batch; ++b) {
        if (order_pos_ == 0) {
            // fresh shuffle each pass
            for (size_t i = clip_order_.size(); i > 1; --i)
                std::swap(clip_order_[i - 1],
                          clip_order_[static_cast<size_t>(rng_.uniform_int(0, static_cast<int>(i) - 1))]);
        }
        const int ci = clip_order_[order_pos_];
        order_pos_ = (order_pos_ + 1) % clip_order_.size();
        const auto& clip = dataset[static_cast<size_t>(ci)];
        const int t = cursor_[static_cast<size_t>(ci)];
        cursor_[static_cast<size_t>(ci)] = (t + 1) % static_cast<int>(clip.frames.size());

        const StepStats s = train_sample(clip, t, clean_refs || t == 0, gs);
        agg.loss += s.loss / cfg_.batch;
        agg.distortion += s.distortion / cfg_.batch;
        agg.est_bits_motion += s.est_bits_motion / cfg_.batch;
        agg.est_bits_residual += s.est_bits_residual / cfg_.batch;
        agg.bpp += s.bpp / cfg_.batch;
    }
    opt_->step();
    model_.project();
    ++step_;
    loss_history_.push_back(agg.loss);
    return agg;
}

void Trainer::maybe_drop_lr(std::ostream* log) {
    const size_t w = static_cast<size_t>(cfg_.plateau_window);
    if (w == 0 || loss_history_.size() < w || loss_history_.size() % w != 0) return;
    std::vector<double> tail(loss_history_.end() - static_cast<ptrdiff_t>(w), loss_history_.end());
    std::nth_element(tail.begin(), tail.begin() + static_cast<ptrdiff_t>(w / 2), tail.end());
    const double med = tail[w / 2];
    if (prev_window_median_ > 0.0) {
        const double improvement = (prev_window_median_ - med) / std::abs(prev_window_median_);
        if (improvement < cfg_.plateau_threshold && opt_->lr() > cfg_.lr_min) {
            const float new_lr = std::max(opt_->lr() / 10.0f, cfg_.lr_min);
            if (log) *log << "# step " << step_ << ": loss plateau, lr -> " << new_lr << "\n";
            opt_->set_lr(new_lr);
        }
    }
    prev_window_median_ = med;
}

void Trainer::run(const std::vector<TrainingClip>& dataset, std::ostream* log) {
    if (cfg_.flow_pretrain_steps > 0) pretrain_flow(dataset, cfg_.flow_pretrain_steps);
    for (int i = 0; i < cfg_.steps; ++i) {
        const StepStats s = step(dataset);
        if (log && (step_ % 100 == 0 || i + 1 == cfg_.steps))
            *log << "step " << step_ << " loss " << s.loss << " mse " << s.distortion << " bpp "
                 << s.bpp << " lr " << opt_->lr() << "\n";
        maybe_drop_lr(log);
    }
}

void Trainer::pretrain_flow(const std::vector<TrainingClip>& dataset, int steps) {
    if (dataset.empty()) throw std::invalid_argument("pretrain_flow: empty dataset");
    nn::NamedParams flow_params;
    model_.flow.collect(flow_params, "flow");
    std::vector<bool> saved;
    for (auto& [name, p] : flow_params) {
        saved.push_back(p->trainable);
        p->trainable = true;
    }
    nn::AdamConfig acfg;
    acfg.lr = cfg_.flow_pretrain_lr;
    nn::Adam opt(flow_params, acfg);
    for (int i = 0; i < steps; ++i) {
        const auto& clip = dataset[static_cast<size_t>(rng_.uniform_int(0, static_cast<int>(dataset.size()) - 1))];
        const int t = rng_.uniform_int(1, static_cast<int>(clip.frames.size()) - 1);
        auto x = ag::leaf(clip.frames[static_cast<size_t>(t)]);
        auto ref = ag::leaf(clip.frames[static_cast<size_t>(t - 1)]);
        for (auto& [name, p] : flow_params) p->zero_grad();
        auto flow = model_.flow.estimate(x, ref);
        auto loss = ag::mse(ag::warp(ref, flow), x);
        ag::backward(loss);
        opt.step();
    }
    for (size_t i = 0; i < flow_params.size(); ++i) flow_params[i].second->trainable = saved[i];
    if (!model_.cfg.ablation.joint_flow_training)
        for (auto& [name, p] : flow_params) p->trainable = false;
}

std::vector<std::string> train_schedule(const std::vector<TrainingClip>& dataset,
                                        const std::vector<float>& lambdas,
                                        const ModelConfig& base_cfg, const TrainConfig& tcfg,
                                        const std::string& out_dir, std::ostream* log) {
    if (lambdas.empty()) throw std::invalid_argument("train_schedule: no lambdas");
    std::filesystem::create_directories(out_dir);

    // pretrain the flow once; every run starts from the same flow weights
    std::unique_ptr<CodecModel> flow_donor;
    if (tcfg.flow_pretrain_steps > 0) {
        ModelConfig c = base_cfg;
        flow_donor = std::make_unique<CodecModel>(c);
        Trainer tr(*flow_donor, tcfg);
        tr.pretrain_flow(dataset, tcfg.flow_pretrain_steps);
    }

    std::vector<std::string> paths;
    for (float lambda : lambdas) {
        ModelConfig c = base_cfg;
        c.lambda = lambda;
        CodecModel model(c);
        if (flow_donor) model.copy_params_from(*flow_donor, "flow.");
        TrainConfig t = tcfg;
        t.flow_pretrain_steps = 0;  // already initialized
        Trainer tr(model, t);
        if (log) *log << "=== training lambda " << lambda << " ===\n";
        tr.run(dataset, log);
        char name[64];
        std::snprintf(name, sizeof(name), "ck_lambda%g.dvck", static_cast<double>(lambda));
        const std::string path = (std::filesystem::path(out_dir) / name).string();
        model.save(path);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace dvc
