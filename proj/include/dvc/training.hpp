#pragma once

#include <functional>
#include <map>
#include <ostream>

#include "dvc/frame_io.hpp"
#include "dvc/model.hpp"

namespace dvc {

struct TrainConfig {
    int steps = 2000;
    int batch = 4;
    float lr = 1e-4f;
    int plateau_window = 200;          // compare window medians this often
    double plateau_threshold = 0.005;  // < 0.5% median improvement drops lr by 10x
    float lr_min = 1e-7f;
    int warmup_steps = -1;             // <0: one pass over the dataset with clean references
    int flow_pretrain_steps = 0;       // photometric-only flow warmup
    float flow_pretrain_lr = 1e-4f;
    // lr multiplier for the entropy-model parameters; 1.0 keeps a single rate
    // for everything, short desk-scale schedules want the densities to adapt
    // much faster than the transforms
    float density_lr_scale = 1.0f;
    uint64_t seed = 7;
};

struct StepStats {
    double loss = 0.0;
    double distortion = 0.0;          // MSE
    double est_bits_motion = 0.0;     // per sample
    double est_bits_residual = 0.0;
    double bpp = 0.0;
    bool intra = false;
};

// lambda * MSE + (motion bits + residual bits) per pixel.
double rd_loss(double mse, double bits_motion, double bits_residual, double lambda,
               int width, int height);

// Stored reconstructions keyed by (clip, frame). An entry is written by the
// iteration that coded that frame and read (detached) when coding the next.
class ReconstructionBuffer {
public:
    bool has(int clip, int frame) const { return map_.count({clip, frame}) > 0; }
    const Tensor& get(int clip, int frame) const;
    void put(int clip, int frame, Tensor recon) { map_[{clip, frame}] = std::move(recon); }
    void clear() { map_.clear(); }
    size_t size() const { return map_.size(); }

private:
    std::map<std::pair<int, int>, Tensor> map_;
};

class Trainer {
public:
    Trainer(CodecModel& model, const TrainConfig& cfg);

    // One optimizer step over cfg.batch (clip, frame) samples.
    StepStats step(const std::vector<TrainingClip>& dataset);
    // Full schedule: optional flow pretraining, warmup pass, plateau lr drops.
    void run(const std::vector<TrainingClip>& dataset, std::ostream* log = nullptr);

    // Single-sample forward/backward (no optimizer step); exposed for tests.
    StepStats train_sample(const TrainingClip& clip, int t, bool clean_reference,
                           float grad_scale);

    void pretrain_flow(const std::vector<TrainingClip>& dataset, int steps);

    ReconstructionBuffer& buffer() { return buffer_; }
    nn::Adam& optimizer() { return *opt_; }
    int64_t global_step() const { return step_; }

private:
    StepStats intra_sample(const Tensor& frame, int clip, float grad_scale);
    StepStats p_sample(const Tensor& frame, const Tensor& reference, int clip, int t,
                       float grad_scale);
    void maybe_drop_lr(std::ostream* log);

    CodecModel& model_;
    TrainConfig cfg_;
    std::unique_ptr<nn::Adam> opt_;
    Rng rng_;
    ReconstructionBuffer buffer_;
    std::vector<int> cursor_;
    std::vector<int> clip_order_;
    size_t order_pos_ = 0;
    std::vector<double> loss_history_;
    double prev_window_median_ = -1.0;
    int64_t step_ = 0;
};

// One independent model per lambda (identical init and data order), shared
// flow pretraining, checkpoints written as <out_dir>/ck_lambda<value>.dvck.
std::vector<std::string> train_schedule(const std::vector<TrainingClip>& dataset,
                                        const std::vector<float>& lambdas,
                                        const ModelConfig& base_cfg, const TrainConfig& tcfg,
                                        const std::string& out_dir, std::ostream* log = nullptr);

}  // namespace dvc
