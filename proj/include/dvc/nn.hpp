#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dvc/autograd.hpp"
#include "dvc/tensor.hpp"

namespace dvc::nn {

struct Parameter {
    Tensor value;
    Tensor grad;
    Tensor adam_m, adam_v;  // allocated by the optimizer on first step
    bool trainable = true;
    float lr_scale = 1.0f;  // per-parameter multiplier on the optimizer lr

    void init(std::vector<int> shape) {
        value = Tensor(shape);
        grad = Tensor(std::move(shape));
    }
    void zero_grad() { grad.fill(0.0f); }
    ag::Var var() const;  // leaf tied to value/grad (plain leaf when grads are off)
};

using NamedParams = std::vector<std::pair<std::string, Parameter*>>;

// Scoped switch that makes Parameter::var() emit constant leaves, so forward
// passes build no backward closures (encode/decode paths).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};
bool grad_enabled();

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

class Adam {
public:
    Adam(NamedParams params, AdamConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {}

    void zero_grad() {
        for (auto& [name, p] : params_) p->zero_grad();
    }
    void step();
    void set_lr(float lr) { cfg_.lr = lr; }
    float lr() const { return cfg_.lr; }
    int64_t steps_taken() const { return t_; }

private:
    NamedParams params_;
    AdamConfig cfg_;
    int64_t t_ = 0;
};

class Conv2d {
public:
    // w_std < 0 selects He initialization; 0 gives an exactly-zero layer.
    Conv2d(int cin, int cout, int k, int stride, int pad, Rng& rng, float w_std = -1.0f);

    ag::Var forward(const ag::Var& x) const;
    void collect(NamedParams& out, const std::string& prefix);

    Parameter w, b;
    int stride, pad;
};

class ConvTranspose2d {
public:
    ConvTranspose2d(int cin, int cout, int k, int stride, int pad, int out_pad, Rng& rng,
                    float w_std = -1.0f);

    ag::Var forward(const ag::Var& x) const;
    void collect(NamedParams& out, const std::string& prefix);

    Parameter w, b;
    int stride, pad, out_pad;
};

// Generalized divisive normalization (and its one-step inverse, which carries
// its own parameters). beta/gamma are stored directly and projected back to
// the feasible set after every optimizer step.
class Gdn {
public:
    static constexpr float kBetaMin = 1e-6f;

    Gdn(int channels, bool inverse);

    ag::Var forward(const ag::Var& x) const;
    void project();
    void collect(NamedParams& out, const std::string& prefix);

    Parameter beta, gamma;
    bool inverse;
    int channels;
};

// Pre-activation residual block: x + conv(relu(conv(relu(x)))).
class ResBlock {
public:
    ResBlock(int channels, Rng& rng);

    ag::Var forward(const ag::Var& x) const;
    void collect(NamedParams& out, const std::string& prefix);

    Conv2d c0, c1;
};

}  // namespace dvc::nn
