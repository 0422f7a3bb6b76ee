#include "dvc/nn.hpp"

#include <cmath>

namespace dvc::nn {

namespace {
thread_local int no_grad_depth = 0;
}

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }
bool grad_enabled() { return no_grad_depth == 0; }

ag::Var Parameter::var() const {
    if (!trainable || !grad_enabled()) return ag::leaf(value, false);
    return ag::param_leaf(value, grad);
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), static_cast<double>(t_));
    for (auto& [name, p] : params_) {
        if (!p->trainable) continue;
        if (!p->adam_m.defined()) {
            p->adam_m = Tensor::zeros(p->value.shape());
            p->adam_v = Tensor::zeros(p->value.shape());
        }
        float* w = p->value.data();
        const float* g = p->grad.data();
        float* m = p->adam_m.data();
        float* v = p->adam_v.data();
        const int64_t n = p->value.numel();
        const double lr = static_cast<double>(cfg_.lr) * p->lr_scale;
        for (int64_t i = 0; i < n; ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * g[i] * g[i];
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            w[i] -= static_cast<float>(lr * mh / (std::sqrt(vh) + cfg_.eps));
        }
    }
}

Conv2d::Conv2d(int cin, int cout, int k, int stride_, int pad_, Rng& rng, float w_std)
    : stride(stride_), pad(pad_) {
    w.init({cout, cin, k, k});
    b.init({cout});
    if (w_std < 0.0f) w_std = std::sqrt(2.0f / static_cast<float>(cin * k * k));
    if (w_std > 0.0f) rng.fill_normal(w.value, 0.0f, w_std);
}

ag::Var Conv2d::forward(const ag::Var& x) const {
    return ag::conv2d(x, w.var(), b.var(), stride, pad);
}

void Conv2d::collect(NamedParams& out, const std::string& prefix) {
    out.emplace_back(prefix + ".w", &w);
    out.emplace_back(prefix + ".b", &b);
}

ConvTranspose2d::ConvTranspose2d(int cin, int cout, int k, int stride_, int pad_, int out_pad_,
                                 Rng& rng, float w_std)
    : stride(stride_), pad(pad_), out_pad(out_pad_) {
    w.init({cin, cout, k, k});
    b.init({cout});
    if (w_std < 0.0f) w_std = std::sqrt(2.0f / static_cast<float>(cin * k * k / (stride_ * stride_)));
    if (w_std > 0.0f) rng.fill_normal(w.value, 0.0f, w_std);
}

ag::Var ConvTranspose2d::forward(const ag::Var& x) const {
    return ag::conv_transpose2d(x, w.var(), b.var(), stride, pad, out_pad);
}

void ConvTranspose2d::collect(NamedParams& out, const std::string& prefix) {
    out.emplace_back(prefix + ".w", &w);
    out.emplace_back(prefix + ".b", &b);
}

Gdn::Gdn(int channels_, bool inverse_) : inverse(inverse_), channels(channels_) {
    beta.init({channels});
    gamma.init({channels, channels});
    beta.value.fill(1.0f);
    for (int i = 0; i < channels; ++i) gamma.value(i, i) = 0.1f;
}

ag::Var Gdn::forward(const ag::Var& x) const {
    return ag::gdn(x, beta.var(), gamma.var(), inverse);
}

void Gdn::project() {
    float* bv = beta.value.data();
    for (int64_t i = 0; i < beta.value.numel(); ++i)
        if (bv[i] < kBetaMin) bv[i] = kBetaMin;
    float* gv = gamma.value.data();
    for (int64_t i = 0; i < gamma.value.numel(); ++i)
        if (gv[i] < 0.0f) gv[i] = 0.0f;
}

void Gdn::collect(NamedParams& out, const std::string& prefix) {
    out.emplace_back(prefix + ".beta", &beta);
    out.emplace_back(prefix + ".gamma", &gamma);
}

ResBlock::ResBlock(int channels, Rng& rng)
    : c0(channels, channels, 3, 1, 1, rng), c1(channels, channels, 3, 1, 1, rng) {}

ag::Var ResBlock::forward(const ag::Var& x) const {
    auto h = c0.forward(ag::relu(x));
    h = c1.forward(ag::relu(h));
    return ag::add(x, h);
}

void ResBlock::collect(NamedParams& out, const std::string& prefix) {
    c0.collect(out, prefix + ".c0");
    c1.collect(out, prefix + ".c1");
}

}  // namespace dvc::nn
