#include "dvc/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace dvc {

namespace {

inline double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr int kMaxWidth = 8;

}  // namespace

// Evaluates the monotone chain for one channel; collects gradients for the
// two half-offset points of one input value in a single fused pass.
struct DensityKernel {
    const FactorizedDensity& d;
    int c;
    int K, F;

    // weights for channel c, stage s
    const float* w(int s) const {
        const int in = s == 0 ? 1 : F, out = s == d.cfg_.stages - 1 ? 1 : F;
        return d.w_[s].value.data() + static_cast<int64_t>(c) * out * in;
    }
    const float* b(int s) const {
        const int out = s == d.cfg_.stages - 1 ? 1 : F;
        return d.b_[s].value.data() + static_cast<int64_t>(c) * out;
    }
    const float* a(int s) const { return d.a_[s].value.data() + static_cast<int64_t>(c) * F; }

    struct Trace {
        double u[5][kMaxWidth];   // layer inputs (u[0][0] = x)
        double z[4][kMaxWidth];   // pre-nonlinearity
        double cdf;
    };

    void forward(double x, Trace& t) const {
        t.u[0][0] = x;
        for (int s = 0; s < K; ++s) {
            const int in = s == 0 ? 1 : F, out = s == K - 1 ? 1 : F;
            const float* ws = w(s);
            const float* bs = b(s);
            for (int j = 0; j < out; ++j) {
                double z = bs[j];
                for (int i = 0; i < in; ++i) z += softplus(ws[j * in + i]) * t.u[s][i];
                t.z[s][j] = z;
                if (s < K - 1) {
                    const double A = std::tanh(static_cast<double>(a(s)[j]));
                    t.u[s + 1][j] = z + A * std::tanh(z);
                }
            }
        }
        t.cdf = sigmoid(t.z[K - 1][0]);
    }

    // dc: upstream gradient on the cdf value. Accumulates parameter grads via
    // the grad pointers and returns d(cdf)/dx contribution.
    double backward(const Trace& t, double dc, float* const* wg, float* const* bg,
                    float* const* ag) const {
        double du[kMaxWidth];
        double dz[kMaxWidth];
        // sigmoid
        dz[0] = dc * t.cdf * (1.0 - t.cdf);
        for (int s = K - 1; s >= 0; --s) {
            const int in = s == 0 ? 1 : F, out = s == K - 1 ? 1 : F;
            const float* ws = w(s);
            float* wgs = wg ? wg[s] + static_cast<int64_t>(c) * out * in : nullptr;
            float* bgs = bg ? bg[s] + static_cast<int64_t>(c) * out : nullptr;
            for (int i = 0; i < in; ++i) du[i] = 0.0;
            for (int j = 0; j < out; ++j) {
                const double dzj = dz[j];
                if (bgs) bgs[j] += static_cast<float>(dzj);
                for (int i = 0; i < in; ++i) {
                    const double wraw = ws[j * in + i];
                    const double sp = softplus(wraw);
                    if (wgs)
                        wgs[j * in + i] += static_cast<float>(dzj * sigmoid(wraw) * t.u[s][i]);
                    du[i] += sp * dzj;
                }
            }
            if (s == 0) return du[0];
            // step through the previous stage's nonlinearity
            const float* as = a(s - 1);
            float* ags = ag ? ag[s - 1] + static_cast<int64_t>(c) * F : nullptr;
            for (int j = 0; j < F; ++j) {
                const double z = t.z[s - 1][j];
                const double th = std::tanh(z);
                const double A = std::tanh(static_cast<double>(as[j]));
                if (ags) ags[j] += static_cast<float>(du[j] * th * (1.0 - A * A));
                dz[j] = du[j] * (1.0 + A * (1.0 - th * th));
            }
        }
        return 0.0;  // unreachable
    }
};

FactorizedDensity::FactorizedDensity(int channels, const DensityConfig& cfg, Rng& rng)
    : channels_(channels), cfg_(cfg) {
    if (cfg.width > kMaxWidth || cfg.stages < 2)
        throw std::invalid_argument("FactorizedDensity: unsupported config");
    const int K = cfg.stages, F = cfg.width;
    w_.resize(K);
    b_.resize(K);
    a_.resize(K - 1);
    // initial chain gain ~0.2 so the initial CDF spans roughly +/-40 and is
    // saturated well inside the +/-tail probes
    const double gain = 0.2;
    const double per_stage = std::pow(gain / std::pow(static_cast<double>(F), K - 1),
                                      1.0 / static_cast<double>(K));
    const float wraw = static_cast<float>(std::log(std::expm1(per_stage)));
    for (int s = 0; s < K; ++s) {
        const int in = s == 0 ? 1 : F, out = s == K - 1 ? 1 : F;
        w_[s].init({channels, out, in});
        w_[s].value.fill(wraw);
        b_[s].init({channels, out});
        if (s < K - 1) {
            rng.fill_uniform(b_[s].value, -0.5f, 0.5f);
            a_[s].init({channels, out});
        }
    }
}

double FactorizedDensity::cdf(int channel, double x) const {
    DensityKernel k{*this, channel, cfg_.stages, cfg_.width};
    DensityKernel::Trace t;
    k.forward(x, t);
    return t.cdf;
}

std::vector<double> FactorizedDensity::pmf(int channel, int vmax) const {
    std::vector<double> out(static_cast<size_t>(2 * vmax + 2));
    DensityKernel k{*this, channel, cfg_.stages, cfg_.width};
    DensityKernel::Trace t;
    double lo = 0.0;
    k.forward(-vmax - 0.5, t);
    const double leftmost = t.cdf;
    lo = leftmost;
    for (int v = -vmax; v <= vmax; ++v) {
        k.forward(v + 0.5, t);
        out[static_cast<size_t>(v + vmax)] = std::max(0.0, t.cdf - lo);
        lo = t.cdf;
    }
    out.back() = std::max(0.0, leftmost + (1.0 - lo));  // folded tails -> escape
    return out;
}

double FactorizedDensity::bits_tensor(const Tensor& latent) const {
    if (latent.dim(0) != channels_) throw std::runtime_error("density: channel mismatch");
    const int64_t plane = latent.numel() / channels_;
    double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
    for (int c = 0; c < channels_; ++c) {
        DensityKernel k{*this, c, cfg_.stages, cfg_.width};
        DensityKernel::Trace tl, th;
        const float* p = latent.data() + c * plane;
        double acc = 0.0;
        for (int64_t i = 0; i < plane; ++i) {
            k.forward(p[i] - 0.5, tl);
            k.forward(p[i] + 0.5, th);
            const double pr = std::max(th.cdf - tl.cdf, cfg_.p_min);
            acc -= std::log2(pr);
        }
        total += acc;
    }
    return total;
}

ag::Var FactorizedDensity::bits(const ag::Var& latent) const {
    if (latent->value.dim(0) != channels_) throw std::runtime_error("density: channel mismatch");
    const int K = cfg_.stages;
    std::vector<ag::Var> parents{latent};
    for (int s = 0; s < K; ++s) parents.push_back(w_[s].var());
    for (int s = 0; s < K; ++s) parents.push_back(b_[s].var());
    for (int s = 0; s < K - 1; ++s) parents.push_back(a_[s].var());

    Tensor y({1});
    y.at(0) = static_cast<float>(bits_tensor(latent->value));

    const FactorizedDensity* self = this;
    return ag::make_node(std::move(y), std::move(parents), [self, K](ag::Node& n) {
        const double g = static_cast<double>(n.grad.at(0));
        const ag::Var& lat = n.parents[0];
        const int C = self->channels_;
        const int64_t plane = lat->value.numel() / C;
        const double inv_ln2 = 1.4426950408889634074;

        const bool need_lat = lat->requires_grad;
        float* latg = need_lat ? lat->ensure_grad().data() : nullptr;
        std::vector<float*> wg(static_cast<size_t>(K)), bg(static_cast<size_t>(K)),
            agr(static_cast<size_t>(K - 1));
        for (int s = 0; s < K; ++s) {
            wg[static_cast<size_t>(s)] = n.parents[1 + s]->ensure_grad().data();
            bg[static_cast<size_t>(s)] = n.parents[1 + K + s]->ensure_grad().data();
        }
        for (int s = 0; s < K - 1; ++s)
            agr[static_cast<size_t>(s)] = n.parents[1 + 2 * K + s]->ensure_grad().data();

#pragma omp parallel for schedule(static)
        for (int c = 0; c < C; ++c) {
            DensityKernel k{*self, c, K, self->cfg_.width};
            DensityKernel::Trace tl, th;
            const float* p = lat->value.data() + c * plane;
            for (int64_t i = 0; i < plane; ++i) {
                k.forward(p[i] - 0.5, tl);
                k.forward(p[i] + 0.5, th);
                const double pr = th.cdf - tl.cdf;
                if (pr <= self->cfg_.p_min) continue;  // floored: no gradient
                const double dbits = -g * inv_ln2 / pr;
                // bits = -log2(c_hi - c_lo): dc_hi = dbits, dc_lo = -dbits
                const double dx_hi = k.backward(th, dbits, wg.data(), bg.data(), agr.data());
                const double dx_lo = k.backward(tl, -dbits, wg.data(), bg.data(), agr.data());
                if (latg) latg[c * plane + i] += static_cast<float>(dx_hi + dx_lo);
            }
        }
    });
}

void FactorizedDensity::collect(nn::NamedParams& out, const std::string& prefix) {
    for (size_t s = 0; s < w_.size(); ++s) {
        out.emplace_back(prefix + ".w" + std::to_string(s), &w_[s]);
        out.emplace_back(prefix + ".b" + std::to_string(s), &b_[s]);
        if (s < a_.size()) out.emplace_back(prefix + ".a" + std::to_string(s), &a_[s]);
    }
}

ag::Var quantize_train(const ag::Var& x, Rng& rng) {
    Tensor noise(x->value.shape());
    rng.fill_uniform(noise, -0.5f, 0.5f);
    return ag::add_const(x, noise);
}

Tensor quantize_inference(const Tensor& x) { return ag::round_half_away(x); }

std::vector<int32_t> to_symbols(const Tensor& t) {
    std::vector<int32_t> out(static_cast<size_t>(t.numel()));
    const float* p = t.data();
    for (int64_t i = 0; i < t.numel(); ++i) out[static_cast<size_t>(i)] = static_cast<int32_t>(std::lrint(p[i]));
    return out;
}

Tensor from_symbols(const std::vector<int32_t>& syms, std::vector<int> shape) {
    Tensor t(std::move(shape));
    if (static_cast<int64_t>(syms.size()) != t.numel())
        throw std::runtime_error("from_symbols: count mismatch");
    float* p = t.data();
    for (size_t i = 0; i < syms.size(); ++i) p[i] = static_cast<float>(syms[i]);
    return t;
}

}  // namespace dvc
