#pragma once

#include <cstdint>
#include <vector>

#include "dvc/nn.hpp"

namespace dvc {

struct DensityConfig {
    int stages = 4;       // monotone affine+nonlinearity stages
    int width = 3;        // hidden width per stage
    float tail = 60.0f;   // |x| where the CDF must be saturated to 1e-4
    double p_min = 1.0 / 65536.0;  // probability floor inside the -log2
};

// Per-channel learned cumulative distribution, built from a chain of small
// monotone layers: z = softplus(W) u + b, u' = z + tanh(a) * tanh(z), with a
// final sigmoid. Nonnegative weights and |a|<1 keep every c_k nondecreasing
// by construction. Prices quantized symbols during training (noisy values)
// and inference (integers), and supplies exact double-precision interval
// masses for the range coder tables.
class FactorizedDensity {
public:
    FactorizedDensity(int channels, const DensityConfig& cfg, Rng& rng);

    int channels() const { return channels_; }
    const DensityConfig& config() const { return cfg_; }

    // Total bits to code `latent` ([C,h,w]): sum of -log2(c(v+.5)-c(v-.5)),
    // floored at p_min. Differentiable w.r.t. latent and the density params.
    ag::Var bits(const ag::Var& latent) const;
    double bits_tensor(const Tensor& latent) const;

    // Double-precision CDF used for coder tables (and tests).
    double cdf(int channel, double x) const;
    // Interval masses for integers -vmax..vmax plus the folded tail mass,
    // size 2*vmax+2, last entry = escape.
    std::vector<double> pmf(int channel, int vmax) const;

    void collect(nn::NamedParams& out, const std::string& prefix);

private:
    int channels_;
    DensityConfig cfg_;
    // stage s: w[s]: [C, out, in], b[s]: [C, out], a[s]: [C, out] (no a on last)
    std::vector<nn::Parameter> w_, b_, a_;

    friend struct DensityKernel;
};

// Training-time quantization proxy: adds iid uniform noise in [-0.5, 0.5);
// the gradient passes through unchanged.
ag::Var quantize_train(const ag::Var& x, Rng& rng);

// Inference quantization: round half away from zero.
Tensor quantize_inference(const Tensor& x);

// Integer grid helpers for the coding path.
std::vector<int32_t> to_symbols(const Tensor& t);
Tensor from_symbols(const std::vector<int32_t>& syms, std::vector<int> shape);

}  // namespace dvc
