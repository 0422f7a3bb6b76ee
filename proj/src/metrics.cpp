#include "dvc/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dvc/kernels.hpp"

namespace dvc {

double psnr(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::runtime_error("psnr: dimension mismatch");
    const double mse = kern::ops().sum_sq_diff(a.data(), b.data(), a.numel()) /
                       static_cast<double>(a.numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

bool psnr_is_lossless(double v) { return std::isinf(v) && v > 0.0; }

double sequence_psnr(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
    if (a.size() != b.size() || a.empty()) throw std::runtime_error("sequence_psnr: bad inputs");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += psnr(a[i], b[i]);
    return acc / static_cast<double>(a.size());
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

const std::vector<double>& gauss_kernel() {
    static const std::vector<double> k = [] {
        std::vector<double> v(kWin);
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - (kWin - 1) / 2.0;
            v[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += v[static_cast<size_t>(i)];
        }
        for (auto& x : v) x /= sum;
        return v;
    }();
    return k;
}

struct Plane {
    int h = 0, w = 0;
    std::vector<double> v;
    double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
    double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

Plane from_channel(const Tensor& t, int c) {
    Plane p;
    p.h = t.dim(1);
    p.w = t.dim(2);
    p.v.resize(static_cast<size_t>(p.h) * p.w);
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) p.at(y, x) = t(c, y, x);
    return p;
}

// separable valid-region Gaussian
Plane filter_valid(const Plane& in) {
    const auto& k = gauss_kernel();
    Plane mid;  // horizontal pass
    mid.h = in.h;
    mid.w = in.w - kWin + 1;
    mid.v.resize(static_cast<size_t>(mid.h) * mid.w);
    for (int y = 0; y < mid.h; ++y)
        for (int x = 0; x < mid.w; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWin; ++i) s += k[static_cast<size_t>(i)] * in.at(y, x + i);
            mid.at(y, x) = s;
        }
    Plane out;
    out.h = in.h - kWin + 1;
    out.w = mid.w;
    out.v.resize(static_cast<size_t>(out.h) * out.w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWin; ++i) s += k[static_cast<size_t>(i)] * mid.at(y + i, x);
            out.at(y, x) = s;
        }
    return out;
}

Plane downsample2(const Plane& in) {
    Plane out;
    out.h = in.h / 2;
    out.w = in.w / 2;
    out.v.resize(static_cast<size_t>(out.h) * out.w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out.at(y, x) = 0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) +
                                   in.at(2 * y + 1, 2 * x) + in.at(2 * y + 1, 2 * x + 1));
    return out;
}

// mean luminance & contrast-structure terms for one scale
void ssim_terms(const Plane& a, const Plane& b, double& mean_l, double& mean_cs) {
    Plane mua = filter_valid(a), mub = filter_valid(b);
    Plane a2 = a, b2 = b, ab = a;
    for (size_t i = 0; i < a.v.size(); ++i) {
        a2.v[i] = a.v[i] * a.v[i];
        b2.v[i] = b.v[i] * b.v[i];
        ab.v[i] = a.v[i] * b.v[i];
    }
    Plane sa2 = filter_valid(a2), sb2 = filter_valid(b2), sab = filter_valid(ab);
    double lsum = 0.0, csum = 0.0;
    const size_t n = mua.v.size();
    for (size_t i = 0; i < n; ++i) {
        const double ma = mua.v[i], mb = mub.v[i];
        const double va = sa2.v[i] - ma * ma;
        const double vb = sb2.v[i] - mb * mb;
        const double cov = sab.v[i] - ma * mb;
        lsum += (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        csum += (2.0 * cov + kC2) / (va + vb + kC2);
    }
    mean_l = lsum / static_cast<double>(n);
    mean_cs = csum / static_cast<double>(n);
}

}  // namespace

int ms_ssim_scales_for(int h, int w) {
    int m = 0;
    int d = std::min(h, w);
    while (m < 5 && d >= kWin) {
        ++m;
        d /= 2;
    }
    if (m == 0) throw std::runtime_error("ms_ssim: image smaller than the filter window");
    return m;
}

double ms_ssim(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::runtime_error("ms_ssim: dimension mismatch");
    const int scales = ms_ssim_scales_for(a.dim(1), a.dim(2));
    double wsum = 0.0;
    for (int s = 0; s < scales; ++s) wsum += kWeights[s];

    double result = 0.0;
    for (int c = 0; c < a.dim(0); ++c) {
        Plane pa = from_channel(a, c), pb = from_channel(b, c);
        double score = 1.0;
        for (int s = 0; s < scales; ++s) {
            double l = 0.0, cs = 0.0;
            ssim_terms(pa, pb, l, cs);
            const double wexp = kWeights[s] / wsum;
            if (s == scales - 1)
                score *= std::pow(std::abs(l * cs), wexp);
            else
                score *= std::pow(std::abs(cs), wexp);
            if (s + 1 < scales) {
                pa = downsample2(pa);
                pb = downsample2(pb);
            }
        }
        result += score;
    }
    return result / static_cast<double>(a.dim(0));
}

double sequence_ms_ssim(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
    if (a.size() != b.size() || a.empty()) throw std::runtime_error("sequence_ms_ssim: bad inputs");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += ms_ssim(a[i], b[i]);
    return acc / static_cast<double>(a.size());
}

double msssim_to_db(double v) {
    const double d = 1.0 - v;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(d);
}

double bpp(uint64_t bits, int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("bpp: bad dims");
    return static_cast<double>(bits) / (static_cast<double>(width) * static_cast<double>(height));
}

}  // namespace dvc
