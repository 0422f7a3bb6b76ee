#pragma once

#include <vector>

#include "dvc/tensor.hpp"

namespace dvc {

// -10*log10(MSE), MAX = 1. Identical inputs return +infinity (the lossless
// marker); psnr_is_lossless() tells them apart from finite scores.
double psnr(const Tensor& a, const Tensor& b);
bool psnr_is_lossless(double v);
double sequence_psnr(const std::vector<Tensor>& a, const std::vector<Tensor>& b);

// Multi-scale SSIM on [0,1] RGB; 11x11 Gaussian (sigma 1.5), valid region,
// 2x2 mean-pool between scales. Uses 5 scales when min(H,W) >= 176 and
// otherwise as many as fit an 11px window, with the scale weights
// renormalized to sum 1.
double ms_ssim(const Tensor& a, const Tensor& b);
double sequence_ms_ssim(const std::vector<Tensor>& a, const std::vector<Tensor>& b);
double msssim_to_db(double v);  // -10*log10(1-v)

int ms_ssim_scales_for(int h, int w);

double bpp(uint64_t bits, int width, int height);

}  // namespace dvc
