#include <doctest.h>

#include <cmath>

#include "dvc/metrics.hpp"
#include "msssim_ref.hpp"

using namespace dvc;

namespace {
Tensor textured(Rng& rng, int h, int w) {
    Tensor t({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double base = 0.5 + 0.3 * std::sin(0.21 * x + 0.9 * c) * std::cos(0.17 * y);
                t(c, y, x) = static_cast<float>(std::clamp(base + 0.08 * rng.normal(), 0.0, 1.0));
            }
    return t;
}

Tensor add_noise(const Tensor& t, Rng& rng, double sigma) {
    Tensor out = t.clone();
    for (int64_t i = 0; i < out.numel(); ++i)
        out.at(i) = static_cast<float>(std::clamp(out.at(i) + sigma * rng.normal(), 0.0, 1.0));
    return out;
}
}  // namespace

TEST_CASE("psnr: exact arithmetic and the lossless marker") {
    Tensor a = Tensor::full({3, 10, 10}, 0.5f);
    CHECK(psnr_is_lossless(psnr(a, a)));

    Tensor b = a.clone();
    for (int64_t i = 0; i < b.numel(); ++i) b.at(i) += 0.1f;  // uniform error
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-4));

    // MSE 1e-3 -> 30 dB; MSE 1e-2 -> 20 dB
    Tensor c = a.clone();
    for (int64_t i = 0; i < c.numel(); ++i) c.at(i) += std::sqrt(0.001f);
    CHECK(psnr(a, c) == doctest::Approx(30.0).epsilon(1e-3));

    CHECK_THROWS(psnr(a, Tensor::zeros({3, 9, 10})));
}

TEST_CASE("bpp: original dimensions divide, padding does not matter") {
    CHECK(bpp(10000, 100, 100) == doctest::Approx(1.0));
    CHECK(bpp(0, 64, 64) == 0.0);
    CHECK(bpp(8128, 127, 8) == doctest::Approx(8.0));  // uses exactly W*H
    CHECK_THROWS(bpp(1, 0, 10));
}

TEST_CASE("ms-ssim: identical images score exactly 1") {
    Rng rng(91);
    Tensor a = textured(rng, 64, 64);
    CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ms-ssim: scale count tracks image size") {
    CHECK(ms_ssim_scales_for(176, 176) == 5);
    CHECK(ms_ssim_scales_for(64, 64) == 3);
    CHECK(ms_ssim_scales_for(11, 11) == 1);
    CHECK_THROWS(ms_ssim_scales_for(8, 8));
}

TEST_CASE("ms-ssim: decreases monotonically with noise level") {
    Rng rng(92);
    Tensor a = textured(rng, 96, 96);
    double prev = 1.0;
    for (double sigma : {0.02, 0.05, 0.1, 0.2}) {
        Rng noise_rng(1234);  // same noise pattern, scaled
        const double v = ms_ssim(a, add_noise(a, noise_rng, sigma));
        CHECK(v < prev);
        CHECK(v > 0.0);
        prev = v;
    }
}

TEST_CASE("ms-ssim: matches the brute-force reference within 1e-4 [slow]") {
    Rng rng(93);
    for (int it = 0; it < 5; ++it) {
        Tensor a = textured(rng, 176, 180);
        Rng noise_rng(500 + it);
        Tensor b = add_noise(a, noise_rng, 0.02 + 0.03 * it);
        const double mine = ms_ssim(a, b);
        const double ref = dvc::testing::ms_ssim_reference(a, b);
        CHECK(std::abs(mine - ref) < 1e-4);
    }
}

TEST_CASE("msssim_to_db") {
    CHECK(msssim_to_db(0.9) == doctest::Approx(10.0));
    CHECK(msssim_to_db(0.99) == doctest::Approx(20.0));
    CHECK(std::isinf(msssim_to_db(1.0)));
}
