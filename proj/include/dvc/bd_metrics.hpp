#pragma once

#include <string>
#include <vector>

namespace dvc {

struct RdPoint {
    double bpp = 0.0;
    double psnr_db = 0.0;
    double msssim = 0.0;
    double msssim_db() const;
};

struct RdCurve {
    std::string label;
    std::vector<RdPoint> points;  // must be strictly ascending in bpp
};

enum class BdMetric { Psnr, MsssimDb };

// Average bitrate delta (percent) of `test` against `anchor` at equal
// quality: cubic fit of log10(rate) over quality, integrated over the
// overlapped quality interval. Negative means the test codec saves bits.
double bd_rate(const RdCurve& anchor, const RdCurve& test, BdMetric metric);
// Average quality delta (dB) at equal rate: dual fit over log10(rate).
double bd_quality(const RdCurve& anchor, const RdCurve& test, BdMetric metric);

// Piecewise-linear integration variants; kept in-tree as the independent
// cross-check for the cubic fits (requires monotone quality).
double bd_rate_pl(const RdCurve& anchor, const RdCurve& test, BdMetric metric);
double bd_quality_pl(const RdCurve& anchor, const RdCurve& test, BdMetric metric);

void validate_curve(const RdCurve& curve, size_t min_points = 4);

RdCurve read_curve_csv(const std::string& path);
void write_curve_csv(const std::string& path, const RdCurve& curve);

}  // namespace dvc
