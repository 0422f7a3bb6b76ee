#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dvc/bd_metrics.hpp"

using namespace dvc;

namespace {

RdCurve curve_from(const std::vector<std::pair<double, double>>& pts, const std::string& label) {
    RdCurve c;
    c.label = label;
    for (const auto& [bpp, q] : pts) {
        RdPoint p;
        p.bpp = bpp;
        p.psnr_db = q;
        p.msssim = 1.0 - std::pow(10.0, -q / 10.0);  // so msssim_db == psnr_db
        c.points.push_back(p);
    }
    return c;
}

RdCurve scaled_rates(const RdCurve& c, double factor) {
    RdCurve out = c;
    out.label += "-scaled";
    for (auto& p : out.points) p.bpp *= factor;
    return out;
}

RdCurve shifted_quality(const RdCurve& c, double db) {
    RdCurve out = c;
    out.label += "-shifted";
    for (auto& p : out.points) p.psnr_db += db;
    return out;
}

const RdCurve kAnchor = curve_from({{0.10, 30.0}, {0.21, 32.5}, {0.45, 34.8}, {0.95, 37.0}}, "a");

}  // namespace

TEST_CASE("bd: identical curves give zero deltas") {
    CHECK(bd_rate(kAnchor, kAnchor, BdMetric::Psnr) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bd_quality(kAnchor, kAnchor, BdMetric::Psnr) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bd_rate_pl(kAnchor, kAnchor, BdMetric::Psnr) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("bd: doubled rates at equal quality cost exactly +100%") {
    const RdCurve test = scaled_rates(kAnchor, 2.0);
    CHECK(bd_rate(kAnchor, test, BdMetric::Psnr) == doctest::Approx(100.0).epsilon(0.005));
    CHECK(bd_rate_pl(kAnchor, test, BdMetric::Psnr) == doctest::Approx(100.0).epsilon(0.005));
    // halved rates save 50%
    CHECK(bd_rate(kAnchor, scaled_rates(kAnchor, 0.5), BdMetric::Psnr) ==
          doctest::Approx(-50.0).epsilon(0.005));
}

TEST_CASE("bd: a uniform +1dB shift is +1dB bd-quality") {
    const RdCurve test = shifted_quality(kAnchor, 1.0);
    CHECK(bd_quality(kAnchor, test, BdMetric::Psnr) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bd: antisymmetric under curve swap") {
    const RdCurve other =
        curve_from({{0.12, 30.4}, {0.24, 33.0}, {0.5, 35.1}, {0.9, 36.8}}, "b");
    const double ab = bd_quality(kAnchor, other, BdMetric::Psnr);
    const double ba = bd_quality(other, kAnchor, BdMetric::Psnr);
    CHECK(std::abs(ab + ba) < 1e-6);
}

TEST_CASE("bd: cubic fit agrees with the piecewise-linear oracle on smooth curves") {
    // dense smooth synthetic curves (log-rate roughly linear in quality with
    // mild curvature)
    auto smooth = [](double scale, double curv, int n, double q0) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < n; ++i) {
            const double q = q0 + 1.5 * i;
            const double lr = -2.0 + 0.09 * (q - 30.0) + curv * (q - 34.0) * (q - 34.0);
            pts.push_back({scale * std::pow(10.0, lr), q});
        }
        return pts;
    };
    const RdCurve a = curve_from(smooth(1.0, 0.0008, 8, 29.0), "a");
    const RdCurve b = curve_from(smooth(0.8, 0.0011, 8, 30.0), "b");

    const double rate_fit = bd_rate(a, b, BdMetric::Psnr);
    const double rate_pl = bd_rate_pl(a, b, BdMetric::Psnr);
    CHECK(std::abs(rate_fit - rate_pl) < 2.0);  // percentage points

    const double q_fit = bd_quality(a, b, BdMetric::Psnr);
    const double q_pl = bd_quality_pl(a, b, BdMetric::Psnr);
    CHECK(std::abs(q_fit - q_pl) < 0.05);
}

TEST_CASE("bd: msssim metric path uses the dB transform") {
    const RdCurve test = scaled_rates(kAnchor, 2.0);
    // kAnchor's msssim was built so msssim_db == psnr_db
    CHECK(bd_rate(kAnchor, test, BdMetric::MsssimDb) == doctest::Approx(100.0).epsilon(0.005));
}

TEST_CASE("bd: input validation") {
    RdCurve three = kAnchor;
    three.points.pop_back();
    CHECK_THROWS(bd_rate(three, kAnchor, BdMetric::Psnr));

    RdCurve unsorted = kAnchor;
    std::swap(unsorted.points[1], unsorted.points[2]);
    CHECK_THROWS(bd_rate(unsorted, kAnchor, BdMetric::Psnr));

    // disjoint quality ranges: no overlap to integrate
    const RdCurve low = curve_from({{0.1, 10.0}, {0.2, 11.0}, {0.3, 12.0}, {0.4, 13.0}}, "low");
    CHECK_THROWS(bd_rate(low, kAnchor, BdMetric::Psnr));
}

TEST_CASE("bd: curve csv roundtrip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "dvc_tests" / "bd_csv";
    fs::create_directories(dir);
    const std::string path = (dir / "c.csv").string();
    write_curve_csv(path, kAnchor);
    const RdCurve back = read_curve_csv(path);
    CHECK(back.label == kAnchor.label);
    REQUIRE(back.points.size() == kAnchor.points.size());
    for (size_t i = 0; i < back.points.size(); ++i) {
        CHECK(back.points[i].bpp == doctest::Approx(kAnchor.points[i].bpp).epsilon(1e-9));
        CHECK(back.points[i].psnr_db == doctest::Approx(kAnchor.points[i].psnr_db).epsilon(1e-9));
        CHECK(back.points[i].msssim == doctest::Approx(kAnchor.points[i].msssim).epsilon(1e-9));
    }
}
