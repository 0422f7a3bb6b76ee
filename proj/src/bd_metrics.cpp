#include "dvc/bd_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dvc/config.hpp"
#include "dvc/metrics.hpp"

namespace dvc {

double RdPoint::msssim_db() const { return msssim_to_db(msssim); }

void validate_curve(const RdCurve& curve, size_t min_points) {
    if (curve.points.size() < min_points)
        throw std::runtime_error("rd curve '" + curve.label + "': needs >= " +
                                 std::to_string(min_points) + " points");
    for (size_t i = 0; i < curve.points.size(); ++i) {
        if (!(curve.points[i].bpp > 0.0))
            throw std::runtime_error("rd curve '" + curve.label + "': bpp must be positive");
        if (i > 0 && !(curve.points[i].bpp > curve.points[i - 1].bpp))
            throw std::runtime_error("rd curve '" + curve.label + "': bpp must be strictly ascending");
    }
}

namespace {

struct Samples {
    std::vector<double> q;   // quality (PSNR dB or MS-SSIM dB)
    std::vector<double> lr;  // log10(bpp)
};

Samples extract(const RdCurve& c, BdMetric m) {
    Samples s;
    for (const auto& p : c.points) {
        s.q.push_back(m == BdMetric::Psnr ? p.psnr_db : p.msssim_db());
        s.lr.push_back(std::log10(p.bpp));
    }
    return s;
}

struct Poly3 {
    // coefficients over the centered/scaled variable t = (x - mx)/sx
    double a[4];
    double mx, sx;

    double integral(double lo, double hi) const {
        auto antider = [&](double x) {
            const double t = (x - mx) / sx;
            double acc = 0.0, tp = t;
            for (int k = 0; k < 4; ++k) {
                acc += a[k] * tp / (k + 1);
                tp *= t;
            }
            return acc * sx;
        };
        return antider(hi) - antider(lo);
    }
};

// least-squares cubic via 4x4 normal equations
Poly3 polyfit3(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 4) throw std::runtime_error("bd: cubic fit needs >= 4 points");
    double mx = 0.0;
    for (double v : x) mx += v;
    mx /= static_cast<double>(n);
    double sx = 0.0;
    for (double v : x) sx = std::max(sx, std::abs(v - mx));
    if (sx == 0.0) throw std::runtime_error("bd: degenerate quality values");

    double A[4][4] = {};
    double b[4] = {};
    for (size_t i = 0; i < n; ++i) {
        const double t = (x[i] - mx) / sx;
        double tp[4] = {1.0, t, t * t, t * t * t};
        for (int r = 0; r < 4; ++r) {
            b[r] += tp[r] * y[i];
            for (int c = 0; c < 4; ++c) A[r][c] += tp[r] * tp[c];
        }
    }
    // gaussian elimination with partial pivoting
    int perm[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(A[perm[r]][col]) > std::abs(A[perm[piv]][col])) piv = r;
        std::swap(perm[col], perm[piv]);
        const double d = A[perm[col]][col];
        if (std::abs(d) < 1e-14) throw std::runtime_error("bd: singular fit (degenerate curve)");
        for (int r = col + 1; r < 4; ++r) {
            const double f = A[perm[r]][col] / d;
            for (int c = col; c < 4; ++c) A[perm[r]][c] -= f * A[perm[col]][c];
            b[perm[r]] -= f * b[perm[col]];
        }
    }
    Poly3 p{};
    for (int col = 3; col >= 0; --col) {
        double acc = b[perm[col]];
        for (int c = col + 1; c < 4; ++c) acc -= A[perm[col]][c] * p.a[c];
        p.a[col] = acc / A[perm[col]][col];
    }
    p.mx = mx;
    p.sx = sx;
    return p;
}

void overlap(const std::vector<double>& a, const std::vector<double>& b, double& lo, double& hi,
             const char* what) {
    lo = std::max(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
    hi = std::min(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    if (!(hi > lo))
        throw std::runtime_error(std::string("bd: curves have no overlapping ") + what + " range");
}

// integral of the piecewise-linear interpolant of (x,y) over [lo,hi];
// x must be strictly increasing
double pl_integral(std::vector<double> x, std::vector<double> y, double lo, double hi) {
    std::vector<size_t> idx(x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return x[i] < x[j]; });
    std::vector<double> xs, ys;
    for (size_t i : idx) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
    }
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw std::runtime_error("bd: piecewise-linear oracle needs strictly monotone samples");
    double acc = 0.0;
    for (size_t i = 1; i < xs.size(); ++i) {
        const double x0 = std::max(xs[i - 1], lo), x1 = std::min(xs[i], hi);
        if (x1 <= x0) continue;
        const double slope = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
        const double y0 = ys[i - 1] + slope * (x0 - xs[i - 1]);
        const double y1 = ys[i - 1] + slope * (x1 - xs[i - 1]);
        acc += 0.5 * (y0 + y1) * (x1 - x0);
    }
    return acc;
}

}  // namespace

double bd_rate(const RdCurve& anchor, const RdCurve& test, BdMetric metric) {
    validate_curve(anchor);
    validate_curve(test);
    const Samples sa = extract(anchor, metric), st = extract(test, metric);
    double lo, hi;
    overlap(sa.q, st.q, lo, hi, "quality");
    const Poly3 fa = polyfit3(sa.q, sa.lr), ft = polyfit3(st.q, st.lr);
    const double avg = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    return (std::pow(10.0, avg) - 1.0) * 100.0;
}

double bd_quality(const RdCurve& anchor, const RdCurve& test, BdMetric metric) {
    validate_curve(anchor);
    validate_curve(test);
    const Samples sa = extract(anchor, metric), st = extract(test, metric);
    double lo, hi;
    overlap(sa.lr, st.lr, lo, hi, "log-rate");
    const Poly3 fa = polyfit3(sa.lr, sa.q), ft = polyfit3(st.lr, st.q);
    return (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
}

double bd_rate_pl(const RdCurve& anchor, const RdCurve& test, BdMetric metric) {
    validate_curve(anchor);
    validate_curve(test);
    const Samples sa = extract(anchor, metric), st = extract(test, metric);
    double lo, hi;
    overlap(sa.q, st.q, lo, hi, "quality");
    const double avg =
        (pl_integral(st.q, st.lr, lo, hi) - pl_integral(sa.q, sa.lr, lo, hi)) / (hi - lo);
    return (std::pow(10.0, avg) - 1.0) * 100.0;
}

double bd_quality_pl(const RdCurve& anchor, const RdCurve& test, BdMetric metric) {
    validate_curve(anchor);
    validate_curve(test);
    const Samples sa = extract(anchor, metric), st = extract(test, metric);
    double lo, hi;
    overlap(sa.lr, st.lr, lo, hi, "log-rate");
    return (pl_integral(st.lr, st.q, lo, hi) - pl_integral(sa.lr, sa.q, lo, hi)) / (hi - lo);
}

RdCurve read_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open curve csv: " + path);
    RdCurve curve;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line.rfind("label", 0) == 0) continue;  // header
        const auto cols = split(line, ',');
        if (cols.size() != 4) throw std::runtime_error("curve csv: expected 4 columns: " + line);
        if (curve.label.empty()) curve.label = cols[0];
        RdPoint p;
        p.bpp = std::stod(cols[1]);
        p.psnr_db = std::stod(cols[2]);
        p.msssim = std::stod(cols[3]);
        curve.points.push_back(p);
    }
    return curve;
}

void write_curve_csv(const std::string& path, const RdCurve& curve) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << "label,bpp,psnr_db,msssim\n";
    f.precision(10);
    for (const auto& p : curve.points)
        f << curve.label << ',' << p.bpp << ',' << p.psnr_db << ',' << p.msssim << '\n';
}

}  // namespace dvc
