#pragma once

#include <cmath>
#include <functional>

#include "dvc/autograd.hpp"

namespace dvc::testing {

// Central finite differences against the analytic gradient of a scalar graph.
// build: constructs the scalar output from the given leaf inputs.
//
// Two float realities are handled explicitly:
//  - roundoff: forward passes run in float, so per-coordinate differences are
//    noisy; the comparison is made on the whole gradient vector,
//    ||num - ana|| / max(||ana||, ||num||, floor), where iid noise averages out;
//  - kinks: central differences are meaningless across relu/bilinear corners,
//    so coordinates whose probe interval shows strong curvature
//    (|f+ + f- - 2 f0| large versus the symmetric difference) are excluded,
//    mirroring the "kinks excluded" convention of piecewise-linear ops. A
//    check where most coordinates sit on kinks fails loudly.
inline double gradcheck(std::vector<Tensor> inputs,
                        const std::function<ag::Var(const std::vector<ag::Var>&)>& build,
                        double eps = 5e-3, double floor_val = 1e-2) {
    std::vector<ag::Var> leaves;
    for (auto& t : inputs) leaves.push_back(ag::leaf(t, true));
    auto out = build(leaves);
    ag::backward(out);
    const double f0 = static_cast<double>(ag::scalar(build(leaves)));

    double num_sq = 0.0, ana_sq = 0.0, diff_sq = 0.0;
    int64_t total = 0, skipped = 0;
    for (size_t k = 0; k < inputs.size(); ++k) {
        Tensor& x = leaves[k]->value;
        const Tensor& g = leaves[k]->ensure_grad();
        for (int64_t i = 0; i < x.numel(); ++i) {
            const float keep = x.at(i);
            x.at(i) = keep + static_cast<float>(eps);
            const double fp = static_cast<double>(ag::scalar(build(leaves)));
            x.at(i) = keep - static_cast<float>(eps);
            const double fm = static_cast<double>(ag::scalar(build(leaves)));
            x.at(i) = keep;
            ++total;
            const double second = std::abs(fp + fm - 2.0 * f0);
            const double first = std::abs(fp - fm);
            if (second > 0.3 * first + 1e-6 * (std::abs(f0) + 1.0)) {
                ++skipped;
                continue;
            }
            const double num = (fp - fm) / (2.0 * eps);
            const double ana = static_cast<double>(g.at(i));
            num_sq += num * num;
            ana_sq += ana * ana;
            diff_sq += (num - ana) * (num - ana);
        }
    }
    if (skipped * 5 > total) return 1.0;  // too many kinks: probe elsewhere
    const double denom = std::max({std::sqrt(num_sq), std::sqrt(ana_sq), floor_val});
    return std::sqrt(diff_sq) / denom;
}

}  // namespace dvc::testing
