#include <doctest.h>

#include <cmath>

#include "dvc/kernels.hpp"
#include "dvc/tensor.hpp"

using namespace dvc;

namespace {

// plain triple loop, double accumulation: the reference all backends must hit
void naive_gemm(int M, int K, int N, const float* A, const float* B, float* C) {
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < N; ++j) {
            double s = 0.0;
            for (int k = 0; k < K; ++k)
                s += static_cast<double>(A[i * K + k]) * static_cast<double>(B[k * N + j]);
            C[i * N + j] = static_cast<float>(s);
        }
}

double max_rel_diff(const float* a, const float* b, int64_t n) {
    double worst = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = std::abs(static_cast<double>(a[i]) - b[i]);
        const double m = std::max({std::abs(static_cast<double>(a[i])), std::abs(static_cast<double>(b[i])), 1.0});
        worst = std::max(worst, d / m);
    }
    return worst;
}

}  // namespace

TEST_CASE("every available backend matches the naive gemm reference") {
    Rng rng(11);
    for (const auto& name : kern::available_backends()) {
        kern::set_backend(name);
        const auto& ops = kern::ops();
        for (auto [M, K, N] : {std::tuple{7, 13, 9}, {16, 64, 33}, {1, 1, 1}, {5, 128, 256}}) {
            Tensor A({M, K}), B({K, N}), C({M, N}), Cref({M, N});
            rng.fill_normal(A, 0.0f, 1.0f);
            rng.fill_normal(B, 0.0f, 1.0f);
            ops.gemm(M, K, N, A.data(), B.data(), C.data(), false);
            naive_gemm(M, K, N, A.data(), B.data(), Cref.data());
            CHECK(max_rel_diff(C.data(), Cref.data(), C.numel()) < 1e-5);

            // gemm_nt: B stored as [N x K]
            Tensor Bt({N, K});
            for (int k = 0; k < K; ++k)
                for (int j = 0; j < N; ++j) Bt(j, k) = B(k, j);
            Tensor C2({M, N});
            ops.gemm_nt(M, K, N, A.data(), Bt.data(), C2.data(), false);
            CHECK(max_rel_diff(C2.data(), Cref.data(), C2.numel()) < 1e-5);

            // gemm_tn: A stored as [K x M]
            Tensor At({K, M});
            for (int i = 0; i < M; ++i)
                for (int k = 0; k < K; ++k) At(k, i) = A(i, k);
            Tensor C3({M, N});
            ops.gemm_tn(M, K, N, At.data(), B.data(), C3.data(), false);
            CHECK(max_rel_diff(C3.data(), Cref.data(), C3.numel()) < 1e-5);

            // accumulate variant
            Tensor C4 = Cref.clone();
            ops.gemm(M, K, N, A.data(), B.data(), C4.data(), true);
            for (int64_t i = 0; i < C4.numel(); ++i)
                CHECK(C4.at(i) == doctest::Approx(2.0f * Cref.at(i)).epsilon(1e-4));
        }
    }
    kern::set_backend("auto");
}

TEST_CASE("elementwise kernels agree across backends") {
    Rng rng(12);
    const int64_t n = 1003;  // odd length exercises the scalar tails
    Tensor a({static_cast<int>(n)}), b({static_cast<int>(n)});
    rng.fill_normal(a, 0.0f, 2.0f);
    rng.fill_normal(b, 0.5f, 2.0f);
    Tensor s({static_cast<int>(n)});
    rng.fill_uniform(s, 0.1f, 4.0f);

    struct Result {
        Tensor add, sub, mul, axpy, scale, relu, relu_bwd, div_sqrt, mul_sqrt;
        double sum, ssd;
    };
    std::vector<Result> results;
    for (const auto& name : kern::available_backends()) {
        kern::set_backend(name);
        const auto& ops = kern::ops();
        Result r{Tensor({static_cast<int>(n)}), Tensor({static_cast<int>(n)}),
                 Tensor({static_cast<int>(n)}), b.clone(),
                 Tensor({static_cast<int>(n)}), Tensor({static_cast<int>(n)}),
                 Tensor::zeros({static_cast<int>(n)}), Tensor({static_cast<int>(n)}),
                 Tensor({static_cast<int>(n)}), 0.0, 0.0};
        ops.add(a.data(), b.data(), r.add.data(), n);
        ops.sub(a.data(), b.data(), r.sub.data(), n);
        ops.mul(a.data(), b.data(), r.mul.data(), n);
        ops.axpy(0.37f, a.data(), r.axpy.data(), n);
        ops.scale(-1.25f, a.data(), r.scale.data(), n);
        ops.relu(a.data(), r.relu.data(), n);
        ops.relu_bwd(a.data(), b.data(), r.relu_bwd.data(), n);
        ops.div_sqrt(a.data(), s.data(), r.div_sqrt.data(), n);
        ops.mul_sqrt(a.data(), s.data(), r.mul_sqrt.data(), n);
        r.sum = ops.sum(a.data(), n);
        r.ssd = ops.sum_sq_diff(a.data(), b.data(), n);
        results.push_back(std::move(r));
    }
    for (size_t i = 1; i < results.size(); ++i) {
        const auto& r0 = results[0];
        const auto& ri = results[i];
        CHECK(max_rel_diff(r0.add.data(), ri.add.data(), n) < 1e-6);
        CHECK(max_rel_diff(r0.sub.data(), ri.sub.data(), n) < 1e-6);
        CHECK(max_rel_diff(r0.mul.data(), ri.mul.data(), n) < 1e-6);
        CHECK(max_rel_diff(r0.axpy.data(), ri.axpy.data(), n) < 1e-5);
        CHECK(max_rel_diff(r0.scale.data(), ri.scale.data(), n) < 1e-6);
        CHECK(max_rel_diff(r0.relu.data(), ri.relu.data(), n) == 0.0);
        CHECK(max_rel_diff(r0.relu_bwd.data(), ri.relu_bwd.data(), n) == 0.0);
        CHECK(max_rel_diff(r0.div_sqrt.data(), ri.div_sqrt.data(), n) < 1e-5);
        CHECK(max_rel_diff(r0.mul_sqrt.data(), ri.mul_sqrt.data(), n) < 1e-5);
        CHECK(r0.sum == doctest::Approx(ri.sum).epsilon(1e-9));
        CHECK(r0.ssd == doctest::Approx(ri.ssd).epsilon(1e-9));
    }
    kern::set_backend("auto");
}

TEST_CASE("backend selection") {
    const auto names = kern::available_backends();
    CHECK(!names.empty());
    CHECK(names[0] == "scalar");
    CHECK_THROWS(kern::set_backend("no-such-backend"));
    kern::set_backend("auto");
}
