#include "dvc/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

// Reference kernels. Plain loops, k ascending; the SIMD backends must agree
// with these within floating-point reassociation tolerance (see kernel tests).

namespace dvc::kern {
namespace {

void s_gemm(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        float* crow = C + static_cast<int64_t>(i) * N;
        if (!acc) {
            for (int j = 0; j < N; ++j) crow[j] = 0.0f;
        }
        const float* arow = A + static_cast<int64_t>(i) * K;
        for (int k = 0; k < K; ++k) {
            const float a = arow[k];
            if (a == 0.0f) continue;
            const float* brow = B + static_cast<int64_t>(k) * N;
            for (int j = 0; j < N; ++j) crow[j] += a * brow[j];
        }
    }
}

void s_gemm_nt(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        const float* arow = A + static_cast<int64_t>(i) * K;
        float* crow = C + static_cast<int64_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const float* brow = B + static_cast<int64_t>(j) * K;
            float s = acc ? crow[j] : 0.0f;
            for (int k = 0; k < K; ++k) s += arow[k] * brow[k];
            crow[j] = s;
        }
    }
}

void s_gemm_tn(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
    // C[i][j] = sum_k A[k][i] * B[k][j]
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        float* crow = C + static_cast<int64_t>(i) * N;
        if (!acc) {
            for (int j = 0; j < N; ++j) crow[j] = 0.0f;
        }
        for (int k = 0; k < K; ++k) {
            const float a = A[static_cast<int64_t>(k) * M + i];
            if (a == 0.0f) continue;
            const float* brow = B + static_cast<int64_t>(k) * N;
            for (int j = 0; j < N; ++j) crow[j] += a * brow[j];
        }
    }
}

void s_add(const float* a, const float* b, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}
void s_sub(const float* a, const float* b, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}
void s_mul(const float* a, const float* b, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}
void s_axpy(float alpha, const float* x, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void s_scale(float alpha, const float* x, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}
void s_relu(const float* x, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}
void s_relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
    for (int64_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0f ? dy[i] : 0.0f;
}
void s_div_sqrt(const float* x, const float* s, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] / std::sqrt(s[i]);
}
void s_mul_sqrt(const float* x, const float* s, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] * std::sqrt(s[i]);
}
double s_sum(const float* x, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}
double s_sum_sq_diff(const float* a, const float* b, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

}  // namespace

const Ops scalar_ops = {
    "scalar", s_gemm,  s_gemm_nt, s_gemm_tn,  s_add,      s_sub, s_mul,
    s_axpy,   s_scale, s_relu,    s_relu_bwd, s_div_sqrt, s_mul_sqrt, s_sum,
    s_sum_sq_diff,
};

}  // namespace dvc::kern
