#if defined(__aarch64__)

#include "dvc/kernels.hpp"

#include <arm_neon.h>
#include <cmath>

// NEON backend (aarch64). Mirrors the scalar loop nests with 4-wide lanes.

namespace dvc::kern {
namespace {

inline float hsum4(float32x4_t v) { return vaddvq_f32(v); }

void n_gemm(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
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
            const float32x4_t va = vdupq_n_f32(a);
            int j = 0;
            for (; j + 4 <= N; j += 4) {
                float32x4_t c = vld1q_f32(crow + j);
                c = vfmaq_f32(c, va, vld1q_f32(brow + j));
                vst1q_f32(crow + j, c);
            }
            for (; j < N; ++j) crow[j] += a * brow[j];
        }
    }
}

void n_gemm_nt(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        const float* arow = A + static_cast<int64_t>(i) * K;
        float* crow = C + static_cast<int64_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const float* brow = B + static_cast<int64_t>(j) * K;
            float32x4_t vs = vdupq_n_f32(0.0f);
            int k = 0;
            for (; k + 4 <= K; k += 4) vs = vfmaq_f32(vs, vld1q_f32(arow + k), vld1q_f32(brow + k));
            float s = hsum4(vs);
            for (; k < K; ++k) s += arow[k] * brow[k];
            crow[j] = acc ? crow[j] + s : s;
        }
    }
}

void n_gemm_tn(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
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
            const float32x4_t va = vdupq_n_f32(a);
            int j = 0;
            for (; j + 4 <= N; j += 4) {
                float32x4_t c = vld1q_f32(crow + j);
                c = vfmaq_f32(c, va, vld1q_f32(brow + j));
                vst1q_f32(crow + j, c);
            }
            for (; j < N; ++j) crow[j] += a * brow[j];
        }
    }
}

void n_add(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vaddq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}
void n_sub(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}
void n_mul(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}
void n_axpy(float alpha, const float* x, float* y, int64_t n) {
    const float32x4_t va = vdupq_n_f32(alpha);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}
void n_scale(float alpha, const float* x, float* y, int64_t n) {
    const float32x4_t va = vdupq_n_f32(alpha);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmulq_f32(va, vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}
void n_relu(const float* x, float* y, int64_t n) {
    const float32x4_t vz = vdupq_n_f32(0.0f);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmaxq_f32(vz, vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}
void n_relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
    for (int64_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0f ? dy[i] : 0.0f;
}
void n_div_sqrt(const float* x, const float* s, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] / std::sqrt(s[i]);
}
void n_mul_sqrt(const float* x, const float* s, float* y, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] = x[i] * std::sqrt(s[i]);
}
double n_sum(const float* x, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}
double n_sum_sq_diff(const float* a, const float* b, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

}  // namespace

const Ops neon_ops = {
    "neon",   n_gemm,  n_gemm_nt, n_gemm_tn,  n_add,      n_sub, n_mul,
    n_axpy,   n_scale, n_relu,    n_relu_bwd, n_div_sqrt, n_mul_sqrt, n_sum,
    n_sum_sq_diff,
};

}  // namespace dvc::kern

#endif  // __aarch64__
