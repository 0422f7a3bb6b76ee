#if defined(__x86_64__) || defined(_M_X64)

#include "dvc/kernels.hpp"

#include <cmath>
#include <immintrin.h>

#ifdef _OPENMP
#include <omp.h>
#endif

// AVX2/FMA backend. Same loop nests as the scalar reference with the j loop
// vectorized 8-wide; k stays the serial accumulation axis.

namespace dvc::kern {
namespace {

inline float hsum8(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehl_ps(lo, lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_shuffle_ps(lo, lo, 0x1);
    return _mm_cvtss_f32(_mm_add_ps(lo, sh));
}

inline double hsum4d(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_pd(lo, sh));
}

void v_gemm(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        float* crow = C + static_cast<int64_t>(i) * N;
        if (!acc) {
            int64_t j = 0;
            for (; j + 8 <= N; j += 8) _mm256_storeu_ps(crow + j, _mm256_setzero_ps());
            for (; j < N; ++j) crow[j] = 0.0f;
        }
        const float* arow = A + static_cast<int64_t>(i) * K;
        for (int k = 0; k < K; ++k) {
            const float a = arow[k];
            if (a == 0.0f) continue;
            const float* brow = B + static_cast<int64_t>(k) * N;
            const __m256 va = _mm256_set1_ps(a);
            int j = 0;
            for (; j + 16 <= N; j += 16) {
                __m256 c0 = _mm256_loadu_ps(crow + j);
                __m256 c1 = _mm256_loadu_ps(crow + j + 8);
                c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), c0);
                c1 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j + 8), c1);
                _mm256_storeu_ps(crow + j, c0);
                _mm256_storeu_ps(crow + j + 8, c1);
            }
            for (; j + 8 <= N; j += 8) {
                __m256 c0 = _mm256_loadu_ps(crow + j);
                c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), c0);
                _mm256_storeu_ps(crow + j, c0);
            }
            for (; j < N; ++j) crow[j] += a * brow[j];
        }
    }
}

void v_gemm_nt(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        const float* arow = A + static_cast<int64_t>(i) * K;
        float* crow = C + static_cast<int64_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const float* brow = B + static_cast<int64_t>(j) * K;
            __m256 vs = _mm256_setzero_ps();
            int k = 0;
            for (; k + 8 <= K; k += 8)
                vs = _mm256_fmadd_ps(_mm256_loadu_ps(arow + k), _mm256_loadu_ps(brow + k), vs);
            float s = hsum8(vs);
            for (; k < K; ++k) s += arow[k] * brow[k];
            crow[j] = acc ? crow[j] + s : s;
        }
    }
}

void v_gemm_tn(int M, int K, int N, const float* A, const float* B, float* C, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        float* crow = C + static_cast<int64_t>(i) * N;
        if (!acc) {
            int64_t j = 0;
            for (; j + 8 <= N; j += 8) _mm256_storeu_ps(crow + j, _mm256_setzero_ps());
            for (; j < N; ++j) crow[j] = 0.0f;
        }
        for (int k = 0; k < K; ++k) {
            const float a = A[static_cast<int64_t>(k) * M + i];
            if (a == 0.0f) continue;
            const float* brow = B + static_cast<int64_t>(k) * N;
            const __m256 va = _mm256_set1_ps(a);
            int j = 0;
            for (; j + 8 <= N; j += 8) {
                __m256 c0 = _mm256_loadu_ps(crow + j);
                c0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(brow + j), c0);
                _mm256_storeu_ps(crow + j, c0);
            }
            for (; j < N; ++j) crow[j] += a * brow[j];
        }
    }
}

void v_add(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}
void v_sub(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}
void v_mul(const float* a, const float* b, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}
void v_axpy(float alpha, const float* x, float* y, int64_t n) {
    const __m256 va = _mm256_set1_ps(alpha);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}
void v_scale(float alpha, const float* x, float* y, int64_t n) {
    const __m256 va = _mm256_set1_ps(alpha);
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}
void v_relu(const float* x, float* y, int64_t n) {
    const __m256 vz = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(vz, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}
void v_relu_bwd(const float* x, const float* dy, float* dx, int64_t n) {
    const __m256 vz = _mm256_setzero_ps();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), vz, _CMP_GT_OQ);
        const __m256 g = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
        _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), g));
    }
    for (; i < n; ++i) dx[i] += x[i] > 0.0f ? dy[i] : 0.0f;
}
void v_div_sqrt(const float* x, const float* s, float* y, int64_t n) {
    // full-precision sqrt+div (rsqrt approximation would break the
    // scalar/simd equivalence bound)
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_div_ps(_mm256_loadu_ps(x + i), _mm256_sqrt_ps(_mm256_loadu_ps(s + i))));
    for (; i < n; ++i) y[i] = x[i] / std::sqrt(s[i]);
}
void v_mul_sqrt(const float* x, const float* s, float* y, int64_t n) {
    int64_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_sqrt_ps(_mm256_loadu_ps(s + i))));
    for (; i < n; ++i) y[i] = x[i] * std::sqrt(s[i]);
}
double v_sum(const float* x, int64_t n) {
    __m256d acc = _mm256_setzero_pd();
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(x + i)));
    double s = hsum4d(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}
double v_sum_sq_diff(const float* a, const float* b, int64_t n) {
    __m256d acc = _mm256_setzero_pd();
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)), _mm256_cvtps_pd(_mm_loadu_ps(b + i)));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum4d(acc);
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return s;
}

}  // namespace

const Ops avx2_ops = {
    "avx2",   v_gemm,  v_gemm_nt, v_gemm_tn,  v_add,      v_sub, v_mul,
    v_axpy,   v_scale, v_relu,    v_relu_bwd, v_div_sqrt, v_mul_sqrt, v_sum,
    v_sum_sq_diff,
};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

}  // namespace dvc::kern

#endif  // x86_64
