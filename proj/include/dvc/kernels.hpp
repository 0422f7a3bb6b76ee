#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dvc::kern {

// Hot arithmetic kernels behind function pointers. One table per backend;
// the active table is picked at startup from CPU features and can be forced
// with set_backend() or the DVC_KERNELS environment variable
// ("scalar", "avx2", "auto").
//
// All kernels accumulate along k in ascending order for every output element,
// so results are bitwise reproducible for a fixed backend regardless of the
// number of worker threads.
struct Ops {
    const char* name;

    // C[M x N] = A[M x K] * B[K x N], row-major. acc: C += instead of C =.
    void (*gemm)(int M, int K, int N, const float* A, const float* B, float* C, bool acc);
    // C[M x N] = A[M x K] * B^T where B is [N x K] row-major.
    void (*gemm_nt)(int M, int K, int N, const float* A, const float* B, float* C, bool acc);
    // C[M x N] = A^T * B where A is [K x M] and B is [K x N] row-major.
    void (*gemm_tn)(int M, int K, int N, const float* A, const float* B, float* C, bool acc);

    void (*add)(const float* a, const float* b, float* y, int64_t n);        // y = a + b
    void (*sub)(const float* a, const float* b, float* y, int64_t n);        // y = a - b
    void (*mul)(const float* a, const float* b, float* y, int64_t n);        // y = a * b
    void (*axpy)(float alpha, const float* x, float* y, int64_t n);          // y += alpha * x
    void (*scale)(float alpha, const float* x, float* y, int64_t n);         // y = alpha * x
    void (*relu)(const float* x, float* y, int64_t n);                       // y = max(x, 0)
    void (*relu_bwd)(const float* x, const float* dy, float* dx, int64_t n); // dx += dy * [x > 0]
    void (*div_sqrt)(const float* x, const float* s, float* y, int64_t n);   // y = x / sqrt(s)
    void (*mul_sqrt)(const float* x, const float* s, float* y, int64_t n);   // y = x * sqrt(s)

    double (*sum)(const float* x, int64_t n);
    double (*sum_sq_diff)(const float* a, const float* b, int64_t n);
};

const Ops& ops();

// Force a backend by name; "auto" re-detects. Throws on unknown names.
void set_backend(const std::string& name);
std::vector<std::string> available_backends();

extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
bool cpu_has_avx2();
#endif
#if defined(__aarch64__)
extern const Ops neon_ops;
#endif

}  // namespace dvc::kern
