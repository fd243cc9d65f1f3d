#pragma once

#include <cstddef>
#include <cstdint>

namespace i3net::kernels {

// Data-parallel inner loops behind a runtime-selected backend. Float entry
// points route through the active dispatch table; double always runs the
// scalar reference path (it only backs float64 gradient checks and probes).
//
// Backend selection: AVX2+FMA is picked at startup when the CPU supports it,
// scalar otherwise. I3NET_KERNELS=scalar|avx2 overrides. Equivalence between
// backends is covered by tests/test_kernels.cpp: permutation-free elementwise
// kernels must match bitwise, accumulating kernels to tight tolerances.

enum class Backend : int { scalar = 0, avx2 = 1 };

Backend active_backend();
const char* backend_name(Backend b);
bool backend_supported(Backend b);
void set_backend(Backend b); // throws ValidationError if unsupported

// Row-major GEMM: C = alpha * op(A)[m x k] * op(B)[k x n] + beta * C[m x n].
// `threaded` splits output rows across the pool; each row is accumulated
// sequentially by one thread, so results do not depend on the thread count.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a, int lda,
           const float* b, int ldb, float beta, float* c, int ldc, bool threaded = true);
void dgemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a, int lda,
           const double* b, int ldb, double beta, double* c, int ldc, bool threaded = true);

void srelu(std::size_t n, const float* x, float* y);
void srelu_grad(std::size_t n, const float* x, const float* dy, float* dx); // dx = dy * (x > 0)
void sadd(std::size_t n, const float* a, const float* b, float* out);
void saxpy(std::size_t n, float alpha, const float* x, float* y); // y += alpha * x
void sscale(std::size_t n, float alpha, float* x);

// Sum |a-b| and sum (a-b)^2 with float64 accumulation (metric precision).
double sabs_err(std::size_t n, const float* a, const float* b);
double ssq_err(std::size_t n, const float* a, const float* b);

// dx = scale * sign(pred - target); sign(0) = 0.
void sl1_grad(std::size_t n, const float* pred, const float* target, float scale, float* dx);

// Fused Adam step: m,v moments update + bias-corrected parameter update.
// bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
void sadam_step(std::size_t n, float* p, const float* g, float* m, float* v, float lr, float beta1,
                float beta2, float eps, float bc1, float bc2);

// Generic wrappers used by code templated on the scalar type.
template <typename T>
void gemm(bool ta, bool tb, int m, int n, int k, T alpha, const T* a, int lda, const T* b, int ldb,
          T beta, T* c, int ldc, bool threaded = true);
template <>
inline void gemm<float>(bool ta, bool tb, int m, int n, int k, float alpha, const float* a, int lda,
                        const float* b, int ldb, float beta, float* c, int ldc, bool threaded) {
    sgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc, threaded);
}
template <>
inline void gemm<double>(bool ta, bool tb, int m, int n, int k, double alpha, const double* a,
                         int lda, const double* b, int ldb, double beta, double* c, int ldc,
                         bool threaded) {
    dgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc, threaded);
}

} // namespace i3net::kernels
