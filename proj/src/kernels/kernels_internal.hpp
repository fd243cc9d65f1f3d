#pragma once

#include <cstddef>

// Backend function tables. Scalar entries are always present; SIMD backends
// override the subset they implement.

namespace i3net::kernels::detail {

struct KernelTable {
    void (*sgemm_nn)(int m, int n, int k, float alpha, const float* a, int lda, const float* b,
                     int ldb, float beta, float* c, int ldc, bool threaded);
    void (*srelu)(std::size_t n, const float* x, float* y);
    void (*srelu_grad)(std::size_t n, const float* x, const float* dy, float* dx);
    void (*sadd)(std::size_t n, const float* a, const float* b, float* out);
    void (*saxpy)(std::size_t n, float alpha, const float* x, float* y);
    void (*sscale)(std::size_t n, float alpha, float* x);
    double (*sabs_err)(std::size_t n, const float* a, const float* b);
    double (*ssq_err)(std::size_t n, const float* a, const float* b);
    void (*sl1_grad)(std::size_t n, const float* pred, const float* target, float scale, float* dx);
    void (*sadam_step)(std::size_t n, float* p, const float* g, float* m, float* v, float lr,
                       float beta1, float beta2, float eps, float bc1, float bc2);
};

KernelTable scalar_table();

bool avx2_available();
KernelTable avx2_table(); // valid only when avx2_available()

} // namespace i3net::kernels::detail
