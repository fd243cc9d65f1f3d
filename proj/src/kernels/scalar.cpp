#include "kernels_internal.hpp"

#include <cmath>

#include "i3net/threadpool.hpp"

// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against; keep them simple and obviously correct.

namespace i3net::kernels::detail {

namespace {

void sgemm_nn_scalar(int m, int n, int k, float alpha, const float* a, int lda, const float* b,
                     int ldb, float beta, float* c, int ldc, bool threaded) {
    auto row = [=](std::int64_t i) {
        float* crow = c + i * ldc;
        if (beta == 0.0f) {
            for (int j = 0; j < n; ++j) crow[j] = 0.0f;
        } else if (beta != 1.0f) {
            for (int j = 0; j < n; ++j) crow[j] *= beta;
        }
        const float* arow = a + i * lda;
        for (int kk = 0; kk < k; ++kk) {
            float av = alpha * arow[kk];
            if (av == 0.0f) continue;
            const float* brow = b + static_cast<std::int64_t>(kk) * ldb;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    };
    if (threaded) {
        std::int64_t min_rows = 1 + 4'000'000 / (std::int64_t(n) * k + 1);
        ThreadPool::instance().parallel_for(0, m, row, min_rows);
    } else {
        for (int i = 0; i < m; ++i) row(i);
    }
}

void srelu_scalar(std::size_t n, const float* x, float* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void srelu_grad_scalar(std::size_t n, const float* x, const float* dy, float* dx) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void sadd_scalar(std::size_t n, const float* a, const float* b, float* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void saxpy_scalar(std::size_t n, float alpha, const float* x, float* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void sscale_scalar(std::size_t n, float alpha, float* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sabs_err_scalar(std::size_t n, const float* a, const float* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(double(a[i]) - double(b[i]));
    return s;
}

double ssq_err_scalar(std::size_t n, const float* a, const float* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = double(a[i]) - double(b[i]);
        s += d * d;
    }
    return s;
}

void sl1_grad_scalar(std::size_t n, const float* pred, const float* target, float scale, float* dx) {
    for (std::size_t i = 0; i < n; ++i) {
        float d = pred[i] - target[i];
        dx[i] = d > 0.0f ? scale : (d < 0.0f ? -scale : 0.0f);
    }
}

void sadam_step_scalar(std::size_t n, float* p, const float* g, float* m, float* v, float lr,
                       float beta1, float beta2, float eps, float bc1, float bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
        float mhat = m[i] / bc1;
        float vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

KernelTable scalar_table() {
    KernelTable t;
    t.sgemm_nn = &sgemm_nn_scalar;
    t.srelu = &srelu_scalar;
    t.srelu_grad = &srelu_grad_scalar;
    t.sadd = &sadd_scalar;
    t.saxpy = &saxpy_scalar;
    t.sscale = &sscale_scalar;
    t.sabs_err = &sabs_err_scalar;
    t.ssq_err = &ssq_err_scalar;
    t.sl1_grad = &sl1_grad_scalar;
    t.sadam_step = &sadam_step_scalar;
    return t;
}

} // namespace i3net::kernels::detail
