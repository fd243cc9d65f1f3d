#include "i3net/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "i3net/errors.hpp"
#include "i3net/threadpool.hpp"
#include "kernels_internal.hpp"

namespace i3net::kernels {

namespace {

using detail::KernelTable;

struct Dispatch {
    KernelTable table;
    Backend backend;

    Dispatch() {
        backend = detail::avx2_available() ? Backend::avx2 : Backend::scalar;
        if (const char* env = std::getenv("I3NET_KERNELS")) {
            std::string want(env);
            if (want == "scalar") {
                backend = Backend::scalar;
            } else if (want == "avx2") {
                if (!detail::avx2_available())
                    throw ValidationError("I3NET_KERNELS=avx2 but the CPU lacks AVX2/FMA");
                backend = Backend::avx2;
            } else if (!want.empty()) {
                throw ValidationError("unknown I3NET_KERNELS value: " + want);
            }
        }
        table = backend == Backend::avx2 ? detail::avx2_table() : detail::scalar_table();
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

// op(X) materialized row-major for the NN core. Transposes are cheap relative
// to the GEMM they feed and keep both backends on one code path.
thread_local std::vector<float> ta_scratch;
thread_local std::vector<float> tb_scratch;

const float* maybe_transpose(bool trans, const float* x, int rows, int cols, int ldx,
                             std::vector<float>& scratch, int& ld_out) {
    if (!trans) {
        ld_out = ldx;
        return x;
    }
    // x is [cols x rows] with leading dim ldx; produce [rows x cols].
    scratch.resize(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            scratch[static_cast<size_t>(r) * cols + c] = x[static_cast<std::int64_t>(c) * ldx + r];
    ld_out = cols;
    return scratch.data();
}

} // namespace

Backend active_backend() { return dispatch().backend; }

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_supported(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && detail::avx2_available());
}

void set_backend(Backend b) {
    if (!backend_supported(b))
        throw ValidationError(std::string("kernel backend unavailable: ") + backend_name(b));
    dispatch().backend = b;
    dispatch().table = b == Backend::avx2 ? detail::avx2_table() : detail::scalar_table();
}

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a, int lda,
           const float* b, int ldb, float beta, float* c, int ldc, bool threaded) {
    if (m <= 0 || n <= 0) return;
    if (k <= 0) {
        for (int i = 0; i < m; ++i) {
            float* crow = c + static_cast<std::int64_t>(i) * ldc;
            for (int j = 0; j < n; ++j) crow[j] = beta == 0.0f ? 0.0f : beta * crow[j];
        }
        return;
    }
    int la = lda, lb = ldb;
    const float* pa = maybe_transpose(trans_a, a, m, k, lda, ta_scratch, la);
    const float* pb = maybe_transpose(trans_b, b, k, n, ldb, tb_scratch, lb);
    dispatch().table.sgemm_nn(m, n, k, alpha, pa, la, pb, lb, beta, c, ldc, threaded);
}

void dgemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a, int lda,
           const double* b, int ldb, double beta, double* c, int ldc, bool threaded) {
    auto at = [=](int i, int kk) { return trans_a ? a[static_cast<std::int64_t>(kk) * lda + i]
                                                  : a[static_cast<std::int64_t>(i) * lda + kk]; };
    auto bt = [=](int kk, int j) { return trans_b ? b[static_cast<std::int64_t>(j) * ldb + kk]
                                                  : b[static_cast<std::int64_t>(kk) * ldb + j]; };
    auto row = [=](std::int64_t i) {
        double* crow = c + i * ldc;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int kk = 0; kk < k; ++kk) s += at(static_cast<int>(i), kk) * bt(kk, j);
            crow[j] = alpha * s + (beta == 0.0 ? 0.0 : beta * crow[j]);
        }
    };
    if (threaded) {
        std::int64_t min_rows = 1 + 2'000'000 / (std::int64_t(n) * k + 1);
        ThreadPool::instance().parallel_for(0, m, row, min_rows);
    } else {
        for (int i = 0; i < m; ++i) row(i);
    }
}

void srelu(std::size_t n, const float* x, float* y) { dispatch().table.srelu(n, x, y); }
void srelu_grad(std::size_t n, const float* x, const float* dy, float* dx) {
    dispatch().table.srelu_grad(n, x, dy, dx);
}
void sadd(std::size_t n, const float* a, const float* b, float* out) {
    dispatch().table.sadd(n, a, b, out);
}
void saxpy(std::size_t n, float alpha, const float* x, float* y) {
    dispatch().table.saxpy(n, alpha, x, y);
}
void sscale(std::size_t n, float alpha, float* x) { dispatch().table.sscale(n, alpha, x); }
double sabs_err(std::size_t n, const float* a, const float* b) {
    return dispatch().table.sabs_err(n, a, b);
}
double ssq_err(std::size_t n, const float* a, const float* b) {
    return dispatch().table.ssq_err(n, a, b);
}
void sl1_grad(std::size_t n, const float* pred, const float* target, float scale, float* dx) {
    dispatch().table.sl1_grad(n, pred, target, scale, dx);
}
void sadam_step(std::size_t n, float* p, const float* g, float* m, float* v, float lr, float beta1,
                float beta2, float eps, float bc1, float bc2) {
    dispatch().table.sadam_step(n, p, g, m, v, lr, beta1, beta2, eps, bc1, bc2);
}

} // namespace i3net::kernels
