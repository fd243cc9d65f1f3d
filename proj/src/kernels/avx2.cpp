// AVX2+FMA variants. Compiled with -mavx2 -mfma; only reached when the CPU
// reports both (see kernels.cpp). Elementwise kernels use mul/add (no FMA
// contraction) so they match the scalar reference bitwise; GEMM uses FMA and
// is tolerance-tested instead.

#include "kernels_internal.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "i3net/threadpool.hpp"

namespace i3net::kernels::detail {

namespace {

template <int ROWS>
inline void kern_16(int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc,
                    float alpha, float beta) {
    __m256 acc0[ROWS], acc1[ROWS];
    for (int r = 0; r < ROWS; ++r) {
        acc0[r] = _mm256_setzero_ps();
        acc1[r] = _mm256_setzero_ps();
    }
    const float* bp = b;
    for (int kk = 0; kk < k; ++kk, bp += ldb) {
        __m256 b0 = _mm256_loadu_ps(bp);
        __m256 b1 = _mm256_loadu_ps(bp + 8);
        for (int r = 0; r < ROWS; ++r) {
            __m256 av = _mm256_set1_ps(a[r * static_cast<std::int64_t>(lda) + kk]);
            acc0[r] = _mm256_fmadd_ps(av, b0, acc0[r]);
            acc1[r] = _mm256_fmadd_ps(av, b1, acc1[r]);
        }
    }
    __m256 va = _mm256_set1_ps(alpha);
    for (int r = 0; r < ROWS; ++r) {
        float* crow = c + r * static_cast<std::int64_t>(ldc);
        __m256 r0 = _mm256_mul_ps(acc0[r], va);
        __m256 r1 = _mm256_mul_ps(acc1[r], va);
        if (beta != 0.0f) {
            __m256 vb = _mm256_set1_ps(beta);
            r0 = _mm256_add_ps(r0, _mm256_mul_ps(vb, _mm256_loadu_ps(crow)));
            r1 = _mm256_add_ps(r1, _mm256_mul_ps(vb, _mm256_loadu_ps(crow + 8)));
        }
        _mm256_storeu_ps(crow, r0);
        _mm256_storeu_ps(crow + 8, r1);
    }
}

template <int ROWS>
inline void kern_8(int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc,
                   float alpha, float beta) {
    __m256 acc[ROWS];
    for (int r = 0; r < ROWS; ++r) acc[r] = _mm256_setzero_ps();
    const float* bp = b;
    for (int kk = 0; kk < k; ++kk, bp += ldb) {
        __m256 b0 = _mm256_loadu_ps(bp);
        for (int r = 0; r < ROWS; ++r) {
            __m256 av = _mm256_set1_ps(a[r * static_cast<std::int64_t>(lda) + kk]);
            acc[r] = _mm256_fmadd_ps(av, b0, acc[r]);
        }
    }
    __m256 va = _mm256_set1_ps(alpha);
    for (int r = 0; r < ROWS; ++r) {
        float* crow = c + r * static_cast<std::int64_t>(ldc);
        __m256 r0 = _mm256_mul_ps(acc[r], va);
        if (beta != 0.0f)
            r0 = _mm256_add_ps(r0, _mm256_mul_ps(_mm256_set1_ps(beta), _mm256_loadu_ps(crow)));
        _mm256_storeu_ps(crow, r0);
    }
}

template <int ROWS>
inline void kern_tail(int k, int n_tail, const float* a, int lda, const float* b, int ldb, float* c,
                      int ldc, float alpha, float beta) {
    for (int r = 0; r < ROWS; ++r) {
        const float* arow = a + r * static_cast<std::int64_t>(lda);
        float* crow = c + r * static_cast<std::int64_t>(ldc);
        for (int j = 0; j < n_tail; ++j) {
            float s = 0.0f;
            for (int kk = 0; kk < k; ++kk) s += arow[kk] * b[static_cast<std::int64_t>(kk) * ldb + j];
            crow[j] = alpha * s + (beta == 0.0f ? 0.0f : beta * crow[j]);
        }
    }
}

template <int ROWS>
void row_block(int n, int k, float alpha, const float* a, int lda, const float* b, int ldb,
               float beta, float* c, int ldc) {
    int j = 0;
    for (; j + 16 <= n; j += 16) kern_16<ROWS>(k, a, lda, b + j, ldb, c + j, ldc, alpha, beta);
    for (; j + 8 <= n; j += 8) kern_8<ROWS>(k, a, lda, b + j, ldb, c + j, ldc, alpha, beta);
    if (j < n) kern_tail<ROWS>(k, n - j, a, lda, b + j, ldb, c + j, ldc, alpha, beta);
}

// K is processed in cache-sized chunks so the shared B panel stays hot across
// all row blocks instead of being re-streamed from DRAM per 6 rows.
constexpr int kKChunk = 320;

void sgemm_nn_avx2(int m, int n, int k, float alpha, const float* a, int lda, const float* b,
                   int ldb, float beta, float* c, int ldc, bool threaded) {
    constexpr int MR = 6;
    std::int64_t n_blocks = (m + MR - 1) / MR;
    for (int k0 = 0; k0 < k; k0 += kKChunk) {
        const int kc = k - k0 < kKChunk ? k - k0 : kKChunk;
        const float beta_eff = k0 == 0 ? beta : 1.0f;
        const float* ac = a + k0;
        const float* bc = b + static_cast<std::int64_t>(k0) * ldb;
        auto block = [=](std::int64_t bi) {
            int i = static_cast<int>(bi) * MR;
            int rows = m - i < MR ? m - i : MR;
            const float* ab = ac + static_cast<std::int64_t>(i) * lda;
            float* cb = c + static_cast<std::int64_t>(i) * ldc;
            switch (rows) {
                case 6: row_block<6>(n, kc, alpha, ab, lda, bc, ldb, beta_eff, cb, ldc); break;
                case 5: row_block<5>(n, kc, alpha, ab, lda, bc, ldb, beta_eff, cb, ldc); break;
                case 4: row_block<4>(n, kc, alpha, ab, lda, bc, ldb, beta_eff, cb, ldc); break;
                case 3: row_block<3>(n, kc, alpha, ab, lda, bc, ldb, beta_eff, cb, ldc); break;
                case 2: row_block<2>(n, kc, alpha, ab, lda, bc, ldb, beta_eff, cb, ldc); break;
                default: row_block<1>(n, kc, alpha, ab, lda, bc, ldb, beta_eff, cb, ldc); break;
            }
        };
        if (threaded) {
            std::int64_t min_blocks = 1 + 2'000'000 / (std::int64_t(MR) * n * kc + 1);
            ThreadPool::instance().parallel_for(0, n_blocks, block, min_blocks);
        } else {
            for (std::int64_t bi = 0; bi < n_blocks; ++bi) block(bi);
        }
    }
}

void srelu_avx2(std::size_t n, const float* x, float* y) {
    std::size_t i = 0;
    __m256 zero = _mm256_setzero_ps();
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void srelu_grad_avx2(std::size_t n, const float* x, const float* dy, float* dx) {
    std::size_t i = 0;
    __m256 zero = _mm256_setzero_ps();
    for (; i + 8 <= n; i += 8) {
        __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void sadd_avx2(std::size_t n, const float* a, const float* b, float* out) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void saxpy_avx2(std::size_t n, float alpha, const float* x, float* y) {
    std::size_t i = 0;
    __m256 va = _mm256_set1_ps(alpha);
    for (; i + 8 <= n; i += 8) {
        __m256 t = _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
        _mm256_storeu_ps(y + i, t);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void sscale_avx2(std::size_t n, float alpha, float* x) {
    std::size_t i = 0;
    __m256 va = _mm256_set1_ps(alpha);
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

double sabs_err_avx2(std::size_t n, const float* a, const float* b) {
    __m256d acc = _mm256_setzero_pd();
    __m256d signmask = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d da = _mm256_cvtps_pd(_mm_loadu_ps(a + i));
        __m256d db = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, _mm256_sub_pd(da, db)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += std::fabs(double(a[i]) - double(b[i]));
    return s;
}

double ssq_err_avx2(std::size_t n, const float* a, const float* b) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)),
                                  _mm256_cvtps_pd(_mm_loadu_ps(b + i)));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        double d = double(a[i]) - double(b[i]);
        s += d * d;
    }
    return s;
}

void sl1_grad_avx2(std::size_t n, const float* pred, const float* target, float scale, float* dx) {
    std::size_t i = 0;
    __m256 zero = _mm256_setzero_ps();
    __m256 vpos = _mm256_set1_ps(scale);
    __m256 vneg = _mm256_set1_ps(-scale);
    for (; i + 8 <= n; i += 8) {
        __m256 d = _mm256_sub_ps(_mm256_loadu_ps(pred + i), _mm256_loadu_ps(target + i));
        __m256 pos = _mm256_and_ps(_mm256_cmp_ps(d, zero, _CMP_GT_OQ), vpos);
        __m256 neg = _mm256_and_ps(_mm256_cmp_ps(d, zero, _CMP_LT_OQ), vneg);
        _mm256_storeu_ps(dx + i, _mm256_or_ps(pos, neg));
    }
    for (; i < n; ++i) {
        float d = pred[i] - target[i];
        dx[i] = d > 0.0f ? scale : (d < 0.0f ? -scale : 0.0f);
    }
}

void sadam_step_avx2(std::size_t n, float* p, const float* g, float* m, float* v, float lr,
                     float beta1, float beta2, float eps, float bc1, float bc2) {
    __m256 vb1 = _mm256_set1_ps(beta1), vb1c = _mm256_set1_ps(1.0f - beta1);
    __m256 vb2 = _mm256_set1_ps(beta2), vb2c = _mm256_set1_ps(1.0f - beta2);
    __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
    __m256 vbc1 = _mm256_set1_ps(bc1), vbc2 = _mm256_set1_ps(bc2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 gi = _mm256_loadu_ps(g + i);
        __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vb1c, gi));
        // ((1-b2)*g)*g matches the scalar reference's association.
        __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                                  _mm256_mul_ps(_mm256_mul_ps(vb2c, gi), gi));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        __m256 mhat = _mm256_div_ps(mi, vbc1);
        __m256 vhat = _mm256_div_ps(vi, vbc2);
        __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat),
                                   _mm256_add_ps(_mm256_sqrt_ps(vhat), veps));
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
        float mhat = m[i] / bc1;
        float vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

KernelTable avx2_table() {
    KernelTable t = scalar_table();
    t.sgemm_nn = &sgemm_nn_avx2;
    t.srelu = &srelu_avx2;
    t.srelu_grad = &srelu_grad_avx2;
    t.sadd = &sadd_avx2;
    t.saxpy = &saxpy_avx2;
    t.sscale = &sscale_avx2;
    t.sabs_err = &sabs_err_avx2;
    t.ssq_err = &ssq_err_avx2;
    t.sl1_grad = &sl1_grad_avx2;
    t.sadam_step = &sadam_step_avx2;
    return t;
}

} // namespace i3net::kernels::detail

#else

namespace i3net::kernels::detail {
bool avx2_available() { return false; }
KernelTable avx2_table() { return scalar_table(); }
} // namespace i3net::kernels::detail

#endif
