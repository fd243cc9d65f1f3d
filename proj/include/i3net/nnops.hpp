#pragma once

// Primitive differentiable tensor ops with exact shape semantics and analytic
// gradients: pixel shuffle/unshuffle, orthonormal 2D DCT, window partition,
// layer normalization, GELU/ReLU, convolution, linear layers, axial linear
// interpolation. Every backward here is covered by finite-difference checks
// in tests/test_nnops.cpp.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <type_traits>
#include <vector>

#include "i3net/kernels.hpp"
#include "i3net/tensor.hpp"
#include "i3net/threadpool.hpp"

namespace i3net::nn {

// ---------------------------------------------------------------- elementwise

template <typename T>
void relu_fwd(const Tensor<T>& x, Tensor<T>& y) {
    y = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
    if constexpr (std::is_same_v<T, float>) {
        kernels::srelu(x.size(), x.data(), y.data());
    } else {
        for (size_t i = 0; i < x.size(); ++i) y.v[i] = x.v[i] > T(0) ? x.v[i] : T(0);
    }
}

template <typename T>
void relu_bwd(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
    dx = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
    if constexpr (std::is_same_v<T, float>) {
        kernels::srelu_grad(x.size(), x.data(), dy.data(), dx.data());
    } else {
        for (size_t i = 0; i < x.size(); ++i) dx.v[i] = x.v[i] > T(0) ? dy.v[i] : T(0);
    }
}

// Exact Gaussian-CDF GELU: x * Phi(x).
template <typename T>
T gelu_scalar(T x) {
    return x * T(0.5) * (T(1) + std::erf(x * T(0.70710678118654752440)));
}

template <typename T>
T gelu_grad_scalar(T x) {
    T phi_cdf = T(0.5) * (T(1) + std::erf(x * T(0.70710678118654752440)));
    T pdf = std::exp(-x * x * T(0.5)) * T(0.39894228040143267794);
    return phi_cdf + x * pdf;
}

template <typename T>
void gelu_fwd(const Tensor<T>& x, Tensor<T>& y) {
    y = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
    for (size_t i = 0; i < x.size(); ++i) y.v[i] = gelu_scalar(x.v[i]);
}

template <typename T>
void gelu_bwd(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
    dx = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
    for (size_t i = 0; i < x.size(); ++i) dx.v[i] = dy.v[i] * gelu_grad_scalar(x.v[i]);
}

template <typename T>
void add_into(Tensor<T>& acc, const Tensor<T>& x) {
    if (!acc.same_shape(x)) throw ValidationError("add_into: shape mismatch");
    if constexpr (std::is_same_v<T, float>) {
        kernels::saxpy(acc.size(), 1.0f, x.data(), acc.data());
    } else {
        for (size_t i = 0; i < acc.size(); ++i) acc.v[i] += x.v[i];
    }
}

// ------------------------------------------------------------- pixel shuffle

// out[n, 4c + 2i + j, h, w] = in[n, c, 2h+i, 2w+j], i,j in {0,1}.
template <typename T>
Tensor<T> pixel_unshuffle2(const Tensor<T>& x) {
    if (x.h() % 2 != 0 || x.w() % 2 != 0)
        throw ValidationError("pixel_unshuffle2: H and W must be even, got " + x.shape_str());
    Tensor<T> out(x.n(), x.c() * 4, x.h() / 2, x.w() / 2);
    const int ho = out.h(), wo = out.w();
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int h = 0; h < ho; ++h) {
                        const T* src = &x.at(n, c, 2 * h + i, j);
                        T* dst = &out.at(n, 4 * c + 2 * i + j, h, 0);
                        for (int w = 0; w < wo; ++w) dst[w] = src[2 * w];
                    }
    debug_check_finite(out, "pixel_unshuffle2");
    return out;
}

// Exact inverse of pixel_unshuffle2 under the same channel convention.
template <typename T>
Tensor<T> pixel_shuffle2(const Tensor<T>& x) {
    if (x.c() % 4 != 0)
        throw ValidationError("pixel_shuffle2: C must be divisible by 4, got " + x.shape_str());
    Tensor<T> out(x.n(), x.c() / 4, x.h() * 2, x.w() * 2);
    const int hi = x.h(), wi = x.w();
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < out.c(); ++c)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int h = 0; h < hi; ++h) {
                        const T* src = &x.at(n, 4 * c + 2 * i + j, h, 0);
                        T* dst = &out.at(n, c, 2 * h + i, j);
                        for (int w = 0; w < wi; ++w) dst[2 * w] = src[w];
                    }
    debug_check_finite(out, "pixel_shuffle2");
    return out;
}

// ------------------------------------------------------------------- windows

// [N, n_windows, C, p^2] sequence of p x p frequency windows. Window order is
// row-major over the (H/p) x (W/p) grid; within a window, positions flatten
// row-major.
template <typename T>
struct WindowSeq {
    Tensor<T> data; // stored as [N * n_windows, C, p^2, 1]
    int n = 0, n_windows = 0, p = 0, src_h = 0, src_w = 0;
};

template <typename T>
WindowSeq<T> window_partition(const Tensor<T>& x, int p) {
    if (p <= 0 || x.h() % p != 0 || x.w() % p != 0)
        throw ValidationError("window_partition: p=" + std::to_string(p) + " must divide H and W of " +
                              x.shape_str());
    const int gh = x.h() / p, gw = x.w() / p, nw = gh * gw;
    WindowSeq<T> out;
    out.n = x.n();
    out.n_windows = nw;
    out.p = p;
    out.src_h = x.h();
    out.src_w = x.w();
    out.data = Tensor<T>(x.n() * nw, x.c(), p * p, 1);
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int wy = 0; wy < gh; ++wy)
                for (int wx = 0; wx < gw; ++wx) {
                    const int wi = wy * gw + wx;
                    T* dst = &out.data.at(n * nw + wi, c, 0, 0);
                    for (int r = 0; r < p; ++r) {
                        const T* src = &x.at(n, c, wy * p + r, wx * p);
                        for (int s = 0; s < p; ++s) dst[r * p + s] = src[s];
                    }
                }
    return out;
}

template <typename T>
Tensor<T> window_reverse(const WindowSeq<T>& w) {
    const int p = w.p;
    if (p <= 0 || w.src_h % p != 0 || w.src_w % p != 0 ||
        w.n_windows != (w.src_h / p) * (w.src_w / p) ||
        w.data.n() != w.n * w.n_windows || w.data.h() != p * p)
        throw ValidationError("window_reverse: inconsistent window metadata");
    const int gh = w.src_h / p, gw = w.src_w / p, nw = w.n_windows;
    Tensor<T> out(w.n, w.data.c(), w.src_h, w.src_w);
    for (int n = 0; n < w.n; ++n)
        for (int c = 0; c < out.c(); ++c)
            for (int wy = 0; wy < gh; ++wy)
                for (int wx = 0; wx < gw; ++wx) {
                    const int wi = wy * gw + wx;
                    const T* src = &w.data.at(n * nw + wi, c, 0, 0);
                    for (int r = 0; r < p; ++r) {
                        T* dst = &out.at(n, c, wy * p + r, wx * p);
                        for (int s = 0; s < p; ++s) dst[s] = src[r * p + s];
                    }
                }
    return out;
}

// ----------------------------------------------------------------------- DCT

// Orthonormal DCT-II matrix, D[u][n] = a(u) cos(pi (2n+1) u / 2N),
// a(0) = sqrt(1/N), a(u>0) = sqrt(2/N). Rows are orthonormal.
template <typename T>
const std::vector<T>& dct_matrix(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::vector<T>>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto& slot = cache[n];
    if (!slot) {
        auto m = std::make_unique<std::vector<T>>(static_cast<size_t>(n) * n);
        const double pi = 3.14159265358979323846;
        for (int u = 0; u < n; ++u) {
            double a = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            for (int k = 0; k < n; ++k)
                (*m)[static_cast<size_t>(u) * n + k] =
                    static_cast<T>(a * std::cos(pi * (2.0 * k + 1.0) * u / (2.0 * n)));
        }
        slot = std::move(m);
    }
    return *slot;
}

namespace detail {

// Per-plane Y = D_H * X * op or its inverse; planes run in parallel, the
// inner GEMMs single-threaded.
template <typename T>
Tensor<T> dct2_apply(const Tensor<T>& x, bool inverse) {
    const int H = x.h(), W = x.w();
    const std::vector<T>& dh = dct_matrix<T>(H);
    const std::vector<T>& dw = dct_matrix<T>(W);
    Tensor<T> out(x.n(), x.c(), H, W);
    const std::int64_t planes = std::int64_t(x.n()) * x.c();
    const size_t plane_sz = static_cast<size_t>(H) * W;
    ThreadPool::instance().parallel_for(0, planes, [&](std::int64_t pl) {
        std::vector<T> tmp(plane_sz);
        const T* xp = x.data() + pl * plane_sz;
        T* yp = out.data() + pl * plane_sz;
        if (!inverse) {
            // tmp = X * Dw^T ; Y = Dh * tmp
            kernels::gemm<T>(false, true, H, W, W, T(1), xp, W, dw.data(), W, T(0), tmp.data(), W, false);
            kernels::gemm<T>(false, false, H, W, H, T(1), dh.data(), H, tmp.data(), W, T(0), yp, W, false);
        } else {
            // tmp = X * Dw ; Y = Dh^T * tmp
            kernels::gemm<T>(false, false, H, W, W, T(1), xp, W, dw.data(), W, T(0), tmp.data(), W, false);
            kernels::gemm<T>(true, false, H, W, H, T(1), dh.data(), H, tmp.data(), W, T(0), yp, W, false);
        }
    });
    return out;
}

} // namespace detail

// Orthonormal type-II 2D DCT per (n, c) plane; Parseval holds, idct2 inverts.
template <typename T>
Tensor<T> dct2(const Tensor<T>& x) {
    Tensor<T> y = detail::dct2_apply(x, false);
    debug_check_finite(y, "dct2");
    return y;
}

template <typename T>
Tensor<T> idct2(const Tensor<T>& x) {
    Tensor<T> y = detail::dct2_apply(x, true);
    debug_check_finite(y, "idct2");
    return y;
}

// Gradients of the orthonormal transforms are their inverses.
template <typename T>
Tensor<T> dct2_bwd(const Tensor<T>& dy) {
    return detail::dct2_apply(dy, true);
}
template <typename T>
Tensor<T> idct2_bwd(const Tensor<T>& dy) {
    return detail::dct2_apply(dy, false);
}

// ----------------------------------------------------------------- layernorm

// LayerNorm over the channel axis of a [B, C, P] view (P = H*W for feature
// maps, p^2 for window sequences): zero mean / unit variance over C at every
// (b, p) location, then optional affine over C. eps defaults to 1e-5.
template <typename T>
struct LnChannelCache {
    Tensor<T> xhat;           // [B, C, P, 1]
    std::vector<T> inv_std;   // B*P
};

template <typename T>
void layer_norm_channel_fwd(const Tensor<T>& x, const T* gamma, const T* beta, T eps, Tensor<T>& y,
                            LnChannelCache<T>* cache) {
    const int B = x.n(), C = x.c();
    const std::int64_t P = std::int64_t(x.h()) * x.w();
    y = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
    if (cache) {
        cache->xhat = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
        cache->inv_std.assign(static_cast<size_t>(B) * P, T(0));
    }
    ThreadPool::instance().parallel_for(0, B, [&](std::int64_t b) {
        std::vector<T> mean(P, T(0)), var(P, T(0));
        const T* xb = x.data() + b * C * P;
        for (int c = 0; c < C; ++c) {
            const T* row = xb + std::int64_t(c) * P;
            for (std::int64_t t = 0; t < P; ++t) mean[t] += row[t];
        }
        const T invc = T(1) / T(C);
        for (std::int64_t t = 0; t < P; ++t) mean[t] *= invc;
        for (int c = 0; c < C; ++c) {
            const T* row = xb + std::int64_t(c) * P;
            for (std::int64_t t = 0; t < P; ++t) {
                T d = row[t] - mean[t];
                var[t] += d * d;
            }
        }
        T* yb = y.data() + b * C * P;
        T* xh = cache ? cache->xhat.data() + b * C * P : nullptr;
        T* istd = cache ? cache->inv_std.data() + b * P : nullptr;
        std::vector<T> inv(P);
        for (std::int64_t t = 0; t < P; ++t) {
            inv[t] = T(1) / std::sqrt(var[t] * invc + eps);
            if (istd) istd[t] = inv[t];
        }
        for (int c = 0; c < C; ++c) {
            const T* row = xb + std::int64_t(c) * P;
            T* yrow = yb + std::int64_t(c) * P;
            T g = gamma ? gamma[c] : T(1);
            T bt = beta ? beta[c] : T(0);
            T* xhrow = xh ? xh + std::int64_t(c) * P : nullptr;
            for (std::int64_t t = 0; t < P; ++t) {
                T v = (row[t] - mean[t]) * inv[t];
                if (xhrow) xhrow[t] = v;
                yrow[t] = g * v + bt;
            }
        }
    });
    debug_check_finite(y, "layer_norm");
}

// dgamma/dbeta accumulate; dx is written.
template <typename T>
void layer_norm_channel_bwd(const LnChannelCache<T>& cache, const T* gamma, const Tensor<T>& dy,
                            Tensor<T>& dx, T* dgamma, T* dbeta) {
    const Tensor<T>& xhat = cache.xhat;
    const int B = xhat.n(), C = xhat.c();
    const std::int64_t P = std::int64_t(xhat.h()) * xhat.w();
    dx = Tensor<T>(xhat.dim[0], xhat.dim[1], xhat.dim[2], xhat.dim[3]);
    if (dgamma || dbeta) {
        for (int c = 0; c < C; ++c) {
            T sg = T(0), sb = T(0);
            for (int b = 0; b < B; ++b) {
                const T* dyr = dy.data() + (std::int64_t(b) * C + c) * P;
                const T* xhr = xhat.data() + (std::int64_t(b) * C + c) * P;
                for (std::int64_t t = 0; t < P; ++t) {
                    sg += dyr[t] * xhr[t];
                    sb += dyr[t];
                }
            }
            if (dgamma) dgamma[c] += sg;
            if (dbeta) dbeta[c] += sb;
        }
    }
    ThreadPool::instance().parallel_for(0, B, [&](std::int64_t b) {
        std::vector<T> s1(P, T(0)), s2(P, T(0)); // mean(dyhat), mean(dyhat*xhat)
        const T* xb = xhat.data() + b * C * P;
        const T* dyb = dy.data() + b * C * P;
        for (int c = 0; c < C; ++c) {
            T g = gamma ? gamma[c] : T(1);
            const T* dyr = dyb + std::int64_t(c) * P;
            const T* xhr = xb + std::int64_t(c) * P;
            for (std::int64_t t = 0; t < P; ++t) {
                T dh = g * dyr[t];
                s1[t] += dh;
                s2[t] += dh * xhr[t];
            }
        }
        const T invc = T(1) / T(C);
        for (std::int64_t t = 0; t < P; ++t) {
            s1[t] *= invc;
            s2[t] *= invc;
        }
        const T* istd = cache.inv_std.data() + b * P;
        T* dxb = dx.data() + b * C * P;
        for (int c = 0; c < C; ++c) {
            T g = gamma ? gamma[c] : T(1);
            const T* dyr = dyb + std::int64_t(c) * P;
            const T* xhr = xb + std::int64_t(c) * P;
            T* dxr = dxb + std::int64_t(c) * P;
            for (std::int64_t t = 0; t < P; ++t)
                dxr[t] = (g * dyr[t] - s1[t] - xhr[t] * s2[t]) * istd[t];
        }
    });
}

// -------------------------------------------------------------------- linear

// out[rows, fout] = in[rows, fin] * W^T + b, with W stored [fout, fin].
template <typename T>
void linear_fwd(const T* in, int rows, int fin, const T* w, const T* b, int fout, T* out) {
    kernels::gemm<T>(false, true, rows, fout, fin, T(1), in, fin, w, fin, T(0), out, fout);
    if (b) {
        for (std::int64_t r = 0; r < rows; ++r) {
            T* orow = out + r * fout;
            for (int o = 0; o < fout; ++o) orow[o] += b[o];
        }
    }
}

template <typename T>
void linear_bwd(const T* in, const T* dout, int rows, int fin, int fout, const T* w, T* din,
                T* dw, T* db) {
    if (din) kernels::gemm<T>(false, false, rows, fin, fout, T(1), dout, fout, w, fin, T(0), din, fin);
    if (dw) kernels::gemm<T>(true, false, fout, fin, rows, T(1), dout, fout, in, fin, T(1), dw, fin);
    if (db) {
        for (std::int64_t r = 0; r < rows; ++r) {
            const T* drow = dout + r * fout;
            for (int o = 0; o < fout; ++o) db[o] += drow[o];
        }
    }
}

// [B, C, P] <-> [B, P, C]
template <typename T>
Tensor<T> transpose_cp(const Tensor<T>& x) {
    const int B = x.n(), C = x.c();
    const std::int64_t P = std::int64_t(x.h()) * x.w();
    Tensor<T> out(B, static_cast<int>(P), C, 1);
    ThreadPool::instance().parallel_for(0, B, [&](std::int64_t b) {
        const T* xb = x.data() + b * C * P;
        T* ob = out.data() + b * C * P;
        for (int c = 0; c < C; ++c)
            for (std::int64_t t = 0; t < P; ++t) ob[t * C + c] = xb[std::int64_t(c) * P + t];
    });
    return out;
}

// ----------------------------------------------------------------------- conv

// Zero-padded stride-1 convolution preserving H x W (pad = kernel/2; odd
// kernels only). Weights [Co, Ci, Kh, Kw], bias [Co].
template <typename T>
void im2col(const T* in, int ci, int h, int w, int kh, int kw, T* cols) {
    const int ph = kh / 2, pw = kw / 2;
    std::int64_t row = 0;
    for (int c = 0; c < ci; ++c) {
        const T* plane = in + std::int64_t(c) * h * w;
        for (int r = 0; r < kh; ++r)
            for (int s = 0; s < kw; ++s, ++row) {
                T* dst = cols + row * h * w;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + r - ph;
                    T* drow = dst + std::int64_t(y) * w;
                    if (sy < 0 || sy >= h) {
                        for (int x = 0; x < w; ++x) drow[x] = T(0);
                        continue;
                    }
                    const T* srow = plane + std::int64_t(sy) * w;
                    for (int x = 0; x < w; ++x) {
                        const int sx = x + s - pw;
                        drow[x] = (sx >= 0 && sx < w) ? srow[sx] : T(0);
                    }
                }
            }
    }
}

template <typename T>
void col2im_add(const T* cols, int ci, int h, int w, int kh, int kw, T* din) {
    const int ph = kh / 2, pw = kw / 2;
    std::int64_t row = 0;
    for (int c = 0; c < ci; ++c) {
        T* plane = din + std::int64_t(c) * h * w;
        for (int r = 0; r < kh; ++r)
            for (int s = 0; s < kw; ++s, ++row) {
                const T* src = cols + row * h * w;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + r - ph;
                    if (sy < 0 || sy >= h) continue;
                    const T* srow = src + std::int64_t(y) * w;
                    T* drow = plane + std::int64_t(sy) * w;
                    for (int x = 0; x < w; ++x) {
                        const int sx = x + s - pw;
                        if (sx >= 0 && sx < w) drow[sx] += srow[x];
                    }
                }
            }
    }
}

template <typename T>
std::vector<T>& conv_scratch() {
    static thread_local std::vector<T> buf;
    return buf;
}

template <typename T>
Tensor<T> conv2d_fwd(const Tensor<T>& x, const Tensor<T>& w, const T* bias) {
    const int ci = w.c(), co = w.n(), kh = w.h(), kw = w.w();
    if (x.c() != ci)
        throw ValidationError("conv2d: input channels " + std::to_string(x.c()) + " != weight " +
                              std::to_string(ci));
    const int h = x.h(), wd = x.w();
    const std::int64_t hw = std::int64_t(h) * wd;
    const int k = ci * kh * kw;
    Tensor<T> out(x.n(), co, h, wd);
    auto& cols = conv_scratch<T>();
    cols.resize(static_cast<size_t>(k) * hw);
    for (int n = 0; n < x.n(); ++n) {
        im2col(x.data() + std::int64_t(n) * ci * hw, ci, h, wd, kh, kw, cols.data());
        T* o = out.data() + std::int64_t(n) * co * hw;
        kernels::gemm<T>(false, false, co, static_cast<int>(hw), k, T(1), w.data(), k, cols.data(),
                         static_cast<int>(hw), T(0), o, static_cast<int>(hw));
        if (bias)
            for (int c = 0; c < co; ++c) {
                T b = bias[c];
                T* row = o + std::int64_t(c) * hw;
                for (std::int64_t i = 0; i < hw; ++i) row[i] += b;
            }
    }
    debug_check_finite(out, "conv2d");
    return out;
}

// din written; dw/db accumulated. Pass din = nullptr to skip input grads.
template <typename T>
void conv2d_bwd(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dout, Tensor<T>* din,
                Tensor<T>& dw, T* db) {
    const int ci = w.c(), co = w.n(), kh = w.h(), kw = w.w();
    const int h = x.h(), wd = x.w();
    const std::int64_t hw = std::int64_t(h) * wd;
    const int k = ci * kh * kw;
    if (din) {
        *din = Tensor<T>(x.dim[0], x.dim[1], x.dim[2], x.dim[3]);
    }
    auto& cols = conv_scratch<T>();
    cols.resize(static_cast<size_t>(k) * hw);
    std::vector<T> dcols(static_cast<size_t>(k) * hw);
    for (int n = 0; n < x.n(); ++n) {
        const T* xs = x.data() + std::int64_t(n) * ci * hw;
        const T* dos = dout.data() + std::int64_t(n) * co * hw;
        im2col(xs, ci, h, wd, kh, kw, cols.data());
        // dW += dOut * cols^T
        kernels::gemm<T>(false, true, co, k, static_cast<int>(hw), T(1), dos, static_cast<int>(hw),
                         cols.data(), static_cast<int>(hw), T(1), dw.data(), k);
        if (db)
            for (int c = 0; c < co; ++c) {
                const T* row = dos + std::int64_t(c) * hw;
                T s = T(0);
                for (std::int64_t i = 0; i < hw; ++i) s += row[i];
                db[c] += s;
            }
        if (din) {
            // dcols = W^T * dOut, then scatter back
            kernels::gemm<T>(true, false, k, static_cast<int>(hw), co, T(1), w.data(), k, dos,
                             static_cast<int>(hw), T(0), dcols.data(), static_cast<int>(hw));
            col2im_add(dcols.data(), ci, h, wd, kh, kw, din->data() + std::int64_t(n) * ci * hw);
        }
    }
}

// --------------------------------------------------- axial linear interpolate

// [N, S, h, w] -> [N, (S-1)*R+1, h, w] along the slice/channel axis. Anchor
// outputs (t == 0) are bitwise copies of their source slice.
struct SliceInterpTable {
    std::vector<int> k;
    std::vector<double> t;
    int s_in = 0, s_out = 0;
};

inline SliceInterpTable slice_interp_table(int s_in, int r) {
    SliceInterpTable tab;
    tab.s_in = s_in;
    tab.s_out = (s_in - 1) * r + 1;
    tab.k.resize(tab.s_out);
    tab.t.resize(tab.s_out);
    for (int j = 0; j < tab.s_out; ++j) {
        int k = j / r;
        if (k > s_in - 2) k = s_in - 2;
        tab.k[j] = k;
        tab.t[j] = static_cast<double>(j - k * r) / r;
    }
    return tab;
}

template <typename T>
Tensor<T> lininterp_slices_fwd(const Tensor<T>& x, const SliceInterpTable& tab) {
    const std::int64_t hw = std::int64_t(x.h()) * x.w();
    Tensor<T> out(x.n(), tab.s_out, x.h(), x.w());
    for (int n = 0; n < x.n(); ++n)
        for (int j = 0; j < tab.s_out; ++j) {
            const int k = tab.k[j];
            const T t = static_cast<T>(tab.t[j]);
            const T* a = x.data() + (std::int64_t(n) * x.c() + k) * hw;
            T* o = out.data() + (std::int64_t(n) * tab.s_out + j) * hw;
            if (t == T(0)) {
                std::copy(a, a + hw, o);
            } else {
                const T* b = a + hw;
                const T u = T(1) - t;
                for (std::int64_t i = 0; i < hw; ++i) o[i] = u * a[i] + t * b[i];
            }
        }
    return out;
}

template <typename T>
Tensor<T> lininterp_slices_bwd(const Tensor<T>& dout, const SliceInterpTable& tab, int h, int w) {
    const std::int64_t hw = std::int64_t(h) * w;
    Tensor<T> dx(dout.n(), tab.s_in, h, w);
    for (int n = 0; n < dout.n(); ++n)
        for (int j = 0; j < tab.s_out; ++j) {
            const int k = tab.k[j];
            const T t = static_cast<T>(tab.t[j]);
            const T* g = dout.data() + (std::int64_t(n) * tab.s_out + j) * hw;
            T* a = dx.data() + (std::int64_t(n) * tab.s_in + k) * hw;
            if (t == T(0)) {
                for (std::int64_t i = 0; i < hw; ++i) a[i] += g[i];
            } else {
                T* b = a + hw;
                const T u = T(1) - t;
                for (std::int64_t i = 0; i < hw; ++i) {
                    a[i] += u * g[i];
                    b[i] += t * g[i];
                }
            }
        }
    return dx;
}

} // namespace i3net::nn
