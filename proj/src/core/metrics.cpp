#include "i3net/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "i3net/errors.hpp"
#include "i3net/kernels.hpp"

namespace i3net::eval {

PsnrResult psnr(const vol::Volume& pred, const vol::Volume& gt) {
    if (pred.s != gt.s || pred.h != gt.h || pred.w != gt.w)
        throw ValidationError("psnr: shape mismatch");
    if (pred.domain != vol::IntensityDomain::normalized_unit ||
        gt.domain != vol::IntensityDomain::normalized_unit)
        throw ValidationError("psnr: both volumes must be normalized");
    const double mse =
        kernels::ssq_err(pred.size(), pred.data.data(), gt.data.data()) / double(pred.size());
    PsnrResult r;
    if (mse == 0.0) {
        r.infinite = true;
        return r;
    }
    r.db = 10.0 * std::log10(1.0 / mse);
    return r;
}

const char* view_name(View v) {
    switch (v) {
        case View::axial: return "axial";
        case View::coronal: return "coronal";
        default: return "sagittal";
    }
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01; // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gaussian_window() {
    static const std::vector<double> g = [] {
        std::vector<double> v(kWin);
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            double d = i - (kWin - 1) / 2.0;
            v[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += v[i];
        }
        for (auto& x : v) x /= sum;
        return v;
    }();
    return g;
}

// Mean SSIM of one 2D slice pair; reflect-pads dims smaller than the window.
double ssim_slice(std::vector<double>& a, std::vector<double>& b, int h, int w, bool* padded) {
    auto reflect_pad = [](std::vector<double>& img, int& h_, int& w_, int th, int tw) {
        std::vector<double> out(static_cast<size_t>(th) * tw);
        auto fold = [](int i, int n) {
            // reflect without repeating the edge sample
            if (n == 1) return 0;
            const int period = 2 * n - 2;
            i = ((i % period) + period) % period;
            return i < n ? i : period - i;
        };
        for (int y = 0; y < th; ++y)
            for (int x = 0; x < tw; ++x)
                out[static_cast<size_t>(y) * tw + x] =
                    img[static_cast<size_t>(fold(y, h_)) * w_ + fold(x, w_)];
        img = std::move(out);
        h_ = th;
        w_ = tw;
    };
    if (h < kWin || w < kWin) {
        if (padded) *padded = true;
        int h2 = h, w2 = w;
        reflect_pad(a, h2, w2, std::max(h, kWin), std::max(w, kWin));
        h2 = h;
        w2 = w;
        reflect_pad(b, h2, w2, std::max(h, kWin), std::max(w, kWin));
        h = std::max(h, kWin);
        w = std::max(w, kWin);
    }
    const auto& g = gaussian_window();
    const int oh = h - kWin + 1, ow = w - kWin + 1;

    // Separable Gaussian filtering of the five moment images, valid region.
    auto filter = [&](const std::vector<double>& img) {
        std::vector<double> tmp(static_cast<size_t>(h) * ow);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < kWin; ++k) s += g[k] * img[static_cast<size_t>(y) * w + x + k];
                tmp[static_cast<size_t>(y) * ow + x] = s;
            }
        std::vector<double> out(static_cast<size_t>(oh) * ow);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < kWin; ++k) s += g[k] * tmp[static_cast<size_t>(y + k) * ow + x];
                out[static_cast<size_t>(y) * ow + x] = s;
            }
        return out;
    };

    const size_t n = static_cast<size_t>(h) * w;
    std::vector<double> aa(n), bb(n), ab(n);
    for (size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    std::vector<double> mu1 = filter(a), mu2 = filter(b);
    std::vector<double> s11 = filter(aa), s22 = filter(bb), s12 = filter(ab);
    double acc = 0.0;
    const size_t on = static_cast<size_t>(oh) * ow;
    for (size_t i = 0; i < on; ++i) {
        const double m1 = mu1[i], m2 = mu2[i];
        const double v1 = s11[i] - m1 * m1;
        const double v2 = s22[i] - m2 * m2;
        const double cov = s12[i] - m1 * m2;
        acc += ((2.0 * m1 * m2 + kC1) * (2.0 * cov + kC2)) /
               ((m1 * m1 + m2 * m2 + kC1) * (v1 + v2 + kC2));
    }
    return acc / static_cast<double>(on);
}

} // namespace

double ssim_view(const vol::Volume& pred, const vol::Volume& gt, View view, bool* padded) {
    if (pred.s != gt.s || pred.h != gt.h || pred.w != gt.w)
        throw ValidationError("ssim_view: shape mismatch");
    if (pred.domain != vol::IntensityDomain::normalized_unit ||
        gt.domain != vol::IntensityDomain::normalized_unit)
        throw ValidationError("ssim_view: both volumes must be normalized");
    int n_slices, sh, sw;
    switch (view) {
        case View::axial: n_slices = pred.s; sh = pred.h; sw = pred.w; break;
        case View::coronal: n_slices = pred.h; sh = pred.s; sw = pred.w; break;
        default: n_slices = pred.w; sh = pred.s; sw = pred.h; break;
    }
    double sum = 0.0;
    std::vector<double> a(static_cast<size_t>(sh) * sw), b(a.size());
    for (int i = 0; i < n_slices; ++i) {
        for (int y = 0; y < sh; ++y)
            for (int x = 0; x < sw; ++x) {
                float pa, pb;
                switch (view) {
                    case View::axial: pa = pred.at(i, y, x); pb = gt.at(i, y, x); break;
                    case View::coronal: pa = pred.at(y, i, x); pb = gt.at(y, i, x); break;
                    default: pa = pred.at(y, x, i); pb = gt.at(y, x, i); break;
                }
                a[static_cast<size_t>(y) * sw + x] = pa;
                b[static_cast<size_t>(y) * sw + x] = pb;
            }
        sum += ssim_slice(a, b, sh, sw, padded);
        a.resize(static_cast<size_t>(sh) * sw);
        b.resize(a.size());
    }
    return sum / n_slices;
}

InterpKind interp_kind_from_name(const std::string& s) {
    if (s == "nearest") return InterpKind::nearest;
    if (s == "linear") return InterpKind::linear;
    if (s == "cubic") return InterpKind::cubic;
    throw ValidationError("unknown interpolation kind: " + s);
}

const char* interp_kind_name(InterpKind k) {
    switch (k) {
        case InterpKind::nearest: return "nearest";
        case InterpKind::linear: return "linear";
        default: return "cubic";
    }
}

vol::Volume baseline_interp(const vol::Volume& lr, int r, InterpKind kind, bool* cubic_fallback) {
    if (r < 1) throw ValidationError("baseline_interp: scale must be >= 1");
    if (lr.s < 2) throw ValidationError("baseline_interp: need at least 2 slices");
    InterpKind k = kind;
    if (k == InterpKind::cubic && lr.s < 4) {
        k = InterpKind::linear;
        if (cubic_fallback) *cubic_fallback = true;
    }
    const int s_out = (lr.s - 1) * r + 1;
    vol::Volume out(s_out, lr.h, lr.w);
    out.ds = lr.ds / r;
    out.dh = lr.dh;
    out.dw = lr.dw;
    out.domain = lr.domain;
    const size_t plane = static_cast<size_t>(lr.h) * lr.w;
    for (int j = 0; j < s_out; ++j) {
        float* dst = out.data.data() + static_cast<size_t>(j) * plane;
        if (j % r == 0) { // anchors bitwise
            std::copy_n(lr.data.data() + static_cast<size_t>(j / r) * plane, plane, dst);
            continue;
        }
        const int kk = j / r;
        const double t = static_cast<double>(j - kk * r) / r;
        switch (k) {
            case InterpKind::nearest: {
                const int src = t < 0.5 ? kk : kk + 1; // ties round up
                std::copy_n(lr.data.data() + static_cast<size_t>(src) * plane, plane, dst);
                break;
            }
            case InterpKind::linear: {
                const float* a = lr.data.data() + static_cast<size_t>(kk) * plane;
                const float* b = a + plane;
                for (size_t i = 0; i < plane; ++i)
                    dst[i] = static_cast<float>((1.0 - t) * a[i] + t * b[i]);
                break;
            }
            default: {
                // Piecewise 4-point Lagrange on the nearest anchors (clamped
                // at the borders); reproduces cubic profiles exactly.
                int i0 = kk - 1;
                i0 = std::max(0, std::min(i0, lr.s - 4));
                const double x = kk + t; // in anchor units
                double wgt[4];
                for (int a = 0; a < 4; ++a) {
                    double num = 1.0, den = 1.0;
                    for (int b = 0; b < 4; ++b) {
                        if (a == b) continue;
                        num *= x - (i0 + b);
                        den *= static_cast<double>(a - b);
                    }
                    wgt[a] = num / den;
                }
                const float* rows[4];
                for (int a = 0; a < 4; ++a)
                    rows[a] = lr.data.data() + static_cast<size_t>(i0 + a) * plane;
                for (size_t i = 0; i < plane; ++i)
                    dst[i] = static_cast<float>(wgt[0] * rows[0][i] + wgt[1] * rows[1][i] +
                                                wgt[2] * rows[2][i] + wgt[3] * rows[3][i]);
                break;
            }
        }
    }
    return out;
}

} // namespace i3net::eval
