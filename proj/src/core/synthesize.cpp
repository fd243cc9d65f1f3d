#include "i3net/synthesize.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "i3net/errors.hpp"

namespace i3net::model {

namespace {

int lcm2(int a, int b) { return a / std::gcd(a, b) * b; }

// numpy-style "symmetric" padding (edge value repeated) on the right/bottom.
vol::Volume pad_symmetric(const vol::Volume& v, int th, int tw) {
    vol::Volume out(v.s, th, tw);
    out.ds = v.ds;
    out.dh = v.dh;
    out.dw = v.dw;
    out.domain = v.domain;
    auto fold = [](int i, int n) {
        // index into [0, n) reflecting symmetrically: n, n+1 -> n-1, n-2 ...
        while (i >= n) i = 2 * n - 1 - i;
        while (i < 0) i = -1 - i;
        return i;
    };
    for (int s = 0; s < v.s; ++s)
        for (int y = 0; y < th; ++y) {
            const int sy = fold(y, v.h);
            for (int x = 0; x < tw; ++x) out.at(s, y, x) = v.at(s, sy, fold(x, v.w));
        }
    return out;
}

} // namespace

vol::Volume synthesize_volume(const vol::Volume& lr, I3Net<float>& net, SynthFlags* flags) {
    const ModelConfig& cfg = net.cfg;
    if (lr.domain != vol::IntensityDomain::normalized_unit)
        throw ValidationError("synthesize_volume: input must be normalized");
    SynthFlags local;
    SynthFlags& fl = flags ? *flags : local;

    // Edge-replicate missing slices when the volume is shorter than s_in.
    vol::Volume src = lr;
    const int s_orig = lr.s;
    if (src.s < cfg.s_in) {
        fl.padded_slices = true;
        fl.notes.push_back("input padded from " + std::to_string(s_orig) + " to " +
                           std::to_string(cfg.s_in) + " slices by edge replication");
        vol::Volume padded(cfg.s_in, src.h, src.w);
        padded.ds = src.ds;
        padded.dh = src.dh;
        padded.dw = src.dw;
        padded.domain = src.domain;
        const size_t plane = static_cast<size_t>(src.h) * src.w;
        for (int s = 0; s < cfg.s_in; ++s)
            std::copy_n(src.data.begin() + std::min(s, src.s - 1) * plane, plane,
                        padded.data.begin() + s * plane);
        src = std::move(padded);
    }

    const int unit = lcm2(2, cfg.window);
    const int th = (src.h + unit - 1) / unit * unit;
    const int tw = (src.w + unit - 1) / unit * unit;
    const int oh = src.h, ow = src.w;
    if (th != src.h || tw != src.w) {
        fl.padded_inplane = true;
        fl.notes.push_back("in-plane dims padded to " + std::to_string(th) + "x" + std::to_string(tw));
        src = pad_symmetric(src, th, tw);
    }

    const bool was_training = net.training;
    net.training = false;

    const int r = cfg.scale;
    const int s_out_total = (src.s - 1) * r + 1;
    Tensor<float> accum(1, s_out_total, th, tw);
    std::vector<int> counts(s_out_total, 0);

    // Window starts with stride s_in-1, final window clamped to end at S-1.
    std::vector<int> starts;
    for (int s0 = 0;; s0 += cfg.s_in - 1) {
        if (s0 + cfg.s_in >= src.s) {
            starts.push_back(src.s - cfg.s_in);
            break;
        }
        starts.push_back(s0);
    }

    const size_t plane = static_cast<size_t>(th) * tw;
    for (int s0 : starts) {
        Tensor<float> in(1, cfg.s_in, th, tw);
        for (int k = 0; k < cfg.s_in; ++k)
            std::copy_n(src.data.begin() + static_cast<size_t>(s0 + k) * plane, plane,
                        in.v.begin() + static_cast<size_t>(k) * plane);
        Tensor<float> out = net.forward(in);
        for (int j = 0; j < out.c(); ++j) {
            const int oj = s0 * r + j;
            float* dst = accum.data() + static_cast<size_t>(oj) * plane;
            const float* sp = out.data() + static_cast<size_t>(j) * plane;
            if (counts[oj] == 0)
                std::copy_n(sp, plane, dst);
            else
                for (size_t i = 0; i < plane; ++i) dst[i] += sp[i];
            ++counts[oj];
        }
    }
    net.training = was_training;

    for (int j = 0; j < s_out_total; ++j) {
        if (counts[j] > 1) {
            const float inv = 1.0f / counts[j];
            float* dst = accum.data() + static_cast<size_t>(j) * plane;
            for (size_t i = 0; i < plane; ++i) dst[i] *= inv;
        }
    }

    // Crop the synthetic slices back to the anchors the caller provided.
    const int s_keep = (s_orig - 1) * r + 1;
    vol::Volume out(s_keep, oh, ow);
    out.ds = lr.ds / r;
    out.dh = lr.dh;
    out.dw = lr.dw;
    out.domain = lr.domain;
    for (int j = 0; j < s_keep; ++j)
        for (int y = 0; y < oh; ++y)
            std::copy_n(accum.data() + (static_cast<size_t>(j) * th + y) * tw, ow, &out.at(j, y, 0));

    // Anchor passthrough: LR slices reappear bitwise at k*R.
    for (int k = 0; k < s_orig; ++k)
        for (int y = 0; y < oh; ++y)
            std::copy_n(&lr.at(k, y, 0), ow, &out.at(k * r, y, 0));

    // Clamp synthetic slices into the normalized domain.
    for (int j = 0; j < s_keep; ++j) {
        if (j % r == 0) continue;
        float* p = &out.at(j, 0, 0);
        const size_t n = static_cast<size_t>(oh) * ow;
        for (size_t i = 0; i < n; ++i) p[i] = std::min(1.0f, std::max(0.0f, p[i]));
    }
    return out;
}

} // namespace i3net::model
