#pragma once

// The I3Net architecture: a head convolution lifting the input slices to C
// feature channels, a stack of I2Blocks (inter-slice shuffle branch + intra-
// slice frequency-domain mixer branch) with cross-view blocks interleaved,
// and a tail convolution emitting (S_in-1)*R+1 slices, plus a global residual
// from linear axial interpolation of the input (zero-initialized tail makes
// the network exactly the linear interpolator at init).

#include <memory>
#include <string>
#include <vector>

#include "i3net/nnops.hpp"
#include "i3net/rng.hpp"
#include "i3net/tensor.hpp"

namespace i3net::model {

enum class Variant { full, inter_only, plain_conv };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& s);

struct ModelConfig {
    int channels = 64;
    int n_blocks = 16;
    std::vector<int> cvb_positions = {4, 8, 12}; // CVB inserted after these blocks (1-based)
    int window = 16;
    int s_in = 4;
    int scale = 2;
    Variant variant = Variant::full;
    bool global_residual = true;
    int token_expansion = 1;
    int channel_expansion = 1;

    int s_out() const { return (s_in - 1) * scale + 1; }
    void validate() const;
};

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

// ------------------------------------------------------------------ layers

template <typename T>
struct Conv2d {
    Tensor<T> w, gw; // [co, ci, kh, kw]
    Tensor<T> b, gb; // [co, 1, 1, 1]
    Tensor<T> x_cache;

    Conv2d() = default;
    Conv2d(int co, int ci, int kh, int kw)
        : w(co, ci, kh, kw), gw(co, ci, kh, kw), b(co, 1, 1, 1), gb(co, 1, 1, 1) {}

    // Kaiming-uniform fan-in at the framework-default slope (bound
    // 1/sqrt(fan_in)); keeps feature variance bounded through the parallel
    // residual blocks.
    void kaiming_init(Rng rng) {
        const double bound = 1.0 / std::sqrt(double(w.c()) * w.h() * w.w());
        for (auto& x : w.v) x = static_cast<T>(rng.uniform(-bound, bound));
        b.fill(T(0));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) {
        if (training) x_cache = x;
        return nn::conv2d_fwd(x, w, b.data());
    }
    Tensor<T> backward(const Tensor<T>& dy, bool need_dx = true) {
        Tensor<T> dx;
        nn::conv2d_bwd(x_cache, w, dy, need_dx ? &dx : nullptr, gw, gb.data());
        return dx;
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        out.push_back({prefix + ".w", &w, &gw});
        out.push_back({prefix + ".b", &b, &gb});
    }
};

template <typename T>
struct Linear {
    Tensor<T> w, gw; // [fout, fin, 1, 1]
    Tensor<T> b, gb; // [fout, 1, 1, 1]
    Tensor<T> x_cache; // [rows, fin, 1, 1]

    Linear() = default;
    Linear(int fout, int fin) : w(fout, fin, 1, 1), gw(fout, fin, 1, 1), b(fout, 1, 1, 1), gb(fout, 1, 1, 1) {}

    int fin() const { return w.c(); }
    int fout() const { return w.n(); }

    void kaiming_init(Rng rng) {
        const double bound = 1.0 / std::sqrt(double(fin()));
        for (auto& x : w.v) x = static_cast<T>(rng.uniform(-bound, bound));
        b.fill(T(0));
    }

    // x viewed as [rows, fin]; returns [rows, fout].
    Tensor<T> forward(const Tensor<T>& x, int rows, bool training) {
        if (training) x_cache = x;
        Tensor<T> out(rows, fout(), 1, 1);
        nn::linear_fwd(x.data(), rows, fin(), w.data(), b.data(), fout(), out.data());
        return out;
    }
    Tensor<T> backward(const Tensor<T>& dy, int rows) {
        Tensor<T> dx(rows, fin(), 1, 1);
        nn::linear_bwd(x_cache.data(), dy.data(), rows, fin(), fout(), w.data(), dx.data(),
                       gw.data(), gb.data());
        return dx;
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        out.push_back({prefix + ".w", &w, &gw});
        out.push_back({prefix + ".b", &b, &gb});
    }
};

template <typename T>
struct LnAffine {
    Tensor<T> g, gg, b, gb; // each [C, 1, 1, 1]
    nn::LnChannelCache<T> cache;

    LnAffine() = default;
    explicit LnAffine(int c) : g(c, 1, 1, 1), gg(c, 1, 1, 1), b(c, 1, 1, 1), gb(c, 1, 1, 1) {
        g.fill(T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) {
        Tensor<T> y;
        nn::layer_norm_channel_fwd(x, g.data(), b.data(), T(1e-5), y,
                                   training ? &cache : nullptr);
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dx;
        nn::layer_norm_channel_bwd(cache, g.data(), dy, dx, gg.data(), gb.data());
        return dx;
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        out.push_back({prefix + ".g", &g, &gg});
        out.push_back({prefix + ".b", &b, &gb});
    }
};

namespace detail {
template <typename T>
Tensor<T> reshape(Tensor<T> t, int n, int c, int h, int w) {
    if (t.size() != static_cast<size_t>(n) * c * h * w)
        throw ValidationError("reshape: element count mismatch");
    t.dim = {n, c, h, w};
    return t;
}
} // namespace detail

// Windowed MLP-Mixer: Eq-style token mix (along the p^2 frequency axis) then
// channel mix (along C), each pre-normalized over the channel axis with its
// own affine and wrapped in a residual.
template <typename T>
struct MixerBlock {
    LnAffine<T> ln_token, ln_channel;
    Linear<T> tok_fc1, tok_fc2, ch_fc1, ch_fc2;
    Tensor<T> tok_pre_act, ch_pre_act; // caches for GELU backward

    MixerBlock() = default;
    MixerBlock(int c, int p2, int token_expansion, int channel_expansion)
        : ln_token(c),
          ln_channel(c),
          tok_fc1(p2 * token_expansion, p2),
          tok_fc2(p2, p2 * token_expansion),
          ch_fc1(c * channel_expansion, c),
          ch_fc2(c, c * channel_expansion) {}

    void init_params(Rng rng) {
        tok_fc1.kaiming_init(rng.stream("tok1"));
        tok_fc2.kaiming_init(rng.stream("tok2"));
        ch_fc1.kaiming_init(rng.stream("ch1"));
        ch_fc2.kaiming_init(rng.stream("ch2"));
    }

    // x: [B, C, P, 1] window sequence data.
    Tensor<T> forward(const Tensor<T>& x, bool training) {
        const int B = x.n(), C = x.c(), P = x.h();
        // token mixing
        Tensor<T> y1 = ln_token.forward(x, training);
        Tensor<T> u = tok_fc1.forward(detail::reshape(std::move(y1), B * C, P, 1, 1), B * C, training);
        if (training) tok_pre_act = u;
        Tensor<T> g;
        nn::gelu_fwd(u, g);
        Tensor<T> t2 = tok_fc2.forward(g, B * C, training);
        Tensor<T> x1 = detail::reshape(std::move(t2), B, C, P, 1);
        nn::add_into(x1, x);
        // channel mixing
        Tensor<T> y2 = ln_channel.forward(x1, training);
        Tensor<T> yt = nn::transpose_cp(y2); // [B, P, C]
        Tensor<T> u2 = ch_fc1.forward(detail::reshape(std::move(yt), B * P, C, 1, 1), B * P, training);
        if (training) ch_pre_act = u2;
        Tensor<T> g2;
        nn::gelu_fwd(u2, g2);
        Tensor<T> c2 = ch_fc2.forward(g2, B * P, training);
        Tensor<T> ct = nn::transpose_cp(detail::reshape(std::move(c2), B, P, C, 1)); // [B, C, P]
        Tensor<T> out = detail::reshape(std::move(ct), B, C, P, 1);
        nn::add_into(out, x1);
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const int B = dy.n(), C = dy.c(), P = dy.h();
        // channel mixing
        Tensor<T> dct = nn::transpose_cp(detail::reshape(Tensor<T>(dy), B, C, P, 1)); // [B, P, C]
        Tensor<T> dg2 = ch_fc2.backward(detail::reshape(std::move(dct), B * P, C, 1, 1), B * P);
        Tensor<T> du2;
        nn::gelu_bwd(ch_pre_act, dg2, du2);
        Tensor<T> dyt = ch_fc1.backward(du2, B * P);
        Tensor<T> dy2 = nn::transpose_cp(detail::reshape(std::move(dyt), B, P, C, 1)); // [B, C, P]
        Tensor<T> dx1 = ln_channel.backward(detail::reshape(std::move(dy2), B, C, P, 1));
        nn::add_into(dx1, dy);
        // token mixing
        Tensor<T> dg = tok_fc2.backward(detail::reshape(Tensor<T>(dx1), B * C, P, 1, 1), B * C);
        Tensor<T> du;
        nn::gelu_bwd(tok_pre_act, dg, du);
        Tensor<T> dy1 = tok_fc1.backward(du, B * C);
        Tensor<T> dx = ln_token.backward(detail::reshape(std::move(dy1), B, C, P, 1));
        nn::add_into(dx, dx1);
        return dx;
    }

    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        ln_token.collect(out, prefix + ".ln1");
        tok_fc1.collect(out, prefix + ".tok1");
        tok_fc2.collect(out, prefix + ".tok2");
        ln_channel.collect(out, prefix + ".ln2");
        ch_fc1.collect(out, prefix + ".ch1");
        ch_fc2.collect(out, prefix + ".ch2");
    }
};

// PixelUnshuffle -> conv3x3 -> ReLU -> conv3x3 -> PixelShuffle at 4C channels.
template <typename T>
struct InterBranch {
    Conv2d<T> conv1, conv2;
    Tensor<T> pre_act;

    InterBranch() = default;
    explicit InterBranch(int c) : conv1(4 * c, 4 * c, 3, 3), conv2(4 * c, 4 * c, 3, 3) {}

    void init_params(Rng rng) {
        conv1.kaiming_init(rng.stream("conv1"));
        conv2.kaiming_init(rng.stream("conv2"));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) {
        Tensor<T> u = nn::pixel_unshuffle2(x);
        Tensor<T> c1 = conv1.forward(u, training);
        if (training) pre_act = c1;
        Tensor<T> r;
        nn::relu_fwd(c1, r);
        Tensor<T> c2 = conv2.forward(r, training);
        return nn::pixel_shuffle2(c2);
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dc2 = nn::pixel_unshuffle2(dy);
        Tensor<T> dr = conv2.backward(dc2);
        Tensor<T> dc1;
        nn::relu_bwd(pre_act, dr, dc1);
        Tensor<T> du = conv1.backward(dc1);
        return nn::pixel_shuffle2(du);
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        conv1.collect(out, prefix + ".conv1");
        conv2.collect(out, prefix + ".conv2");
    }
};

// DCT -> windowed mixer -> window reverse -> 1x1 conv -> inverse DCT.
template <typename T>
struct IntraBranch {
    int p = 16;
    MixerBlock<T> mixer;
    Conv2d<T> proj;

    IntraBranch() = default;
    IntraBranch(int c, int p_, int token_expansion, int channel_expansion)
        : p(p_), mixer(c, p_ * p_, token_expansion, channel_expansion), proj(c, c, 1, 1) {}

    void init_params(Rng rng) {
        mixer.init_params(rng.stream("mixer"));
        proj.kaiming_init(rng.stream("proj"));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) {
        Tensor<T> f = nn::dct2(x);
        nn::WindowSeq<T> ws = nn::window_partition(f, p);
        ws.data = mixer.forward(ws.data, training);
        Tensor<T> sp = nn::window_reverse(ws);
        Tensor<T> pr = proj.forward(sp, training);
        return nn::idct2(pr);
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dpr = nn::idct2_bwd(dy);
        Tensor<T> dsp = proj.backward(dpr);
        nn::WindowSeq<T> dws = nn::window_partition(dsp, p);
        dws.data = mixer.backward(dws.data);
        Tensor<T> df = nn::window_reverse(dws);
        return nn::dct2_bwd(df);
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        mixer.collect(out, prefix + ".mixer");
        proj.collect(out, prefix + ".proj");
    }
};

// Plain conv residual body (ablation baseline): conv3x3-ReLU-conv3x3 at C.
template <typename T>
struct PlainConvPair {
    Conv2d<T> conv1, conv2;
    Tensor<T> pre_act;

    PlainConvPair() = default;
    explicit PlainConvPair(int c) : conv1(c, c, 3, 3), conv2(c, c, 3, 3) {}

    void init_params(Rng rng) {
        conv1.kaiming_init(rng.stream("conv1"));
        conv2.kaiming_init(rng.stream("conv2"));
    }
    Tensor<T> forward(const Tensor<T>& x, bool training) {
        Tensor<T> c1 = conv1.forward(x, training);
        if (training) pre_act = c1;
        Tensor<T> r;
        nn::relu_fwd(c1, r);
        return conv2.forward(r, training);
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dr = conv2.backward(dy);
        Tensor<T> dc1;
        nn::relu_bwd(pre_act, dr, dc1);
        return conv1.backward(dc1);
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        conv1.collect(out, prefix + ".conv1");
        conv2.collect(out, prefix + ".conv2");
    }
};

// out = z + inter(z) + intra(z); branches are parallel residuals.
template <typename T>
struct I2Block {
    Variant variant = Variant::full;
    std::unique_ptr<InterBranch<T>> inter;
    std::unique_ptr<IntraBranch<T>> intra;
    std::unique_ptr<PlainConvPair<T>> plain;

    I2Block() = default;
    I2Block(const ModelConfig& cfg) : variant(cfg.variant) {
        if (variant == Variant::plain_conv) {
            plain = std::make_unique<PlainConvPair<T>>(cfg.channels);
        } else {
            inter = std::make_unique<InterBranch<T>>(cfg.channels);
            if (variant == Variant::full)
                intra = std::make_unique<IntraBranch<T>>(cfg.channels, cfg.window,
                                                         cfg.token_expansion, cfg.channel_expansion);
        }
    }

    void init_params(Rng rng) {
        if (inter) inter->init_params(rng.stream("inter"));
        if (intra) intra->init_params(rng.stream("intra"));
        if (plain) plain->init_params(rng.stream("plain"));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training, Tensor<T>* intra_out = nullptr) {
        Tensor<T> out = x;
        if (inter) nn::add_into(out, inter->forward(x, training));
        if (intra) {
            Tensor<T> io = intra->forward(x, training);
            if (intra_out) *intra_out = io;
            nn::add_into(out, io);
        }
        if (plain) nn::add_into(out, plain->forward(x, training));
        return out;
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dx = dy;
        if (inter) nn::add_into(dx, inter->backward(dy));
        if (intra) nn::add_into(dx, intra->backward(dy));
        if (plain) nn::add_into(dx, plain->backward(dy));
        return dx;
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        if (inter) inter->collect(out, prefix + ".inter");
        if (intra) intra->collect(out, prefix + ".intra");
        if (plain) plain->collect(out, prefix + ".plain");
    }
};

// Directional 3-tap conv unit used by the cross-view paths.
template <typename T>
struct ConvUnit {
    Conv2d<T> conv1, conv2;
    Tensor<T> pre_act;

    ConvUnit() = default;
    // kh x kw in {3x1, 1x3}
    ConvUnit(int c, int kh, int kw) : conv1(c, c, kh, kw), conv2(c, c, kh, kw) {}

    void init_params(Rng rng) {
        conv1.kaiming_init(rng.stream("conv1"));
        conv2.kaiming_init(rng.stream("conv2"));
    }
    Tensor<T> forward(const Tensor<T>& x, bool training) {
        Tensor<T> c1 = conv1.forward(x, training);
        if (training) pre_act = c1;
        Tensor<T> r;
        nn::relu_fwd(c1, r);
        return conv2.forward(r, training);
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dr = conv2.backward(dy);
        Tensor<T> dc1;
        nn::relu_bwd(pre_act, dr, dc1);
        return conv1.backward(dc1);
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        conv1.collect(out, prefix + ".conv1");
        conv2.collect(out, prefix + ".conv2");
    }
};

// Sagittal path: 1x1 conv, shuffle up, 3x1 conv unit (extent along H),
// unshuffle down. Coronal path mirrors it with 1x3 kernels along W.
// out = z_sag + z_cor + z.
template <typename T>
struct CrossViewBlock {
    LnAffine<T> ln;
    Conv2d<T> sag_proj, cor_proj;
    ConvUnit<T> sag_unit, cor_unit;

    CrossViewBlock() = default;
    explicit CrossViewBlock(int c)
        : ln(c), sag_proj(c, c, 1, 1), cor_proj(c, c, 1, 1), sag_unit(c / 4, 3, 1), cor_unit(c / 4, 1, 3) {}

    void init_params(Rng rng) {
        sag_proj.kaiming_init(rng.stream("sag_proj"));
        cor_proj.kaiming_init(rng.stream("cor_proj"));
        sag_unit.init_params(rng.stream("sag_unit"));
        cor_unit.init_params(rng.stream("cor_unit"));
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) {
        Tensor<T> y = ln.forward(x, training);
        Tensor<T> s = nn::pixel_unshuffle2(
            sag_unit.forward(nn::pixel_shuffle2(sag_proj.forward(y, training)), training));
        Tensor<T> c = nn::pixel_unshuffle2(
            cor_unit.forward(nn::pixel_shuffle2(cor_proj.forward(y, training)), training));
        Tensor<T> out = x;
        nn::add_into(out, s);
        nn::add_into(out, c);
        return out;
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> ds = sag_proj.backward(
            nn::pixel_unshuffle2(sag_unit.backward(nn::pixel_shuffle2(dy))));
        Tensor<T> dc = cor_proj.backward(
            nn::pixel_unshuffle2(cor_unit.backward(nn::pixel_shuffle2(dy))));
        nn::add_into(ds, dc);
        Tensor<T> dx = ln.backward(ds);
        nn::add_into(dx, dy);
        return dx;
    }
    void collect(std::vector<ParamRef<T>>& out, const std::string& prefix) {
        ln.collect(out, prefix + ".ln");
        sag_proj.collect(out, prefix + ".sag.proj");
        sag_unit.collect(out, prefix + ".sag.unit");
        cor_proj.collect(out, prefix + ".cor.proj");
        cor_unit.collect(out, prefix + ".cor.unit");
    }
};

// ------------------------------------------------------------------- network

template <typename T>
struct Taps {
    bool want_block_outputs = false;
    bool want_intra_io = false;
    std::vector<Tensor<T>> block_outputs;                   // output of each I2Block
    std::vector<std::pair<Tensor<T>, Tensor<T>>> intra_io;  // (block input, intra branch output)
};

template <typename T>
struct I3Net {
    ModelConfig cfg;
    Conv2d<T> head, tail;
    std::vector<I2Block<T>> blocks;
    std::vector<CrossViewBlock<T>> cvbs; // aligned with cfg.cvb_positions (full variant only)
    nn::SliceInterpTable interp;
    bool training = true;

    explicit I3Net(const ModelConfig& c) : cfg(c) {
        cfg.validate();
        head = Conv2d<T>(cfg.channels, cfg.s_in, 3, 3);
        tail = Conv2d<T>(cfg.s_out(), cfg.channels, 3, 3);
        blocks.reserve(cfg.n_blocks);
        for (int i = 0; i < cfg.n_blocks; ++i) blocks.emplace_back(cfg);
        if (cfg.variant == Variant::full)
            for (size_t i = 0; i < cfg.cvb_positions.size(); ++i)
                cvbs.emplace_back(cfg.channels);
        interp = nn::slice_interp_table(cfg.s_in, cfg.scale);
    }

    void init_params(std::uint64_t seed) {
        Rng root(seed, fnv1a64("i3net-init"));
        head.kaiming_init(root.stream("head"));
        for (int i = 0; i < cfg.n_blocks; ++i)
            blocks[i].init_params(root.stream("block" + std::to_string(i)));
        for (size_t i = 0; i < cvbs.size(); ++i)
            cvbs[i].init_params(root.stream("cvb" + std::to_string(i)));
        // Zero tail: the network starts as the exact linear interpolator.
        tail.w.fill(T(0));
        tail.b.fill(T(0));
    }

    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> out;
        head.collect(out, "head");
        size_t cvb_idx = 0;
        for (int i = 0; i < cfg.n_blocks; ++i) {
            blocks[i].collect(out, "block" + std::to_string(i));
            if (cvb_idx < cfg.cvb_positions.size() && cfg.cvb_positions[cvb_idx] == i + 1 &&
                cfg.variant == Variant::full) {
                cvbs[cvb_idx].collect(out, "cvb" + std::to_string(cvb_idx));
                ++cvb_idx;
            }
        }
        tail.collect(out, "tail");
        return out;
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (const auto& p : params()) n += p.value->size();
        return n;
    }

    void zero_grad() {
        for (auto& p : params()) p.grad->fill(T(0));
    }

    // x: [N, s_in, h, w] -> [N, s_out, h, w]
    Tensor<T> forward(const Tensor<T>& x, Taps<T>* taps = nullptr) {
        if (x.c() != cfg.s_in)
            throw ValidationError("i3net: input has " + std::to_string(x.c()) + " slices, config expects " +
                                  std::to_string(cfg.s_in));
        Tensor<T> z = head.forward(x, training);
        size_t cvb_idx = 0;
        for (int i = 0; i < cfg.n_blocks; ++i) {
            Tensor<T> intra_out;
            bool want_io = taps && taps->want_intra_io && blocks[i].intra;
            Tensor<T> zin;
            if (want_io) zin = z;
            z = blocks[i].forward(z, training, want_io ? &intra_out : nullptr);
            if (taps && taps->want_block_outputs) taps->block_outputs.push_back(z);
            if (want_io) taps->intra_io.emplace_back(std::move(zin), std::move(intra_out));
            if (cvb_idx < cfg.cvb_positions.size() && cfg.cvb_positions[cvb_idx] == i + 1 &&
                cfg.variant == Variant::full) {
                z = cvbs[cvb_idx].forward(z, training);
                ++cvb_idx;
            }
        }
        Tensor<T> out = tail.forward(z, training);
        if (cfg.global_residual) {
            Tensor<T> base = nn::lininterp_slices_fwd(x, interp);
            nn::add_into(out, base);
        }
        debug_check_finite(out, "i3net_forward");
        return out;
    }

    // dy: [N, s_out, h, w] -> gradient w.r.t. the input (params accumulate).
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dz = tail.backward(dy);
        size_t cvb_idx = cvbs.size();
        for (int i = cfg.n_blocks - 1; i >= 0; --i) {
            if (cfg.variant == Variant::full && cvb_idx > 0 &&
                cfg.cvb_positions[cvb_idx - 1] == i + 1) {
                --cvb_idx;
                dz = cvbs[cvb_idx].backward(dz);
            }
            dz = blocks[i].backward(dz);
        }
        Tensor<T> dx = head.backward(dz);
        if (cfg.global_residual) {
            Tensor<T> dres = nn::lininterp_slices_bwd(dy, interp, dy.h(), dy.w());
            nn::add_into(dx, dres);
        }
        return dx;
    }
};

// Copy parameters across precisions by registry order (names must agree).
template <typename Dst, typename Src>
void copy_params(I3Net<Dst>& dst, I3Net<Src>& src) {
    auto dp = dst.params();
    auto sp = src.params();
    if (dp.size() != sp.size()) throw ValidationError("copy_params: model structure mismatch");
    for (size_t i = 0; i < dp.size(); ++i) {
        if (dp[i].name != sp[i].name || dp[i].value->size() != sp[i].value->size())
            throw ValidationError("copy_params: parameter mismatch at " + dp[i].name);
        for (size_t j = 0; j < sp[i].value->size(); ++j)
            dp[i].value->v[j] = static_cast<Dst>(sp[i].value->v[j]);
    }
}

} // namespace i3net::model
