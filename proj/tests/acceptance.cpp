// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier criteria (overfit, generalization, ablation) train
// real models at desk scale, so this binary takes tens of minutes on a laptop
// CPU; everything is seeded and deterministic.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "i3net/analysis.hpp"
#include "i3net/checkpoint.hpp"
#include "i3net/gradcheck.hpp"
#include "i3net/metrics.hpp"
#include "i3net/model.hpp"
#include "i3net/nnops.hpp"
#include "i3net/report.hpp"
#include "i3net/synthesize.hpp"
#include "i3net/train.hpp"
#include "i3net/volume.hpp"

using namespace i3net;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

model::ModelConfig desk_model(int scale) {
    model::ModelConfig cfg;
    cfg.channels = 32;
    cfg.n_blocks = 4;
    cfg.cvb_positions = {2};
    cfg.window = 16;
    cfg.s_in = 4;
    cfg.scale = scale;
    return cfg;
}

std::vector<vol::Volume> phantom_set(int count, std::uint64_t seed0) {
    std::vector<vol::Volume> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        vol::PhantomSpec spec;
        spec.seed = seed0 + static_cast<std::uint64_t>(i);
        spec.s = 19;
        spec.h = 64;
        spec.w = 64;
        out.push_back(vol::normalize_intensity(vol::gen_phantom(spec)));
    }
    return out;
}

// ---------------------------------------------------------------- criterion 1

template <typename Fwd, typename Bwd>
double op_grad_err(int n, int c, int h, int w, std::uint64_t seed, Fwd&& fwd, Bwd&& bwd) {
    Rng rng(seed);
    Tensor<double> x0 = Tensor<double>::random_uniform(n, c, h, w, rng, -1.0, 1.0);
    Tensor<double> probe = fwd(x0);
    Rng rng2(seed + 1);
    Tensor<double> r = Tensor<double>::random_uniform(probe.dim[0], probe.dim[1], probe.dim[2],
                                                      probe.dim[3], rng2, -1.0, 1.0);
    auto f = [&](const std::vector<double>& flat) {
        Tensor<double> x(n, c, h, w);
        x.v = flat;
        Tensor<double> y = fwd(x);
        double s = 0.0;
        for (size_t i = 0; i < y.v.size(); ++i) s += y.v[i] * r.v[i];
        return s;
    };
    auto g = [&](const std::vector<double>& flat) {
        Tensor<double> x(n, c, h, w);
        x.v = flat;
        fwd(x);
        return bwd(x, r).v;
    };
    auto rep = nn::grad_check(f, g, x0.v, 1e-3, 1e-4, 200, seed + 2);
    return rep.pass ? rep.max_rel_err : std::max(rep.max_rel_err, 1.0);
}

Outcome criterion1() {
    Outcome o;
    Rng rng(1001);

    // DCT Parseval / inversion / linearity at 1e-5 (float32).
    Tensor<float> x = Tensor<float>::random_uniform(2, 3, 32, 32, rng, -1.0f, 1.0f);
    auto l2 = [](const std::vector<float>& v) {
        double s = 0;
        for (float e : v) s += double(e) * e;
        return std::sqrt(s);
    };
    if (std::fabs(l2(nn::dct2(x).v) - l2(x.v)) > 1e-5 * l2(x.v)) o.fail("dct parseval > 1e-5");
    Tensor<float> rt = nn::idct2(nn::dct2(x));
    double inv_err = 0.0;
    for (size_t i = 0; i < x.v.size(); ++i)
        inv_err = std::max(inv_err, std::fabs(double(rt.v[i]) - x.v[i]) /
                                        std::max(1.0, std::fabs(double(x.v[i]))));
    if (inv_err > 1e-5) o.fail("dct inversion > 1e-5");
    {
        Tensor<float> y = Tensor<float>::random_uniform(2, 3, 32, 32, rng, -1.0f, 1.0f);
        Tensor<float> mix(2, 3, 32, 32);
        const float a = 1.3f, b = -0.6f;
        for (size_t i = 0; i < mix.v.size(); ++i) mix.v[i] = a * x.v[i] + b * y.v[i];
        Tensor<float> lhs = nn::dct2(mix);
        Tensor<float> dx = nn::dct2(x), dy = nn::dct2(y);
        double lin_err = 0.0;
        for (size_t i = 0; i < lhs.v.size(); ++i)
            lin_err = std::max(lin_err, std::fabs(double(lhs.v[i]) - (a * double(dx.v[i]) + b * double(dy.v[i]))));
        if (lin_err > 1e-5) o.fail("dct linearity > 1e-5");
    }

    // Bitwise round-trips.
    if (nn::pixel_shuffle2(nn::pixel_unshuffle2(x)).v != x.v) o.fail("shuffle round-trip not bitwise");
    if (nn::window_reverse(nn::window_partition(x, 16)).v != x.v) o.fail("window round-trip not bitwise");

    // Gradient checks on every op.
    double worst = 0.0;
    worst = std::max(worst, op_grad_err(1, 2, 6, 6, 11,
                                        [](const Tensor<double>& t) { return nn::pixel_unshuffle2(t); },
                                        [](const Tensor<double>&, const Tensor<double>& r) { return nn::pixel_shuffle2(r); }));
    worst = std::max(worst, op_grad_err(1, 8, 3, 3, 12,
                                        [](const Tensor<double>& t) { return nn::pixel_shuffle2(t); },
                                        [](const Tensor<double>&, const Tensor<double>& r) { return nn::pixel_unshuffle2(r); }));
    worst = std::max(worst, op_grad_err(1, 1, 8, 8, 13,
                                        [](const Tensor<double>& t) { return nn::dct2(t); },
                                        [](const Tensor<double>&, const Tensor<double>& r) { return nn::dct2_bwd(r); }));
    worst = std::max(worst, op_grad_err(1, 1, 8, 8, 14,
                                        [](const Tensor<double>& t) { return nn::idct2(t); },
                                        [](const Tensor<double>&, const Tensor<double>& r) { return nn::idct2_bwd(r); }));
    worst = std::max(worst, op_grad_err(1, 2, 8, 8, 15,
                                        [](const Tensor<double>& t) { return nn::window_partition(t, 4).data; },
                                        [](const Tensor<double>&, const Tensor<double>& r) {
                                            nn::WindowSeq<double> w;
                                            w.data = r;
                                            w.n = 1;
                                            w.p = 4;
                                            w.src_h = 8;
                                            w.src_w = 8;
                                            w.n_windows = 4;
                                            return nn::window_reverse(w);
                                        }));
    {
        nn::LnChannelCache<double> cache;
        worst = std::max(worst, op_grad_err(1, 4, 3, 3, 16,
                                            [&](const Tensor<double>& t) {
                                                Tensor<double> y;
                                                nn::layer_norm_channel_fwd(
                                                    t, static_cast<const double*>(nullptr),
                                                    static_cast<const double*>(nullptr), 1e-5, y, &cache);
                                                return y;
                                            },
                                            [&](const Tensor<double>&, const Tensor<double>& r) {
                                                Tensor<double> dx;
                                                nn::layer_norm_channel_bwd(cache,
                                                                           static_cast<const double*>(nullptr),
                                                                           r, dx, static_cast<double*>(nullptr),
                                                                           static_cast<double*>(nullptr));
                                                return dx;
                                            }));
    }
    worst = std::max(worst, op_grad_err(1, 1, 4, 4, 17,
                                        [](const Tensor<double>& t) {
                                            Tensor<double> y;
                                            nn::gelu_fwd(t, y);
                                            return y;
                                        },
                                        [](const Tensor<double>& t, const Tensor<double>& r) {
                                            Tensor<double> dx;
                                            nn::gelu_bwd(t, r, dx);
                                            return dx;
                                        }));

    // Full network at [1, 4, 16, 16] in float64.
    {
        model::ModelConfig cfg;
        cfg.channels = 8;
        cfg.n_blocks = 2;
        cfg.cvb_positions = {1};
        cfg.window = 8;
        cfg.s_in = 4;
        cfg.scale = 2;
        model::I3Net<double> net(cfg);
        net.init_params(18);
        Rng prng(19);
        Tensor<double> x0 = Tensor<double>::random_uniform(1, 4, 16, 16, prng, 0.0, 1.0);
        Tensor<double> probe = net.forward(x0);
        Rng prng2(20);
        Tensor<double> r = Tensor<double>::random_uniform(probe.dim[0], probe.dim[1], probe.dim[2],
                                                          probe.dim[3], prng2, -1.0, 1.0);
        auto f = [&](const std::vector<double>& flat) {
            Tensor<double> t(1, 4, 16, 16);
            t.v = flat;
            Tensor<double> y = net.forward(t);
            double s = 0.0;
            for (size_t i = 0; i < y.v.size(); ++i) s += y.v[i] * r.v[i];
            return s;
        };
        auto g = [&](const std::vector<double>& flat) {
            Tensor<double> t(1, 4, 16, 16);
            t.v = flat;
            net.forward(t);
            return net.backward(r).v;
        };
        auto rep = nn::grad_check(f, g, x0.v, 1e-3, 1e-4, 256, 21);
        if (!rep.pass) o.fail("full-network grad check max rel err " + std::to_string(rep.max_rel_err));
        worst = std::max(worst, rep.max_rel_err);
    }
    if (worst > 1e-3) o.fail("op grad check max rel err " + std::to_string(worst));
    o.note("max grad-check rel err " + std::to_string(worst));
    return o;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion2() {
    Outcome o;
    for (int r : {1, 2, 4, 6}) {
        for (int crop : {32, 64}) {
            model::ModelConfig cfg = desk_model(r);
            model::I3Net<float> net(cfg);
            net.init_params(2002);
            Rng rng(2003);
            Tensor<float> x = Tensor<float>::random_uniform(1, 4, crop, crop, rng, 0.0f, 1.0f);
            Tensor<float> y = net.forward(x);
            const int want = (4 - 1) * r + 1;
            if (y.dim != std::array<int, 4>{1, want, crop, crop})
                o.fail("shape contract broken at R=" + std::to_string(r) + " crop " + std::to_string(crop));
            if (r == 6 && want != 19) o.fail("scale arithmetic: expected 19 slices at R=6");
        }
    }
    // Identity at init and anchor passthrough through full synthesis.
    model::ModelConfig cfg = desk_model(2);
    model::I3Net<float> net(cfg);
    net.init_params(2004);
    auto vols = phantom_set(1, 7100);
    auto [lr, hr] = vol::downsample_axial(vols[0], 2);
    vol::Volume out = model::synthesize_volume(lr, net);
    vol::Volume lin = eval::baseline_interp(lr, 2, eval::InterpKind::linear);
    double max_err = 0.0;
    for (size_t i = 0; i < out.data.size(); ++i)
        max_err = std::max(max_err, std::fabs(double(out.data[i]) - lin.data[i]));
    if (max_err > 1e-6) o.fail("identity-at-init deviates from linear interp by " + std::to_string(max_err));
    for (int k = 0; k < lr.s; ++k)
        if (std::memcmp(&out.at(2 * k, 0, 0), &lr.at(k, 0, 0), sizeof(float) * lr.h * lr.w) != 0)
            o.fail("anchor passthrough not bitwise at k=" + std::to_string(k));
    return o;
}

// ---------------------------------------------------------------- criterion 3

struct TrainedDesk {
    std::unique_ptr<model::I3Net<float>> net;
    train::TrainHistory history;
};

TrainedDesk train_desk(model::Variant variant, const std::vector<vol::Volume>& data, int epochs,
                       int batch, std::uint64_t seed) {
    model::ModelConfig cfg = desk_model(2);
    cfg.variant = variant;
    if (variant != model::Variant::full) cfg.cvb_positions = {};
    TrainedDesk td;
    td.net = std::make_unique<model::I3Net<float>>(cfg);
    td.net->init_params(seed);
    train::TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.crop = 64;
    tc.checkpoint_interval = 0;
    tc.val_interval = 0;
    tc.seed = seed;
    train::Trainer trainer(*td.net, tc);
    trainer.run(data, {});
    td.history = trainer.history();
    return td;
}

Outcome criterion3() {
    Outcome o;
    auto data = phantom_set(1, 7300);
    TrainedDesk td = train_desk(model::Variant::full, data, 2000, 1, 73);
    const auto& loss = td.history.loss;
    const double initial = loss.front();
    double final_l1 = 0.0;
    for (int i = 0; i < 20; ++i) final_l1 += loss[loss.size() - 1 - i];
    final_l1 /= 20.0;
    if (!(final_l1 < initial / 3.0))
        o.fail("final L1 " + std::to_string(final_l1) + " not < initial/3 = " +
               std::to_string(initial / 3.0));

    auto [lr, hr] = vol::downsample_axial(data[0], 2);
    vol::Volume pred = model::synthesize_volume(lr, *td.net);
    vol::Volume lin = eval::baseline_interp(lr, 2, eval::InterpKind::linear);
    const double model_db = eval::psnr(pred, hr).db;
    const double lin_db = eval::psnr(lin, hr).db;
    if (!(model_db >= lin_db + 1.0))
        o.fail("overfit PSNR " + std::to_string(model_db) + " dB not >= linear " +
               std::to_string(lin_db) + " + 1.0 dB");
    o.note("initial L1 " + std::to_string(initial) + ", final " + std::to_string(final_l1) +
           ", psnr " + std::to_string(model_db) + " vs linear " + std::to_string(lin_db));
    return o;
}

// ------------------------------------------------------- criteria 4, 5 and 6

struct GenResult {
    TrainedDesk full, inter_only, plain;
    std::vector<vol::Volume> held_out;
    double full_psnr = 0.0, inter_psnr = 0.0, plain_psnr = 0.0;
    double full_ssim_a = 0.0, lin_psnr = 0.0, lin_ssim_a = 0.0;
};

double mean_psnr(model::I3Net<float>& net, const std::vector<vol::Volume>& held_out, double* ssim_a) {
    double psum = 0.0, ssum = 0.0;
    for (const auto& gt : held_out) {
        auto [lr, hr] = vol::downsample_axial(gt, 2);
        vol::Volume pred = model::synthesize_volume(lr, net);
        psum += eval::psnr(pred, hr).db;
        ssum += eval::ssim_view(pred, hr, eval::View::axial);
    }
    if (ssim_a) *ssim_a = ssum / held_out.size();
    return psum / held_out.size();
}

GenResult run_generalization(int epochs) {
    GenResult g;
    auto train_set = phantom_set(20, 7400);
    g.held_out = phantom_set(5, 7900);
    g.full = train_desk(model::Variant::full, train_set, epochs, 4, 74);
    g.inter_only = train_desk(model::Variant::inter_only, train_set, epochs, 4, 74);
    g.plain = train_desk(model::Variant::plain_conv, train_set, epochs, 4, 74);
    g.full_psnr = mean_psnr(*g.full.net, g.held_out, &g.full_ssim_a);
    g.inter_psnr = mean_psnr(*g.inter_only.net, g.held_out, nullptr);
    g.plain_psnr = mean_psnr(*g.plain.net, g.held_out, nullptr);
    double lin_psum = 0.0, lin_ssum = 0.0;
    for (const auto& gt : g.held_out) {
        auto [lr, hr] = vol::downsample_axial(gt, 2);
        vol::Volume lin = eval::baseline_interp(lr, 2, eval::InterpKind::linear);
        lin_psum += eval::psnr(lin, hr).db;
        lin_ssum += eval::ssim_view(lin, hr, eval::View::axial);
    }
    g.lin_psnr = lin_psum / g.held_out.size();
    g.lin_ssim_a = lin_ssum / g.held_out.size();
    return g;
}

Outcome criterion4(const GenResult& g) {
    Outcome o;
    if (!(g.full_psnr >= g.lin_psnr + 0.5))
        o.fail("held-out PSNR " + std::to_string(g.full_psnr) + " not >= linear " +
               std::to_string(g.lin_psnr) + " + 0.5 dB");
    if (!(g.full_ssim_a >= g.lin_ssim_a))
        o.fail("held-out SSIM_a " + std::to_string(g.full_ssim_a) + " below linear " +
               std::to_string(g.lin_ssim_a));
    o.note("psnr " + std::to_string(g.full_psnr) + " vs linear " + std::to_string(g.lin_psnr) +
           ", ssim_a " + std::to_string(g.full_ssim_a) + " vs " + std::to_string(g.lin_ssim_a));
    return o;
}

Outcome criterion5(const GenResult& g) {
    Outcome o;
    if (g.full_psnr < g.inter_psnr - 0.2)
        o.fail("full model inverts vs inter-only by more than 0.2 dB");
    if (g.inter_psnr < g.plain_psnr - 0.2)
        o.fail("inter-only inverts vs plain-conv by more than 0.2 dB");
    o.note("full " + std::to_string(g.full_psnr) + " dB, inter-only " + std::to_string(g.inter_psnr) +
           " dB, plain-conv " + std::to_string(g.plain_psnr) + " dB");
    return o;
}

Outcome criterion6(GenResult& g) {
    Outcome o;
    // Feed one held-out LR window through the trained full model with taps.
    auto [lr, hr] = vol::downsample_axial(g.held_out[0], 2);
    Tensor<float> x(1, 4, lr.h, lr.w);
    for (int k = 0; k < 4; ++k)
        std::copy_n(&lr.at(k, 0, 0), static_cast<size_t>(lr.h) * lr.w, &x.at(0, k, 0, 0));
    model::I3Net<float>& net = *g.full.net;
    const bool was_training = net.training;
    net.training = false;
    model::Taps<float> taps;
    taps.want_block_outputs = true;
    taps.want_intra_io = true;
    net.forward(x, &taps);
    net.training = was_training;

    // Monotone energy curve on the last block output.
    std::vector<double> rhos;
    for (int i = 1; i <= 20; ++i) rhos.push_back(0.05 * i);
    auto curve = analysis::energy_curve(taps.block_outputs.back(), rhos);
    for (size_t i = 1; i < curve.size(); ++i)
        if (curve[i].second < curve[i - 1].second - 1e-12) o.fail("energy curve not monotone in rho");

    // Parseval on the same feature.
    {
        const Tensor<float>& f = taps.block_outputs.back();
        Tensor<float> coef = nn::dct2(f);
        double spectral = 0.0, spatial = 0.0;
        for (float v : coef.v) spectral += double(v) * v;
        for (float v : f.v) spatial += double(v) * v;
        if (std::fabs(spectral - spatial) > 1e-4 * spatial) o.fail("parseval consistency > 1e-4");
    }

    // Directional uplift: intra output vs block input at rho = 0.5, averaged
    // over the blocks that carry an intra branch.
    double in_sum = 0.0, out_sum = 0.0;
    for (auto& [zin, zout] : taps.intra_io) {
        in_sum += analysis::hf_energy_ratio(zin, 0.5).ratio;
        out_sum += analysis::hf_energy_ratio(zout, 0.5).ratio;
    }
    const double in_mean = in_sum / taps.intra_io.size();
    const double out_mean = out_sum / taps.intra_io.size();
    if (!(out_mean >= in_mean))
        o.fail("intra-branch hf ratio " + std::to_string(out_mean) + " not >= block input " +
               std::to_string(in_mean));
    o.note("hf ratio: intra out " + std::to_string(out_mean) + " vs input " + std::to_string(in_mean));
    return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
    Outcome o;
    Rng rng(7700);
    double worst_psnr = 0.0, worst_l1 = 0.0;
    for (int t = 0; t < 50; ++t) {
        vol::Volume a(3, 16, 16), b(3, 16, 16);
        a.domain = b.domain = vol::IntensityDomain::normalized_unit;
        for (auto& v : a.data) v = static_cast<float>(rng.uniform());
        for (auto& v : b.data) v = static_cast<float>(rng.uniform());
        double mse = 0.0, l1 = 0.0;
        for (size_t i = 0; i < a.data.size(); ++i) {
            const double d = double(a.data[i]) - double(b.data[i]);
            mse += d * d;
            l1 += std::fabs(d);
        }
        mse /= double(a.data.size());
        l1 /= double(a.data.size());
        worst_psnr = std::max(worst_psnr,
                              std::fabs(eval::psnr(a, b).db - 10.0 * std::log10(1.0 / mse)));
        Tensor<float> ta(1, 3, 16, 16), tb(1, 3, 16, 16);
        std::copy(a.data.begin(), a.data.end(), ta.v.begin());
        std::copy(b.data.begin(), b.data.end(), tb.v.begin());
        worst_l1 = std::max(worst_l1, std::fabs(train::l1_loss(ta, tb) - l1));
    }
    if (worst_psnr > 1e-6) o.fail("psnr oracle deviation " + std::to_string(worst_psnr));
    if (worst_l1 > 1e-6) o.fail("l1 oracle deviation " + std::to_string(worst_l1));

    auto vols = phantom_set(1, 7701);
    if (eval::ssim_view(vols[0], vols[0], eval::View::axial) != 1.0 ||
        eval::ssim_view(vols[0], vols[0], eval::View::coronal) != 1.0 ||
        eval::ssim_view(vols[0], vols[0], eval::View::sagittal) != 1.0)
        o.fail("ssim(x,x) != 1 exactly");

    auto [lr, hr] = vol::downsample_axial(vols[0], 2);
    for (auto kind : {eval::InterpKind::nearest, eval::InterpKind::linear, eval::InterpKind::cubic}) {
        vol::Volume up = eval::baseline_interp(lr, 2, kind);
        for (int k = 0; k < lr.s; ++k)
            if (std::memcmp(&up.at(2 * k, 0, 0), &lr.at(k, 0, 0), sizeof(float) * lr.h * lr.w) != 0)
                o.fail(std::string("baseline anchors not bitwise for ") + eval::interp_kind_name(kind));
    }
    o.note("worst psnr dev " + std::to_string(worst_psnr) + " dB");
    return o;
}

// ------------------------------------------------------- criteria 8 and 9

std::string cli_binary() {
    const char* p = std::getenv("I3NET_CLI");
    return p ? p : "";
}

int run_cmd(const std::string& cmd, std::string* out = nullptr) {
    std::FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return -1;
    std::string text;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, got);
    if (out) *out = text;
    const int status = pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

Outcome criterion8() {
    Outcome o;
    const std::string cli = cli_binary();
    if (cli.empty()) {
        o.fail("I3NET_CLI not set");
        return o;
    }
    const fs::path dir = fs::temp_directory_path() / "i3net_acceptance_c8";
    fs::remove_all(dir);
    fs::create_directories(dir / "data");
    for (int i = 0; i < 2; ++i) {
        if (run_cmd(cli + " gen-phantom --seed " + std::to_string(800 + i) + " --size 9x32x32 --out " +
                    (dir / "data" / ("p" + std::to_string(i) + ".rvl1")).string()) != 0) {
            o.fail("gen-phantom failed");
            return o;
        }
    }
    const std::string cfg = (dir / "cfg.json").string();
    {
        std::ofstream f(cfg);
        f << R"({"data": {"train_dir": ")" << (dir / "data").string()
          << R"(", "scale": 2, "crop": 32},
             "model": {"channels": 8, "n_blocks": 1, "cvb_positions": [1], "window": 16},
             "train": {"epochs": 3, "batch_size": 1, "checkpoint_interval": 0, "val_interval": 0}})";
    }
    const std::string env = "I3NET_DETERMINISTIC=1 ";
    for (int run = 0; run < 2; ++run) {
        const std::string out = (dir / ("run" + std::to_string(run))).string();
        std::string log;
        if (run_cmd(env + cli + " train --config " + cfg + " --seed 17 --out " + out, &log) != 0) {
            o.fail("train run failed: " + log.substr(0, 200));
            return o;
        }
    }
    if (slurp((dir / "run0/last.i3ck").string()) != slurp((dir / "run1/last.i3ck").string()))
        o.fail("checkpoints differ across identical deterministic runs");

    for (int run = 0; run < 2; ++run) {
        const std::string rep = (dir / ("report" + std::to_string(run) + ".json")).string();
        std::string log;
        if (run_cmd(env + cli + " eval --checkpoint " + (dir / "run0/last.i3ck").string() +
                            " --data " + (dir / "data").string() + " --scale 2 --report " + rep,
                    &log) != 0) {
            o.fail("eval run failed: " + log.substr(0, 200));
            return o;
        }
    }
    if (slurp((dir / "report0.json").string()) != slurp((dir / "report1.json").string()))
        o.fail("reports differ across identical deterministic runs");
    return o;
}

Outcome criterion9() {
    Outcome o;
    const std::string cli = cli_binary();
    if (cli.empty()) {
        o.fail("I3NET_CLI not set");
        return o;
    }
    const fs::path dir = fs::temp_directory_path() / "i3net_acceptance_c9";
    fs::remove_all(dir);
    fs::create_directories(dir);
    model::ModelConfig cfg = desk_model(6);
    model::I3Net<float> net(cfg);
    net.init_params(99);
    const std::string ck = (dir / "bench.i3ck").string();
    model::save_checkpoint(ck, net);

    double medians[2];
    for (int run = 0; run < 2; ++run) {
        const std::string out = (dir / ("bench" + std::to_string(run) + ".json")).string();
        std::string log;
        if (run_cmd(cli + " bench --checkpoint " + ck + " --shape 4x256x256 --scale 6 --out " + out,
                    &log) != 0) {
            o.fail("bench run failed: " + log.substr(0, 200));
            return o;
        }
        std::ifstream f(out);
        nlohmann::json j;
        f >> j;
        medians[run] = j.at("median_ms").get<double>();
        if (run == 0)
            o.note("median " + std::to_string(medians[0]) + " ms, 4x256x256 -> " +
                   std::to_string(j.at("slices_out").get<int>()) + " slices at R=6 on " +
                   j.at("hardware").get<std::string>());
        if (j.at("slices_out").get<int>() != 19) o.fail("bench did not report 19 output slices");
    }
    const double lo = std::min(medians[0], medians[1]);
    if (lo <= 0.0 || std::fabs(medians[0] - medians[1]) > 0.25 * lo)
        o.fail("medians " + std::to_string(medians[0]) + " / " + std::to_string(medians[1]) +
               " differ by more than 25%");
    return o;
}

} // namespace

int main() {
    struct Row {
        int id;
        const char* name;
        double limit_s; // 0 = no stated bound
        std::function<Outcome()> fn;
    };

    GenResult gen; // shared by criteria 4-6
    bool gen_ready = false;
    auto ensure_gen = [&]() -> GenResult& {
        if (!gen_ready) {
            gen = run_generalization(120);
            gen_ready = true;
        }
        return gen;
    };

    std::vector<Row> rows = {
        {1, "numerical-op suite (dct/shuffle/window/grad checks)", 120.0, criterion1},
        {2, "structural suite (shapes, identity-at-init, anchors)", 0.0, criterion2},
        {3, "overfit sanity (2000 steps, one phantom, R=2)", 900.0, criterion3},
        {4, "generalization sanity (20 train / 5 held-out phantoms)", 3600.0,
         [&] { return criterion4(ensure_gen()); }},
        {5, "ablation direction (full >= inter-only >= plain-conv)", 0.0,
         [&] { return criterion5(ensure_gen()); }},
        {6, "frequency-energy probe on the trained model", 0.0, [&] { return criterion6(ensure_gen()); }},
        {7, "metric oracle equivalence (psnr/l1/ssim/anchors)", 0.0, criterion7},
        {8, "determinism (bitwise checkpoints and reports)", 0.0, criterion8},
        {9, "bench stability (4x256x256, R=6, two runs within 25%)", 0.0, criterion9},
    };

    int failures = 0;
    double gen_time = 0.0;
    for (auto& row : rows) {
        const double t0 = now_s();
        Outcome o;
        try {
            o = row.fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double dt = now_s() - t0;
        if (row.id == 4) gen_time = dt; // training happens here; 5 and 6 reuse it
        if (row.limit_s > 0.0 && dt > row.limit_s) {
            o.pass = false;
            o.note("runtime " + std::to_string(dt) + " s exceeds the " +
                   std::to_string(row.limit_s) + " s bound");
        }
        std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", o.pass ? "PASS" : "FAIL", row.id,
                    row.name, dt, o.detail.empty() ? "" : " -- ", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    (void)gen_time;
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all acceptance criteria passed\n");
    return failures == 0 ? 0 : 1;
}
