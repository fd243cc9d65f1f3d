#include "i3net/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "i3net/errors.hpp"
#include "i3net/kernels.hpp"
#include "i3net/nnops.hpp"
#include "i3net/report.hpp"
#include "i3net/synthesize.hpp"

namespace i3net::analysis {

bool in_high_region(int i, int j, int n, int m, double rho) {
    return static_cast<double>(i) / n + static_cast<double>(j) / m >= 2.0 * (1.0 - rho);
}

HfResult hf_energy_ratio(const Tensor<float>& feature, double rho) {
    if (!(rho > 0.0) || rho > 1.0)
        throw ValidationError("hf_energy_ratio: rho must be in (0, 1]");
    const int H = feature.h(), W = feature.w();
    Tensor<float> coef = nn::dct2(feature);
    const std::int64_t planes = std::int64_t(coef.n()) * coef.c();
    const size_t plane_sz = static_cast<size_t>(H) * W;
    double ratio_sum = 0.0;
    std::int64_t live = 0;
    bool zero_flag = false;
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const float* p = coef.data() + pl * plane_sz;
        double high = 0.0, total = 0.0;
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
                const double q = double(p[static_cast<size_t>(i) * W + j]);
                const double e = q * q; // I^2 with I = |coefficient|
                total += e;
                if (in_high_region(i, j, H, W, rho)) high += e;
            }
        if (total <= 0.0) {
            zero_flag = true;
            continue;
        }
        ratio_sum += high / total;
        ++live;
    }
    HfResult r;
    if (live == 0) {
        r.zero_flag = true;
        return r;
    }
    r.ratio = ratio_sum / live;
    r.zero_flag = zero_flag;
    return r;
}

std::vector<std::pair<double, double>> energy_curve(const Tensor<float>& feature,
                                                    const std::vector<double>& rhos) {
    std::vector<std::pair<double, double>> out;
    out.reserve(rhos.size());
    for (double r : rhos) out.emplace_back(r, hf_energy_ratio(feature, r).ratio);
    return out;
}

double uniform_curve_value(int n, int m, double rho) {
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (in_high_region(i, j, n, m, rho)) ++count;
    return static_cast<double>(count) / (static_cast<double>(n) * m);
}

RedundancyResult feature_redundancy(const Tensor<float>& feature) {
    const int C = feature.c();
    if (C < 2) throw ValidationError("feature_redundancy: need at least 2 channels");
    const std::int64_t P = std::int64_t(feature.h()) * feature.w() * feature.n();
    // Flatten channel maps over batch and space.
    std::vector<std::vector<double>> ch(C);
    for (int c = 0; c < C; ++c) {
        ch[c].resize(P);
        for (int n = 0; n < feature.n(); ++n) {
            const float* src = feature.data() +
                               (std::int64_t(n) * C + c) * feature.h() * feature.w();
            std::copy(src, src + std::int64_t(feature.h()) * feature.w(),
                      ch[c].begin() + std::int64_t(n) * feature.h() * feature.w());
        }
    }
    std::vector<double> mean(C), sd(C);
    std::vector<bool> live(C, true);
    RedundancyResult res;
    for (int c = 0; c < C; ++c) {
        double s = 0.0;
        for (double x : ch[c]) s += x;
        mean[c] = s / P;
        double q = 0.0;
        for (double x : ch[c]) q += (x - mean[c]) * (x - mean[c]);
        sd[c] = std::sqrt(q / P);
        if (sd[c] == 0.0) {
            live[c] = false;
            ++res.excluded_channels;
        }
    }
    double acc = 0.0;
    std::int64_t pairs = 0;
    for (int a = 0; a < C; ++a) {
        if (!live[a]) continue;
        for (int b = a + 1; b < C; ++b) {
            if (!live[b]) continue;
            double cov = 0.0;
            for (std::int64_t i = 0; i < P; ++i) cov += (ch[a][i] - mean[a]) * (ch[b][i] - mean[b]);
            cov /= P;
            acc += std::fabs(cov / (sd[a] * sd[b]));
            ++pairs;
        }
    }
    if (pairs == 0) {
        res.undefined = true;
        return res;
    }
    res.value = acc / pairs;
    return res;
}

Saliency receptive_probe(DiffModule& m, int h, int w, std::uint64_t seed) {
    Rng rng(seed, fnv1a64("receptive"));
    Tensor<double> x = Tensor<double>::random_uniform(1, m.in_channels(), h, w, rng, -1.0, 1.0);
    Tensor<double> y = m.forward(x);
    Tensor<double> dy(y.n(), y.c(), y.h(), y.w());
    dy.at(0, 0, y.h() / 2, y.w() / 2) = 1.0;
    Tensor<double> dx = m.backward(dy);
    Saliency s;
    s.h = h;
    s.w = w;
    s.raw.assign(static_cast<size_t>(h) * w, 0.0);
    for (int c = 0; c < dx.c(); ++c)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                s.raw[static_cast<size_t>(i) * w + j] += std::fabs(dx.at(0, c, i, j));
    double mx = 0.0;
    for (double v : s.raw) mx = std::max(mx, v);
    s.normalized.resize(s.raw.size());
    for (size_t i = 0; i < s.raw.size(); ++i) s.normalized[i] = mx > 0.0 ? s.raw[i] / mx : 0.0;
    for (double v : s.raw)
        if (v > 1e-12) ++s.support;
    return s;
}

namespace {

struct IdentityModule : DiffModule {
    int c;
    explicit IdentityModule(int c_) : c(c_) {}
    Tensor<double> forward(const Tensor<double>& x) override { return x; }
    Tensor<double> backward(const Tensor<double>& dy) override { return dy; }
    int in_channels() const override { return c; }
    int out_channels() const override { return c; }
};

struct Conv3Module : DiffModule {
    model::Conv2d<double> conv;
    explicit Conv3Module(int c, std::uint64_t seed) : conv(c, c, 3, 3) {
        conv.kaiming_init(Rng(seed, fnv1a64("probe-conv")));
    }
    Tensor<double> forward(const Tensor<double>& x) override { return conv.forward(x, true); }
    Tensor<double> backward(const Tensor<double>& dy) override { return conv.backward(dy); }
    int in_channels() const override { return conv.w.c(); }
    int out_channels() const override { return conv.w.n(); }
};

struct InterModule : DiffModule {
    model::InterBranch<double> branch;
    int c;
    InterModule(int c_, std::uint64_t seed) : branch(c_), c(c_) {
        branch.init_params(Rng(seed, fnv1a64("probe-inter")));
    }
    Tensor<double> forward(const Tensor<double>& x) override { return branch.forward(x, true); }
    Tensor<double> backward(const Tensor<double>& dy) override { return branch.backward(dy); }
    int in_channels() const override { return c; }
    int out_channels() const override { return c; }
};

struct IntraModule : DiffModule {
    model::IntraBranch<double> branch;
    int c;
    IntraModule(int c_, int window, std::uint64_t seed) : branch(c_, window, 1, 1), c(c_) {
        branch.init_params(Rng(seed, fnv1a64("probe-intra")));
    }
    Tensor<double> forward(const Tensor<double>& x) override { return branch.forward(x, true); }
    Tensor<double> backward(const Tensor<double>& dy) override { return branch.backward(dy); }
    int in_channels() const override { return c; }
    int out_channels() const override { return c; }
};

struct CvbModule : DiffModule {
    model::CrossViewBlock<double> block;
    int c;
    CvbModule(int c_, std::uint64_t seed) : block(c_), c(c_) {
        block.init_params(Rng(seed, fnv1a64("probe-cvb")));
    }
    Tensor<double> forward(const Tensor<double>& x) override { return block.forward(x, true); }
    Tensor<double> backward(const Tensor<double>& dy) override { return block.backward(dy); }
    int in_channels() const override { return c; }
    int out_channels() const override { return c; }
};

struct NetworkModule : DiffModule {
    model::I3Net<double> net;
    explicit NetworkModule(model::I3Net<float>& src) : net(src.cfg) {
        model::copy_params(net, src);
        net.training = true;
    }
    Tensor<double> forward(const Tensor<double>& x) override { return net.forward(x); }
    Tensor<double> backward(const Tensor<double>& dy) override { return net.backward(dy); }
    int in_channels() const override { return net.cfg.s_in; }
    int out_channels() const override { return net.cfg.s_out(); }
};

} // namespace

std::unique_ptr<DiffModule> make_identity_module(int channels) {
    return std::make_unique<IdentityModule>(channels);
}
std::unique_ptr<DiffModule> make_conv3_module(int channels, std::uint64_t seed) {
    return std::make_unique<Conv3Module>(channels, seed);
}
std::unique_ptr<DiffModule> make_inter_branch_module(int channels, std::uint64_t seed) {
    return std::make_unique<InterModule>(channels, seed);
}
std::unique_ptr<DiffModule> make_intra_branch_module(int channels, int window, std::uint64_t seed) {
    return std::make_unique<IntraModule>(channels, window, seed);
}
std::unique_ptr<DiffModule> make_cross_view_module(int channels, std::uint64_t seed) {
    return std::make_unique<CvbModule>(channels, seed);
}
std::unique_ptr<DiffModule> make_network_module(model::I3Net<float>& net) {
    return std::make_unique<NetworkModule>(net);
}

namespace {

// One piece of a trained model, run in float64.
struct SubModule : DiffModule {
    std::shared_ptr<model::I3Net<double>> net;
    std::string kind;
    model::I2Block<double>* block = nullptr;

    SubModule(model::I3Net<float>& src, std::string kind_)
        : net(std::make_shared<model::I3Net<double>>(src.cfg)), kind(std::move(kind_)) {
        model::copy_params(*net, src);
        net->training = true;
        if (kind == "inter" || kind == "intra") {
            for (auto& b : net->blocks) {
                if (kind == "inter" && b.inter) { block = &b; break; }
                if (kind == "intra" && b.intra) { block = &b; break; }
            }
            if (!block)
                throw ValidationError("model has no " + kind + " branch (variant " +
                                      model::variant_name(net->cfg.variant) + ")");
        } else if (kind == "cvb") {
            if (net->cvbs.empty()) throw ValidationError("model has no cross-view blocks");
        } else if (kind != "head" && kind != "block" && kind != "network") {
            throw ValidationError("unknown probe module: " + kind);
        }
    }

    Tensor<double> forward(const Tensor<double>& x) override {
        if (kind == "network") return net->forward(x);
        if (kind == "head") return net->head.forward(x, true);
        if (kind == "inter") return block->inter->forward(x, true);
        if (kind == "intra") return block->intra->forward(x, true);
        if (kind == "cvb") return net->cvbs[0].forward(x, true);
        return net->blocks[0].forward(x, true);
    }
    Tensor<double> backward(const Tensor<double>& dy) override {
        if (kind == "network") return net->backward(dy);
        if (kind == "head") return net->head.backward(dy);
        if (kind == "inter") return block->inter->backward(dy);
        if (kind == "intra") return block->intra->backward(dy);
        if (kind == "cvb") return net->cvbs[0].backward(dy);
        return net->blocks[0].backward(dy);
    }
    int in_channels() const override { return kind == "network" || kind == "head" ? net->cfg.s_in : net->cfg.channels; }
    int out_channels() const override {
        if (kind == "network") return net->cfg.s_out();
        return net->cfg.channels;
    }
};

} // namespace

std::unique_ptr<DiffModule> make_model_submodule(model::I3Net<float>& net, const std::string& kind) {
    return std::make_unique<SubModule>(net, kind);
}

int round_half_even(double x) {
    const double fl = std::floor(x);
    const double frac = x - fl;
    int base = static_cast<int>(fl);
    if (frac > 0.5) return base + 1;
    if (frac < 0.5) return base;
    return base % 2 == 0 ? base : base + 1;
}

std::vector<std::uint8_t> hu_window(const vol::Volume& v, float lo, float hi) {
    if (!(lo < hi)) throw ValidationError("hu_window: lo must be < hi");
    std::vector<std::uint8_t> out(v.size());
    const double range = double(hi) - double(lo);
    for (size_t i = 0; i < v.size(); ++i) {
        double x = std::min(double(hi), std::max(double(lo), double(v.data[i])));
        // Divide last so exact half-grays (e.g. 127.5) stay exact.
        int g = round_half_even((x - lo) * 255.0 / range);
        out[i] = static_cast<std::uint8_t>(std::min(255, std::max(0, g)));
    }
    return out;
}

BenchResult bench_latency(model::I3Net<float>& net, int h, int w, int runs, int warmups,
                          std::uint64_t seed) {
    BenchResult r;
    r.s_in = net.cfg.s_in;
    r.h = h;
    r.w = w;
    r.scale = net.cfg.scale;
    r.s_out = net.cfg.s_out();
    r.hardware = eval::hardware_descriptor();
    r.backend = kernels::backend_name(kernels::active_backend());

    vol::PhantomSpec spec;
    spec.seed = seed;
    spec.s = net.cfg.s_in;
    spec.h = h;
    spec.w = w;
    vol::Volume lr = vol::normalize_intensity(gen_phantom(spec));

    for (int i = 0; i < warmups; ++i) model::synthesize_volume(lr, net);
    r.runs_ms.reserve(runs);
    for (int i = 0; i < runs; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        model::synthesize_volume(lr, net);
        const auto t1 = std::chrono::steady_clock::now();
        r.runs_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::vector<double> sorted = r.runs_ms;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    r.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return r;
}

} // namespace i3net::analysis
