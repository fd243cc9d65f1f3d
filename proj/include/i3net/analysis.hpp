#pragma once

// Diagnostic probes: high-frequency energy statistics over DCT spectra,
// channel redundancy, gradient-based receptive fields, HU windowing export
// and the inference latency benchmark.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "i3net/model.hpp"
#include "i3net/volume.hpp"

namespace i3net::analysis {

// High-frequency region over an N x M DCT plane at ratio rho in (0, 1]:
// H = {(i, j) : i/N + j/M >= 2(1 - rho)}, L the complement. The boundary is
// inclusive so rho = 1 covers every bin including DC.
bool in_high_region(int i, int j, int n, int m, double rho);

struct HfResult {
    double ratio = 0.0;
    bool zero_flag = false; // feature had no energy; ratio defined as 0
};

// DCT per channel, I = |coefficient|; ratio of sum I^2 over H to the total,
// averaged over channels and batch.
HfResult hf_energy_ratio(const Tensor<float>& feature, double rho);

// (rho, ratio) samples; monotone non-decreasing in rho.
std::vector<std::pair<double, double>> energy_curve(const Tensor<float>& feature,
                                                    const std::vector<double>& rhos);

// Reference curve for an all-ones intensity plane: |H(rho)| / (N*M).
double uniform_curve_value(int n, int m, double rho);

struct RedundancyResult {
    double value = 0.0;
    bool undefined = false;     // every channel was zero-variance
    int excluded_channels = 0;  // zero-variance channels left out
};

// Mean absolute off-diagonal Pearson correlation between channel maps.
RedundancyResult feature_redundancy(const Tensor<float>& feature);

// Probe interface: float64 forward/backward pair for a differentiable module.
struct DiffModule {
    virtual ~DiffModule() = default;
    virtual Tensor<double> forward(const Tensor<double>& x) = 0;
    virtual Tensor<double> backward(const Tensor<double>& dy) = 0;
    virtual int in_channels() const = 0;
    virtual int out_channels() const = 0;
};

struct Saliency {
    int h = 0, w = 0;
    std::vector<double> raw;        // sum over input channels of |d out_center / d in|
    std::vector<double> normalized; // raw / max(raw)
    int support = 0;                // pixels with raw > 1e-12
};

// Gradient magnitude of the center output activation (channel 0) w.r.t. the
// input plane, summed over input channels.
Saliency receptive_probe(DiffModule& m, int h, int w, std::uint64_t seed = 0);

// Adapters over model pieces (fresh float64 instances, seeded init).
std::unique_ptr<DiffModule> make_identity_module(int channels);
std::unique_ptr<DiffModule> make_conv3_module(int channels, std::uint64_t seed);
std::unique_ptr<DiffModule> make_inter_branch_module(int channels, std::uint64_t seed);
std::unique_ptr<DiffModule> make_intra_branch_module(int channels, int window, std::uint64_t seed);
std::unique_ptr<DiffModule> make_cross_view_module(int channels, std::uint64_t seed);
// Wraps an existing float model (parameters are cast to float64).
std::unique_ptr<DiffModule> make_network_module(model::I3Net<float>& net);
// Probes one piece of a trained model: head | inter | intra | cvb | block | network.
std::unique_ptr<DiffModule> make_model_submodule(model::I3Net<float>& net, const std::string& kind);

// clamp to [lo, hi], map to [0, 255], round half to even. Returns [s][h][w].
std::vector<std::uint8_t> hu_window(const vol::Volume& v, float lo, float hi);

// Round-half-even helper shared with tests.
int round_half_even(double x);

struct BenchResult {
    double median_ms = 0.0;
    std::vector<double> runs_ms;
    std::string hardware;
    std::string backend;
    int s_in = 0, h = 0, w = 0, scale = 0, s_out = 0;
};

// Median wall-clock of `runs` timed synthesize_volume calls after `warmups`,
// single stream, on a deterministic random volume of the given shape. Must
// run without concurrent load; the report says so.
BenchResult bench_latency(model::I3Net<float>& net, int h, int w, int runs = 10, int warmups = 3,
                          std::uint64_t seed = 0);

} // namespace i3net::analysis
