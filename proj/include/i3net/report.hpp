#pragma once

// Evaluation driver and report serialization (canonical JSON + optional CSV
// matching the Method / PSNR / SSIM_a / SSIM_c / SSIM_s table layout).

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "i3net/metrics.hpp"
#include "i3net/volume.hpp"

namespace i3net::eval {

struct MethodMetrics {
    bool failed = false;
    std::string error;
    double psnr = 0.0;
    bool psnr_inf = false;
    double ssim_a = 0.0, ssim_c = 0.0, ssim_s = 0.0;
    double latency_ms = 0.0;
    bool latency_measured = false;
    std::vector<std::string> flags;
};

struct VolumeEntry {
    std::string name;
    std::map<std::string, MethodMetrics> methods;
};

struct Aggregate {
    int n = 0;             // rows contributing to psnr_mean (finite PSNR only)
    int psnr_inf_count = 0;
    int failed_count = 0;
    double psnr_mean = 0.0, psnr_std = 0.0;
    double ssim_a_mean = 0.0, ssim_a_std = 0.0;
    double ssim_c_mean = 0.0, ssim_c_std = 0.0;
    double ssim_s_mean = 0.0, ssim_s_std = 0.0;
    double latency_ms_mean = 0.0;
    bool latency_measured = false;
};

struct EvalReport {
    int schema_version = 1;
    std::string config_fingerprint;
    std::string timestamp; // empty in deterministic mode (serialized as null)
    bool deterministic = false;
    int scale = 1;
    std::string hardware;
    std::vector<std::string> method_names;
    std::vector<VolumeEntry> volumes;
    std::map<std::string, Aggregate> aggregates;
};

using SynthFn = std::function<vol::Volume(const vol::Volume& lr)>;

// For each ground-truth volume: trim+decimate by `scale`, run every method on
// the LR volume, score PSNR + per-view SSIM, time the synthesis (median of
// `latency_runs` after `latency_warmups`; skipped in deterministic mode). A
// failing method marks its row failed and evaluation continues.
EvalReport evaluate(const std::vector<std::pair<std::string, SynthFn>>& methods,
                    const std::vector<std::pair<std::string, vol::Volume>>& gt_volumes, int scale,
                    bool deterministic, const std::string& config_fingerprint,
                    int latency_runs = 10, int latency_warmups = 3);

// Recomputes one method's aggregate from the per-volume entries (used by the
// serialization-consistency tests as the independent route).
Aggregate recompute_aggregate(const EvalReport& rep, const std::string& method);

void write_report_json(const EvalReport& rep, const std::string& path);
EvalReport read_report_json(const std::string& path);
void write_report_csv(const EvalReport& rep, const std::string& path);

std::string hardware_descriptor();

} // namespace i3net::eval
