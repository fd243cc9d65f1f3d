#include "i3net/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "i3net/errors.hpp"
#include "i3net/kernels.hpp"
#include "i3net/threadpool.hpp"

namespace i3net::eval {

using nlohmann::json;

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::string hardware_descriptor() {
    std::string model = "unknown cpu";
    std::ifstream f("/proc/cpuinfo");
    std::string line;
    while (std::getline(f, line)) {
        if (line.rfind("model name", 0) == 0) {
            auto pos = line.find(':');
            if (pos != std::string::npos) {
                model = line.substr(pos + 1);
                while (!model.empty() && model.front() == ' ') model.erase(model.begin());
            }
            break;
        }
    }
    return model + ", " + std::to_string(ThreadPool::instance().size()) + " threads, kernels=" +
           kernels::backend_name(kernels::active_backend());
}

EvalReport evaluate(const std::vector<std::pair<std::string, SynthFn>>& methods,
                    const std::vector<std::pair<std::string, vol::Volume>>& gt_volumes, int scale,
                    bool deterministic, const std::string& config_fingerprint, int latency_runs,
                    int latency_warmups) {
    EvalReport rep;
    rep.config_fingerprint = config_fingerprint;
    rep.deterministic = deterministic;
    rep.timestamp = deterministic ? "" : iso_timestamp();
    rep.scale = scale;
    rep.hardware = hardware_descriptor();
    for (auto& m : methods) rep.method_names.push_back(m.first);

    for (const auto& [name, gt] : gt_volumes) {
        VolumeEntry entry;
        entry.name = name;
        auto [lr, hr] = vol::downsample_axial(gt, scale);
        for (const auto& [mname, fn] : methods) {
            MethodMetrics mm;
            try {
                vol::Volume pred = fn(lr);
                if (pred.s != hr.s || pred.h != hr.h || pred.w != hr.w)
                    throw ValidationError("method output shape mismatch");
                auto p = psnr(pred, hr);
                mm.psnr_inf = p.infinite;
                mm.psnr = p.infinite ? 0.0 : p.db;
                bool padded = false;
                mm.ssim_a = ssim_view(pred, hr, View::axial, &padded);
                mm.ssim_c = ssim_view(pred, hr, View::coronal, &padded);
                mm.ssim_s = ssim_view(pred, hr, View::sagittal, &padded);
                if (padded) mm.flags.push_back("ssim_reflect_padded");
                if (!deterministic) {
                    for (int i = 0; i < latency_warmups; ++i) fn(lr);
                    std::vector<double> runs;
                    runs.reserve(latency_runs);
                    for (int i = 0; i < latency_runs; ++i) {
                        const auto t0 = std::chrono::steady_clock::now();
                        fn(lr);
                        const auto t1 = std::chrono::steady_clock::now();
                        runs.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                    }
                    mm.latency_ms = median(runs);
                    mm.latency_measured = true;
                }
            } catch (const std::exception& e) {
                mm.failed = true;
                mm.error = e.what();
            }
            entry.methods.emplace(mname, std::move(mm));
        }
        rep.volumes.push_back(std::move(entry));
    }
    for (auto& m : methods) rep.aggregates[m.first] = recompute_aggregate(rep, m.first);
    return rep;
}

Aggregate recompute_aggregate(const EvalReport& rep, const std::string& method) {
    Aggregate a;
    std::vector<double> ps, sa, sc, ss, lat;
    for (const auto& ve : rep.volumes) {
        auto it = ve.methods.find(method);
        if (it == ve.methods.end()) continue;
        const MethodMetrics& mm = it->second;
        if (mm.failed) {
            ++a.failed_count;
            continue;
        }
        if (mm.psnr_inf) {
            ++a.psnr_inf_count;
        } else {
            ps.push_back(mm.psnr);
        }
        sa.push_back(mm.ssim_a);
        sc.push_back(mm.ssim_c);
        ss.push_back(mm.ssim_s);
        if (mm.latency_measured) lat.push_back(mm.latency_ms);
    }
    auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
        if (v.empty()) {
            mean = 0.0;
            sd = 0.0;
            return;
        }
        double s = 0.0;
        for (double x : v) s += x;
        mean = s / v.size();
        double q = 0.0;
        for (double x : v) q += (x - mean) * (x - mean);
        sd = std::sqrt(q / v.size());
    };
    a.n = static_cast<int>(ps.size());
    mean_std(ps, a.psnr_mean, a.psnr_std);
    mean_std(sa, a.ssim_a_mean, a.ssim_a_std);
    mean_std(sc, a.ssim_c_mean, a.ssim_c_std);
    mean_std(ss, a.ssim_s_mean, a.ssim_s_std);
    if (!lat.empty()) {
        double sd;
        mean_std(lat, a.latency_ms_mean, sd);
        a.latency_measured = true;
    }
    return a;
}

namespace {

json metrics_to_json(const MethodMetrics& mm) {
    json j;
    j["failed"] = mm.failed;
    if (mm.failed) {
        j["error"] = mm.error;
        return j;
    }
    if (mm.psnr_inf) {
        j["psnr"] = nullptr;
        j["psnr_inf"] = true;
    } else {
        j["psnr"] = mm.psnr;
        j["psnr_inf"] = false;
    }
    j["ssim_a"] = mm.ssim_a;
    j["ssim_c"] = mm.ssim_c;
    j["ssim_s"] = mm.ssim_s;
    if (mm.latency_measured)
        j["latency_ms"] = mm.latency_ms;
    else
        j["latency_ms"] = nullptr;
    j["flags"] = mm.flags;
    return j;
}

MethodMetrics metrics_from_json(const json& j) {
    MethodMetrics mm;
    mm.failed = j.at("failed").get<bool>();
    if (mm.failed) {
        mm.error = j.at("error").get<std::string>();
        return mm;
    }
    mm.psnr_inf = j.at("psnr_inf").get<bool>();
    if (!mm.psnr_inf) mm.psnr = j.at("psnr").get<double>();
    mm.ssim_a = j.at("ssim_a").get<double>();
    mm.ssim_c = j.at("ssim_c").get<double>();
    mm.ssim_s = j.at("ssim_s").get<double>();
    if (!j.at("latency_ms").is_null()) {
        mm.latency_ms = j.at("latency_ms").get<double>();
        mm.latency_measured = true;
    }
    mm.flags = j.at("flags").get<std::vector<std::string>>();
    return mm;
}

json aggregate_to_json(const Aggregate& a) {
    json j;
    j["n"] = a.n;
    j["psnr_inf_count"] = a.psnr_inf_count;
    j["failed_count"] = a.failed_count;
    j["psnr_mean"] = a.psnr_mean;
    j["psnr_std"] = a.psnr_std;
    j["ssim_a_mean"] = a.ssim_a_mean;
    j["ssim_a_std"] = a.ssim_a_std;
    j["ssim_c_mean"] = a.ssim_c_mean;
    j["ssim_c_std"] = a.ssim_c_std;
    j["ssim_s_mean"] = a.ssim_s_mean;
    j["ssim_s_std"] = a.ssim_s_std;
    if (a.latency_measured)
        j["latency_ms_mean"] = a.latency_ms_mean;
    else
        j["latency_ms_mean"] = nullptr;
    return j;
}

Aggregate aggregate_from_json(const json& j) {
    Aggregate a;
    a.n = j.at("n").get<int>();
    a.psnr_inf_count = j.at("psnr_inf_count").get<int>();
    a.failed_count = j.at("failed_count").get<int>();
    a.psnr_mean = j.at("psnr_mean").get<double>();
    a.psnr_std = j.at("psnr_std").get<double>();
    a.ssim_a_mean = j.at("ssim_a_mean").get<double>();
    a.ssim_a_std = j.at("ssim_a_std").get<double>();
    a.ssim_c_mean = j.at("ssim_c_mean").get<double>();
    a.ssim_c_std = j.at("ssim_c_std").get<double>();
    a.ssim_s_mean = j.at("ssim_s_mean").get<double>();
    a.ssim_s_std = j.at("ssim_s_std").get<double>();
    if (!j.at("latency_ms_mean").is_null()) {
        a.latency_ms_mean = j.at("latency_ms_mean").get<double>();
        a.latency_measured = true;
    }
    return a;
}

} // namespace

void write_report_json(const EvalReport& rep, const std::string& path) {
    json j;
    j["schema_version"] = rep.schema_version;
    j["config_fingerprint"] = rep.config_fingerprint;
    if (rep.timestamp.empty())
        j["timestamp"] = nullptr;
    else
        j["timestamp"] = rep.timestamp;
    j["deterministic"] = rep.deterministic;
    j["scale"] = rep.scale;
    j["hardware"] = rep.hardware;
    j["methods"] = rep.method_names;
    json vols = json::array();
    for (const auto& ve : rep.volumes) {
        json v;
        v["name"] = ve.name;
        json ms;
        for (const auto& [k, mm] : ve.methods) ms[k] = metrics_to_json(mm);
        v["metrics"] = ms;
        vols.push_back(v);
    }
    j["volumes"] = vols;
    json ag;
    for (const auto& [k, a] : rep.aggregates) ag[k] = aggregate_to_json(a);
    j["aggregate"] = ag;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << j.dump(2) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

EvalReport read_report_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    json j;
    try {
        f >> j;
        EvalReport rep;
        rep.schema_version = j.at("schema_version").get<int>();
        rep.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        rep.timestamp = j.at("timestamp").is_null() ? "" : j.at("timestamp").get<std::string>();
        rep.deterministic = j.at("deterministic").get<bool>();
        rep.scale = j.at("scale").get<int>();
        rep.hardware = j.at("hardware").get<std::string>();
        rep.method_names = j.at("methods").get<std::vector<std::string>>();
        for (const auto& v : j.at("volumes")) {
            VolumeEntry ve;
            ve.name = v.at("name").get<std::string>();
            for (auto it = v.at("metrics").begin(); it != v.at("metrics").end(); ++it)
                ve.methods.emplace(it.key(), metrics_from_json(it.value()));
            rep.volumes.push_back(std::move(ve));
        }
        for (auto it = j.at("aggregate").begin(); it != j.at("aggregate").end(); ++it)
            rep.aggregates.emplace(it.key(), aggregate_from_json(it.value()));
        return rep;
    } catch (const json::exception& e) {
        throw FormatError(path + ": report JSON: " + e.what());
    }
}

void write_report_csv(const EvalReport& rep, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << "Method,PSNR,SSIM_a,SSIM_c,SSIM_s\n";
    char buf[160];
    for (const auto& name : rep.method_names) {
        auto it = rep.aggregates.find(name);
        if (it == rep.aggregates.end()) continue;
        const Aggregate& a = it->second;
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.6f,%.6f,%.6f\n", name.c_str(), a.psnr_mean,
                      a.ssim_a_mean, a.ssim_c_mean, a.ssim_s_mean);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

} // namespace i3net::eval
