// i3net command-line entry point: phantom generation, training, evaluation,
// synthesis, analysis probes and the latency benchmark. Exit codes: 0 ok,
// 2 config/validation, 3 runtime/numerical, 4 I/O.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "i3net/analysis.hpp"
#include "i3net/checkpoint.hpp"
#include "i3net/config.hpp"
#include "i3net/errors.hpp"
#include "i3net/metrics.hpp"
#include "i3net/report.hpp"
#include "i3net/synthesize.hpp"
#include "i3net/train.hpp"
#include "i3net/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace i3net;

namespace {

bool parse_dims3(const std::string& s, int& a, int& b, int& c) {
    char x1, x2;
    std::istringstream is(s);
    return static_cast<bool>(is >> a >> x1 >> b >> x2 >> c) && x1 == 'x' && x2 == 'x' && is.eof();
}

vol::Volume load_normalized(const std::string& path, double lo, double hi, bool* was_raw = nullptr) {
    vol::Volume v = vol::read_volume(path);
    if (v.domain == vol::IntensityDomain::raw_hu) {
        if (was_raw) *was_raw = true;
        return vol::normalize_intensity(v, static_cast<float>(lo), static_cast<float>(hi));
    }
    if (was_raw) *was_raw = false;
    return v;
}

std::vector<std::pair<std::string, vol::Volume>> load_dir(const std::string& dir, double lo,
                                                          double hi) {
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".rvl1") paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<std::pair<std::string, vol::Volume>> out;
    for (const auto& p : paths)
        out.emplace_back(fs::path(p).filename().string(), load_normalized(p, lo, hi));
    if (out.empty()) throw IoError("no .rvl1 volumes found in " + dir);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << text;
    if (!f) throw IoError("write failed: " + path);
}

// A resolved-settings snapshot lands next to every output artifact.
void write_snapshot(const std::string& artifact_path, const json& snapshot) {
    write_text(artifact_path + ".config.json", snapshot.dump(2) + "\n");
}

int cmd_gen_phantom(const std::string& size, std::uint64_t seed, int ellipsoids, int tubes,
                    double smoothness, const std::string& out) {
    vol::PhantomSpec spec;
    spec.seed = seed;
    if (!parse_dims3(size, spec.s, spec.h, spec.w))
        throw ValidationError("--size must look like SxHxW, got " + size);
    spec.n_ellipsoids = ellipsoids;
    spec.n_tubes = tubes;
    spec.background_smoothness = smoothness;
    vol::Volume v = vol::gen_phantom(spec);
    vol::write_volume(v, out);
    json snap{{"command", "gen-phantom"}, {"seed", seed},       {"size", size},
              {"ellipsoids", ellipsoids}, {"tubes", tubes},     {"smoothness", smoothness},
              {"out", out}};
    write_snapshot(out, snap);
    std::cout << "wrote " << out << " (" << spec.s << "x" << spec.h << "x" << spec.w << ")\n";
    return 0;
}

int cmd_train(const std::string& config_path, const cli::Overrides& ov, const std::string& out_dir) {
    cli::RunConfig rc = cli::parse_config(config_path, ov);
    if (rc.data.train_dir.empty()) throw ValidationError("config: data.train_dir is required for train");
    fs::create_directories(out_dir);

    auto train_pairs = load_dir(rc.data.train_dir, rc.data.normalize_lo, rc.data.normalize_hi);
    std::vector<vol::Volume> train_set;
    for (auto& [n, v] : train_pairs) train_set.push_back(std::move(v));
    std::vector<vol::Volume> val_set;
    if (!rc.data.val_dir.empty()) {
        auto val_pairs = load_dir(rc.data.val_dir, rc.data.normalize_lo, rc.data.normalize_hi);
        for (auto& [n, v] : val_pairs) val_set.push_back(std::move(v));
    }

    model::I3Net<float> net(rc.model);
    net.init_params(rc.seed);
    train::Trainer trainer(net, rc.train);
    trainer.run(train_set, val_set, out_dir, &std::cout);

    model::TrainStatePayload st{trainer.global_step(), trainer.epoch(), rc.seed,
                                trainer.best_psnr(), trainer.best_found()};
    model::save_checkpoint(out_dir + "/last.i3ck", net, &trainer.optimizer(), &st);
    write_text(out_dir + "/config.json", cli::run_config_to_json(rc) + "\n");
    std::cout << "final loss " << trainer.history().loss.back() << ", checkpoints in " << out_dir
              << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data_dir, int scale,
             const std::string& report_path, const std::string& baselines, int crop,
             const std::string& csv_path) {
    auto loaded = model::load_checkpoint(ckpt);
    model::I3Net<float> net = model::model_from_checkpoint(loaded);
    if (scale != net.cfg.scale)
        throw ValidationError("--scale " + std::to_string(scale) + " does not match checkpoint scale " +
                              std::to_string(net.cfg.scale));
    const bool deterministic = cli::deterministic_env_forced();
    auto volumes = load_dir(data_dir, -1024.0, 3071.0);
    if (crop > 0)
        for (auto& [n, v] : volumes) v = vol::crop_center(v, crop);

    std::vector<std::pair<std::string, eval::SynthFn>> methods;
    methods.emplace_back("i3net", [&](const vol::Volume& lr) { return model::synthesize_volume(lr, net); });
    std::stringstream bs(baselines);
    std::string kind;
    while (std::getline(bs, kind, ',')) {
        if (kind.empty()) continue;
        eval::InterpKind k = eval::interp_kind_from_name(kind);
        methods.emplace_back(kind, [k, scale](const vol::Volume& lr) {
            return eval::baseline_interp(lr, scale, k);
        });
    }

    const std::string fingerprint =
        [&] {
            const std::uint64_t h = fnv1a64(model::config_to_json(net.cfg));
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
            return std::string(buf);
        }();
    eval::EvalReport rep = eval::evaluate(methods, volumes, scale, deterministic, fingerprint);
    eval::write_report_json(rep, report_path);
    if (!csv_path.empty()) eval::write_report_csv(rep, csv_path);
    json snap{{"command", "eval"},   {"checkpoint", ckpt},          {"data", data_dir},
              {"scale", scale},      {"baselines", baselines},      {"crop", crop},
              {"deterministic", deterministic}, {"model_config", json::parse(model::config_to_json(net.cfg))}};
    write_snapshot(report_path, snap);
    for (const auto& name : rep.method_names) {
        const auto& a = rep.aggregates.at(name);
        std::cout << name << ": psnr " << a.psnr_mean << " ssim_a " << a.ssim_a_mean << " ssim_c "
                  << a.ssim_c_mean << " ssim_s " << a.ssim_s_mean << "\n";
    }
    std::cout << "report " << report_path << "\n";
    return 0;
}

int cmd_synth(const std::string& ckpt, const std::string& in, int scale, const std::string& out) {
    auto loaded = model::load_checkpoint(ckpt);
    model::I3Net<float> net = model::model_from_checkpoint(loaded);
    if (scale != net.cfg.scale)
        throw ValidationError("--scale " + std::to_string(scale) + " does not match checkpoint scale " +
                              std::to_string(net.cfg.scale));
    bool was_raw = false;
    vol::Volume lr = load_normalized(in, -1024.0, 3071.0, &was_raw);
    model::SynthFlags flags;
    vol::Volume pred = model::synthesize_volume(lr, net, &flags);
    if (was_raw) pred = vol::denormalize_intensity(pred);
    vol::write_volume(pred, out);
    json snap{{"command", "synth"}, {"checkpoint", ckpt}, {"in", in},
              {"scale", scale},     {"out", out},         {"flags", flags.notes}};
    write_snapshot(out, snap);
    std::cout << "wrote " << out << " (" << pred.s << " slices)\n";
    for (const auto& n : flags.notes) std::cout << "note: " << n << "\n";
    return 0;
}

int cmd_analyze_freq(const std::string& ckpt, const std::string& in, const std::string& out,
                     const std::string& csv, const std::string& rho_list) {
    auto loaded = model::load_checkpoint(ckpt);
    model::I3Net<float> net = model::model_from_checkpoint(loaded);
    vol::Volume hr = load_normalized(in, -1024.0, 3071.0);
    auto [lr, hr_trim] = vol::downsample_axial(hr, net.cfg.scale);

    std::vector<double> rhos;
    if (rho_list.empty()) {
        for (int i = 1; i <= 20; ++i) rhos.push_back(i * 0.05);
    } else {
        std::stringstream ss(rho_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) rhos.push_back(std::stod(tok));
    }

    // One s_in-slice window through the network with taps on each I2Block.
    const int unit = std::max(2, net.cfg.window);
    const int crop_h = lr.h / unit * unit, crop_w = lr.w / unit * unit;
    Tensor<float> x(1, net.cfg.s_in, crop_h, crop_w);
    for (int k = 0; k < net.cfg.s_in; ++k)
        for (int y = 0; y < crop_h; ++y)
            for (int xx = 0; xx < crop_w; ++xx) x.at(0, k, y, xx) = lr.at(std::min(k, lr.s - 1), y, xx);
    net.training = false;
    model::Taps<float> taps;
    taps.want_block_outputs = true;
    taps.want_intra_io = true;
    net.forward(x, &taps);

    json stages = json::array();
    auto curve_json = [&](const std::string& name, const Tensor<float>& f) {
        json c;
        c["name"] = name;
        json pts = json::array();
        for (auto& [r, v] : analysis::energy_curve(f, rhos)) pts.push_back({r, v});
        c["curve"] = pts;
        return c;
    };
    for (size_t i = 0; i < taps.block_outputs.size(); ++i)
        stages.push_back(curve_json("block" + std::to_string(i), taps.block_outputs[i]));
    for (size_t i = 0; i < taps.intra_io.size(); ++i) {
        stages.push_back(curve_json("block" + std::to_string(i) + ".input", taps.intra_io[i].first));
        stages.push_back(curve_json("block" + std::to_string(i) + ".intra", taps.intra_io[i].second));
    }
    json uniform = json::array();
    for (double r : rhos) uniform.push_back({r, analysis::uniform_curve_value(crop_h, crop_w, r)});
    json j{{"command", "analyze freq-energy"},
           {"checkpoint", ckpt},
           {"input", in},
           {"rhos", rhos},
           {"stages", stages},
           {"uniform", uniform}};
    write_text(out, j.dump(2) + "\n");
    if (!csv.empty()) {
        std::string text = "rho,ratio\n";
        for (const auto& st : stages) {
            text += "# stage: " + st["name"].get<std::string>() + "\n";
            for (const auto& pt : st["curve"])
                text += std::to_string(pt[0].get<double>()) + "," + std::to_string(pt[1].get<double>()) + "\n";
        }
        text += "# stage: uniform\n";
        for (const auto& pt : uniform)
            text += std::to_string(pt[0].get<double>()) + "," + std::to_string(pt[1].get<double>()) + "\n";
        write_text(csv, text);
    }
    std::cout << "wrote " << out << " (" << stages.size() << " stage curves)\n";
    return 0;
}

int cmd_analyze_redundancy(const std::string& ckpt, const std::string& in, const std::string& out,
                           const std::string& csv) {
    auto loaded = model::load_checkpoint(ckpt);
    model::I3Net<float> net = model::model_from_checkpoint(loaded);
    vol::Volume hr = load_normalized(in, -1024.0, 3071.0);
    auto [lr, hr_trim] = vol::downsample_axial(hr, net.cfg.scale);
    const int unit = std::max(2, net.cfg.window);
    const int crop_h = lr.h / unit * unit, crop_w = lr.w / unit * unit;
    Tensor<float> x(1, net.cfg.s_in, crop_h, crop_w);
    for (int k = 0; k < net.cfg.s_in; ++k)
        for (int y = 0; y < crop_h; ++y)
            for (int xx = 0; xx < crop_w; ++xx) x.at(0, k, y, xx) = lr.at(std::min(k, lr.s - 1), y, xx);
    net.training = false;
    model::Taps<float> taps;
    taps.want_block_outputs = true;
    net.forward(x, &taps);
    json rows = json::array();
    std::string text = "depth,redundancy\n";
    for (size_t i = 0; i < taps.block_outputs.size(); ++i) {
        auto r = analysis::feature_redundancy(taps.block_outputs[i]);
        rows.push_back({{"depth", i + 1},
                        {"redundancy", r.value},
                        {"undefined", r.undefined},
                        {"excluded_channels", r.excluded_channels}});
        text += std::to_string(i + 1) + "," + std::to_string(r.value) + "\n";
    }
    json j{{"command", "analyze redundancy"}, {"checkpoint", ckpt}, {"input", in}, {"depths", rows}};
    write_text(out, j.dump(2) + "\n");
    if (!csv.empty()) write_text(csv, text);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_analyze_receptive(const std::string& ckpt, const std::string& module, const std::string& size,
                          const std::string& out, const std::string& csv, std::uint64_t seed) {
    auto loaded = model::load_checkpoint(ckpt);
    model::I3Net<float> net = model::model_from_checkpoint(loaded);
    int h = 64, w = 64;
    if (!size.empty()) {
        char x1;
        std::istringstream is(size);
        if (!(is >> h >> x1 >> w) || x1 != 'x') throw ValidationError("--size must look like HxW");
    }
    auto mod = analysis::make_model_submodule(net, module);
    analysis::Saliency s = analysis::receptive_probe(*mod, h, w, seed);
    json j{{"command", "analyze receptive"}, {"checkpoint", ckpt}, {"module", module},
           {"h", s.h},   {"w", s.w},         {"support", s.support},
           {"map", s.normalized}};
    write_text(out, j.dump(2) + "\n");
    if (!csv.empty()) {
        std::string text;
        for (int y = 0; y < s.h; ++y) {
            for (int x = 0; x < s.w; ++x) {
                text += std::to_string(s.normalized[static_cast<size_t>(y) * s.w + x]);
                text += (x + 1 == s.w) ? "\n" : ",";
            }
        }
        write_text(csv, text);
    }
    std::cout << module << " support " << s.support << " of " << s.h * s.w << " pixels\n";
    return 0;
}

int cmd_analyze_hu_window(const std::string& in, double lo, double hi, const std::string& prefix) {
    vol::Volume v = vol::read_volume(in);
    if (v.domain != vol::IntensityDomain::raw_hu)
        throw ValidationError("hu-window expects a raw_hu volume");
    auto stack = analysis::hu_window(v, static_cast<float>(lo), static_cast<float>(hi));
    const size_t plane = static_cast<size_t>(v.h) * v.w;
    for (int s = 0; s < v.s; ++s) {
        char name[32];
        std::snprintf(name, sizeof name, "_%04d.pgm", s);
        std::ofstream f(prefix + name, std::ios::binary);
        if (!f) throw IoError("cannot open for write: " + prefix + name);
        f << "P5\n" << v.w << " " << v.h << "\n255\n";
        f.write(reinterpret_cast<const char*>(stack.data() + s * plane),
                static_cast<std::streamsize>(plane));
        if (!f) throw IoError("write failed: " + prefix + name);
    }
    std::cout << "wrote " << v.s << " slices to " << prefix << "_NNNN.pgm (window [" << lo << ", "
              << hi << "])\n";
    return 0;
}

int cmd_bench(const std::string& ckpt, const std::string& shape, int scale, int runs, int warmups,
              const std::string& out) {
    auto loaded = model::load_checkpoint(ckpt);
    model::I3Net<float> net = model::model_from_checkpoint(loaded);
    if (scale != net.cfg.scale)
        throw ValidationError("--scale " + std::to_string(scale) + " does not match checkpoint scale " +
                              std::to_string(net.cfg.scale));
    int s, h, w;
    if (!parse_dims3(shape, s, h, w)) throw ValidationError("--shape must look like SxHxW");
    if (s != net.cfg.s_in)
        throw ValidationError("--shape slice count " + std::to_string(s) +
                              " does not match checkpoint s_in " + std::to_string(net.cfg.s_in));
    auto r = analysis::bench_latency(net, h, w, runs, warmups);
    json j{{"command", "bench"},
           {"shape", shape},
           {"scale", scale},
           {"slices_in", r.s_in},
           {"slices_out", r.s_out},
           {"median_ms", r.median_ms},
           {"runs_ms", r.runs_ms},
           {"hardware", r.hardware},
           {"backend", r.backend},
           {"exclusive", "bench must run without concurrent load"}};
    if (!out.empty()) write_text(out, j.dump(2) + "\n");
    std::cout << "bench " << r.s_in << "x" << h << "x" << w << " -> " << r.s_out << " slices (R="
              << scale << ")\n";
    std::cout << "median_ms " << r.median_ms << "\n";
    std::cout << "hardware: " << r.hardware << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"I3Net: inter/intra-slice interpolation for anisotropic volumes"};
    app.require_subcommand(1);

    // gen-phantom
    auto* gen = app.add_subcommand("gen-phantom", "Generate a deterministic synthetic phantom volume");
    std::string gen_size = "19x64x64", gen_out;
    std::uint64_t gen_seed = 0;
    int gen_ell = 6, gen_tubes = 4;
    double gen_smooth = 1.0;
    gen->add_option("--seed", gen_seed, "Phantom RNG seed");
    gen->add_option("--size", gen_size, "Volume dims SxHxW (default 19x64x64)");
    gen->add_option("--ellipsoids", gen_ell, "Ellipsoid count incl. body envelope (default 6)");
    gen->add_option("--tubes", gen_tubes, "Tube count (default 4)");
    gen->add_option("--smoothness", gen_smooth, "Background smoothness (higher = smoother)");
    gen->add_option("--out", gen_out, "Output .rvl1 path")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train on a directory of RVL1 volumes");
    std::string tr_config, tr_out = "runs/latest";
    std::uint64_t tr_seed = 0;
    bool tr_det = false, tr_seed_set = false;
    tr->add_option("--config", tr_config, "Config JSON path (empty = documented defaults)");
    auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "Override config seed");
    tr->add_flag("--deterministic", tr_det, "Force deterministic mode");
    tr->add_option("--out", tr_out, "Output directory for checkpoints (default runs/latest)");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint against ground-truth volumes");
    std::string ev_ckpt, ev_data, ev_report, ev_baselines = "nearest,linear,cubic", ev_csv;
    int ev_scale = 2, ev_crop = 0;
    ev->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
    ev->add_option("--data", ev_data, "Directory of ground-truth .rvl1 volumes")->required();
    ev->add_option("--scale", ev_scale, "Axial upsampling factor R (must match checkpoint)")->required();
    ev->add_option("--report", ev_report, "Report JSON output path")->required();
    ev->add_option("--baselines", ev_baselines, "Comma list of nearest,linear,cubic (default all)");
    ev->add_option("--crop", ev_crop, "Center crop volumes in-plane before eval (0 = none)");
    ev->add_option("--csv", ev_csv, "Also write the aggregate table as CSV");

    // synth
    auto* sy = app.add_subcommand("synth", "Synthesize a dense volume from a sparse one");
    std::string sy_ckpt, sy_in, sy_out;
    int sy_scale = 2;
    sy->add_option("--checkpoint", sy_ckpt, "Checkpoint path")->required();
    sy->add_option("--in", sy_in, "Input .rvl1 volume (LR)")->required();
    sy->add_option("--scale", sy_scale, "Axial upsampling factor R (must match checkpoint)")->required();
    sy->add_option("--out", sy_out, "Output .rvl1 path")->required();

    // analyze
    auto* an = app.add_subcommand("analyze", "Diagnostic probes");
    an->require_subcommand(1);
    auto* fe = an->add_subcommand("freq-energy", "Per-stage high-frequency energy curves");
    std::string fe_ckpt, fe_in, fe_out, fe_csv, fe_rhos;
    fe->add_option("--checkpoint", fe_ckpt, "Checkpoint path")->required();
    fe->add_option("--in", fe_in, "Input .rvl1 volume")->required();
    fe->add_option("--out", fe_out, "Output JSON path")->required();
    fe->add_option("--csv", fe_csv, "Also write two-column (rho, ratio) CSV");
    fe->add_option("--rhos", fe_rhos, "Comma list of rho values (default 0.05..1.0 step 0.05)");
    auto* rd = an->add_subcommand("redundancy", "Feature redundancy vs. network depth");
    std::string rd_ckpt, rd_in, rd_out, rd_csv;
    rd->add_option("--checkpoint", rd_ckpt, "Checkpoint path")->required();
    rd->add_option("--in", rd_in, "Input .rvl1 volume")->required();
    rd->add_option("--out", rd_out, "Output JSON path")->required();
    rd->add_option("--csv", rd_csv, "Also write (depth, redundancy) CSV");
    auto* rc = an->add_subcommand("receptive", "Gradient receptive-field probe");
    std::string rc_ckpt, rc_module = "network", rc_size = "64x64", rc_out, rc_csv;
    std::uint64_t rc_seed = 0;
    rc->add_option("--checkpoint", rc_ckpt, "Checkpoint path")->required();
    rc->add_option("--module", rc_module, "head|inter|intra|cvb|block|network (default network)");
    rc->add_option("--size", rc_size, "Probe plane HxW (default 64x64)");
    rc->add_option("--seed", rc_seed, "Probe input seed");
    rc->add_option("--out", rc_out, "Output JSON path")->required();
    rc->add_option("--csv", rc_csv, "Also write the saliency map as CSV");
    auto* hw = an->add_subcommand("hu-window", "Export 8-bit slices under an HU display window");
    std::string hw_in, hw_prefix;
    double hw_lo = -125.0, hw_hi = 275.0;
    hw->add_option("--in", hw_in, "Input raw_hu .rvl1 volume")->required();
    hw->add_option("--lo", hw_lo, "Window low edge in HU (default -125)");
    hw->add_option("--hi", hw_hi, "Window high edge in HU (default +275)");
    hw->add_option("--out-prefix", hw_prefix, "Output path prefix for _NNNN.pgm slices")->required();

    // bench
    auto* be = app.add_subcommand("bench", "Latency benchmark (median of timed runs)");
    std::string be_ckpt, be_shape = "4x256x256", be_out;
    int be_scale = 6, be_runs = 10, be_warmups = 3;
    be->add_option("--checkpoint", be_ckpt, "Checkpoint path")->required();
    be->add_option("--shape", be_shape, "Input LR shape SxHxW (default 4x256x256)");
    be->add_option("--scale", be_scale, "Axial upsampling factor R (must match checkpoint)");
    be->add_option("--runs", be_runs, "Timed runs (default 10)");
    be->add_option("--warmups", be_warmups, "Warmup runs (default 3)");
    be->add_option("--out", be_out, "Optional JSON output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_phantom(gen_size, gen_seed, gen_ell, gen_tubes, gen_smooth, gen_out);
        if (tr->parsed()) {
            tr_seed_set = tr_seed_opt->count() > 0;
            cli::Overrides ov;
            if (tr_seed_set) ov.seed = tr_seed;
            if (tr_det) ov.deterministic = true;
            return cmd_train(tr_config, ov, tr_out);
        }
        if (ev->parsed()) return cmd_eval(ev_ckpt, ev_data, ev_scale, ev_report, ev_baselines, ev_crop, ev_csv);
        if (sy->parsed()) return cmd_synth(sy_ckpt, sy_in, sy_scale, sy_out);
        if (fe->parsed()) return cmd_analyze_freq(fe_ckpt, fe_in, fe_out, fe_csv, fe_rhos);
        if (rd->parsed()) return cmd_analyze_redundancy(rd_ckpt, rd_in, rd_out, rd_csv);
        if (rc->parsed()) return cmd_analyze_receptive(rc_ckpt, rc_module, rc_size, rc_out, rc_csv, rc_seed);
        if (hw->parsed()) return cmd_analyze_hu_window(hw_in, hw_lo, hw_hi, hw_prefix);
        if (be->parsed()) return cmd_bench(be_ckpt, be_shape, be_scale, be_runs, be_warmups, be_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
