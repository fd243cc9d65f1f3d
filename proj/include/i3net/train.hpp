#pragma once

// Optimization loop: L1 objective, Adam with single-cycle cosine decay (no
// warmup), one random patch per training volume per epoch, deterministic
// counter-based sampling, checkpointing.

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "i3net/model.hpp"
#include "i3net/volume.hpp"

namespace i3net::train {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 4;
    double lr0 = 3e-4;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double grad_clip = 0.0; // global-norm clip; 0 disables
    int patches_per_volume = 1;
    int checkpoint_interval = 10; // epochs; 0 disables periodic checkpoints
    int val_interval = 10;        // epochs; 0 disables validation
    int crop = 64;
    int workers = 0;
    std::uint64_t seed = 0;
    bool deterministic = true;

    void validate() const;
};

// lr0 * 0.5 * (1 + cos(pi * step / total)); clamps past the end.
double lr_at(std::int64_t step, std::int64_t total_steps, double lr0);

// Mean absolute error (float64 accumulation).
double l1_loss(const Tensor<float>& pred, const Tensor<float>& target);
// dpred = sign(pred - target) / count
void l1_loss_grad(const Tensor<float>& pred, const Tensor<float>& target, Tensor<float>& dpred);

class Adam {
public:
    Adam(std::vector<model::ParamRef<float>> params, double beta1, double beta2, double eps);

    void step(double lr); // consumes grads stored in the parameter refs
    std::int64_t step_count() const { return t_; }

    std::vector<model::ParamRef<float>>& params() { return params_; }
    std::vector<Tensor<float>>& moments_m() { return m_; }
    std::vector<Tensor<float>>& moments_v() { return v_; }
    void set_step_count(std::int64_t t) { t_ = t; }

private:
    std::vector<model::ParamRef<float>> params_;
    std::vector<Tensor<float>> m_, v_;
    double beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
};

struct TrainHistory {
    std::vector<double> loss;                      // one entry per optimizer step
    std::vector<std::pair<int, double>> val_psnr;  // (epoch, mean PSNR)
};

class Trainer {
public:
    Trainer(model::I3Net<float>& net, const TrainConfig& cfg);

    // Runs epochs [epoch(), cfg.epochs). Checkpoints into out_dir when set
    // ("last.i3ck" each interval, "best.i3ck" on validation improvement).
    // stop_after_epoch pauses a run mid-horizon (the schedule still spans
    // cfg.epochs); resume by restoring progress and calling run again.
    void run(const std::vector<vol::Volume>& train_set, const std::vector<vol::Volume>& val_set,
             const std::string& out_dir = "", std::ostream* log = nullptr,
             int stop_after_epoch = -1);

    model::I3Net<float>& net() { return net_; }
    Adam& optimizer() { return opt_; }
    TrainHistory& history() { return history_; }
    std::int64_t global_step() const { return step_; }
    int epoch() const { return epoch_; }
    double best_psnr() const { return best_psnr_; }
    bool best_found() const { return best_found_; }

    void restore_progress(std::int64_t step, int epoch, double best_psnr, bool best_found);

    // Validation metric: mean PSNR of synthesized volumes against ground truth.
    double validate_psnr(const std::vector<vol::Volume>& val_set);

private:
    model::I3Net<float>& net_;
    TrainConfig cfg_;
    Adam opt_;
    TrainHistory history_;
    std::int64_t step_ = 0;
    int epoch_ = 0;
    double best_psnr_ = 0.0;
    bool best_found_ = false;
};

} // namespace i3net::train
