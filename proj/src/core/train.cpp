#include "i3net/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "i3net/checkpoint.hpp"
#include "i3net/errors.hpp"
#include "i3net/kernels.hpp"
#include "i3net/metrics.hpp"
#include "i3net/synthesize.hpp"

namespace i3net::train {

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (!(lr0 > 0.0)) throw ValidationError("train: lr0 must be > 0");
    if (patches_per_volume < 1) throw ValidationError("train: patches_per_volume must be >= 1");
    if (grad_clip < 0.0) throw ValidationError("train: grad_clip must be >= 0");
    if (crop < 2) throw ValidationError("train: crop must be >= 2");
    if (checkpoint_interval < 0 || val_interval < 0 || workers < 0)
        throw ValidationError("train: intervals and workers must be >= 0");
}

double lr_at(std::int64_t step, std::int64_t total_steps, double lr0) {
    if (total_steps <= 0) return lr0;
    if (step < 0) throw ValidationError("lr_at: negative step");
    if (step >= total_steps) return 0.0;
    const double pi = 3.14159265358979323846;
    return lr0 * 0.5 * (1.0 + std::cos(pi * static_cast<double>(step) / static_cast<double>(total_steps)));
}

double l1_loss(const Tensor<float>& pred, const Tensor<float>& target) {
    if (!pred.same_shape(target))
        throw ValidationError("l1_loss: shape mismatch " + pred.shape_str() + " vs " + target.shape_str());
    return kernels::sabs_err(pred.size(), pred.data(), target.data()) / static_cast<double>(pred.size());
}

void l1_loss_grad(const Tensor<float>& pred, const Tensor<float>& target, Tensor<float>& dpred) {
    if (!pred.same_shape(target)) throw ValidationError("l1_loss_grad: shape mismatch");
    dpred = Tensor<float>(pred.dim[0], pred.dim[1], pred.dim[2], pred.dim[3]);
    kernels::sl1_grad(pred.size(), pred.data(), target.data(),
                      1.0f / static_cast<float>(pred.size()), dpred.data());
}

Adam::Adam(std::vector<model::ParamRef<float>> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto& p : params_) {
        m_.emplace_back(p.value->dim[0], p.value->dim[1], p.value->dim[2], p.value->dim[3]);
        v_.emplace_back(p.value->dim[0], p.value->dim[1], p.value->dim[2], p.value->dim[3]);
    }
}

void Adam::step(double lr) {
    ++t_;
    const float bc1 = 1.0f - static_cast<float>(std::pow(beta1_, static_cast<double>(t_)));
    const float bc2 = 1.0f - static_cast<float>(std::pow(beta2_, static_cast<double>(t_)));
    for (size_t i = 0; i < params_.size(); ++i) {
        kernels::sadam_step(params_[i].value->size(), params_[i].value->data(),
                            params_[i].grad->data(), m_[i].data(), v_[i].data(),
                            static_cast<float>(lr), static_cast<float>(beta1_),
                            static_cast<float>(beta2_), static_cast<float>(eps_), bc1, bc2);
    }
}

Trainer::Trainer(model::I3Net<float>& net, const TrainConfig& cfg)
    : net_(net), cfg_(cfg), opt_(net.params(), cfg.beta1, cfg.beta2, cfg.adam_eps) {
    cfg_.validate();
}

void Trainer::restore_progress(std::int64_t step, int epoch, double best_psnr, bool best_found) {
    step_ = step;
    epoch_ = epoch;
    best_psnr_ = best_psnr;
    best_found_ = best_found;
    opt_.set_step_count(step);
}

double Trainer::validate_psnr(const std::vector<vol::Volume>& val_set) {
    double sum = 0.0;
    int n = 0;
    for (const auto& hr : val_set) {
        auto [lr, hr_trim] = vol::downsample_axial(hr, net_.cfg.scale);
        vol::Volume pred = synthesize_volume(lr, net_);
        auto p = eval::psnr(pred, hr_trim);
        if (!p.infinite) {
            sum += p.db;
            ++n;
        }
    }
    return n > 0 ? sum / n : std::numeric_limits<double>::infinity();
}

void Trainer::run(const std::vector<vol::Volume>& train_set, const std::vector<vol::Volume>& val_set,
                  const std::string& out_dir, std::ostream* log, int stop_after_epoch) {
    if (train_set.empty()) throw ValidationError("train: dataset is empty");
    for (const auto& v : train_set)
        if (v.domain != vol::IntensityDomain::normalized_unit)
            throw ValidationError("train: all volumes must be normalized");

    const std::int64_t patches_per_epoch =
        static_cast<std::int64_t>(train_set.size()) * cfg_.patches_per_volume;
    const std::int64_t steps_per_epoch = (patches_per_epoch + cfg_.batch_size - 1) / cfg_.batch_size;
    const std::int64_t total_steps = steps_per_epoch * cfg_.epochs;
    const bool guard = finite_checks_enabled();

    net_.training = true;
    Rng root(cfg_.seed, fnv1a64("train"));

    const int epoch_end = stop_after_epoch < 0 ? cfg_.epochs : std::min(cfg_.epochs, stop_after_epoch);
    for (; epoch_ < epoch_end; ++epoch_) {
        // Patch k of this epoch comes from volume order[k / ppv]; both the
        // shuffle and the patch rng are pure functions of (seed, epoch, k),
        // independent of worker scheduling.
        std::vector<int> order(train_set.size());
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = root.stream("shuffle").stream(static_cast<std::uint64_t>(epoch_));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        for (std::int64_t b = 0; b < steps_per_epoch; ++b) {
            const std::int64_t lo = b * cfg_.batch_size;
            const std::int64_t hi = std::min(lo + cfg_.batch_size, patches_per_epoch);
            const int bs = static_cast<int>(hi - lo);

            Tensor<float> lr_batch, hr_batch;
            for (int i = 0; i < bs; ++i) {
                const std::int64_t k = lo + i;
                const int vi = order[static_cast<size_t>(k / cfg_.patches_per_volume)];
                Rng patch_rng = root.stream("patch")
                                    .stream(static_cast<std::uint64_t>(epoch_))
                                    .stream(static_cast<std::uint64_t>(k));
                vol::PatchPair pp = vol::sample_patch(train_set[static_cast<size_t>(vi)],
                                                      net_.cfg.scale, net_.cfg.s_in, cfg_.crop,
                                                      patch_rng);
                if (i == 0) {
                    lr_batch = Tensor<float>(bs, pp.lr.c(), pp.lr.h(), pp.lr.w());
                    hr_batch = Tensor<float>(bs, pp.hr.c(), pp.hr.h(), pp.hr.w());
                }
                std::copy(pp.lr.v.begin(), pp.lr.v.end(),
                          lr_batch.v.begin() + static_cast<size_t>(i) * pp.lr.size());
                std::copy(pp.hr.v.begin(), pp.hr.v.end(),
                          hr_batch.v.begin() + static_cast<size_t>(i) * pp.hr.size());
            }

            net_.zero_grad();
            Tensor<float> pred = net_.forward(lr_batch);
            const double loss = l1_loss(pred, hr_batch);
            const double lr_now = lr_at(step_, total_steps, cfg_.lr0);
            if (!std::isfinite(loss)) {
                double gnorm = 0.0;
                for (auto& p : net_.params())
                    for (float g : p.grad->v) gnorm += double(g) * g;
                throw NumericError("train: non-finite loss at step " + std::to_string(step_) +
                                   " (lr " + std::to_string(lr_now) + ", grad norm " +
                                   std::to_string(std::sqrt(gnorm)) + ")");
            }
            Tensor<float> dpred;
            l1_loss_grad(pred, hr_batch, dpred);
            net_.backward(dpred);

            if (cfg_.grad_clip > 0.0) {
                double gsq = 0.0;
                for (auto& p : net_.params())
                    for (float g : p.grad->v) gsq += double(g) * g;
                const double gnorm = std::sqrt(gsq);
                if (gnorm > cfg_.grad_clip) {
                    const float scale = static_cast<float>(cfg_.grad_clip / gnorm);
                    for (auto& p : net_.params())
                        kernels::sscale(p.grad->size(), scale, p.grad->data());
                }
            }
            if (guard) {
                for (auto& p : net_.params())
                    if (!all_finite(*p.grad))
                        throw NumericError("train: non-finite gradient for " + p.name +
                                           " at step " + std::to_string(step_));
            }

            opt_.step(lr_now);
            if (guard) {
                for (auto& p : net_.params())
                    if (!all_finite(*p.value))
                        throw NumericError("train: non-finite parameter " + p.name +
                                           " after step " + std::to_string(step_));
            }
            history_.loss.push_back(loss);
            ++step_;
        }

        const bool last_epoch = epoch_ + 1 == cfg_.epochs;
        if (cfg_.val_interval > 0 && !val_set.empty() &&
            ((epoch_ + 1) % cfg_.val_interval == 0 || last_epoch)) {
            const double v = validate_psnr(val_set);
            history_.val_psnr.emplace_back(epoch_ + 1, v);
            if (log) (*log) << "epoch " << epoch_ + 1 << " val_psnr " << v << "\n";
            if (!best_found_ || v > best_psnr_) {
                best_psnr_ = v;
                best_found_ = true;
                if (!out_dir.empty()) {
                    model::TrainStatePayload st{step_, epoch_ + 1, cfg_.seed, best_psnr_, best_found_};
                    model::save_checkpoint(out_dir + "/best.i3ck", net_, &opt_, &st);
                }
            }
        }
        if (!out_dir.empty() && ((cfg_.checkpoint_interval > 0 &&
                                  (epoch_ + 1) % cfg_.checkpoint_interval == 0) ||
                                 last_epoch)) {
            model::TrainStatePayload st{step_, epoch_ + 1, cfg_.seed, best_psnr_, best_found_};
            model::save_checkpoint(out_dir + "/last.i3ck", net_, &opt_, &st);
        }
        if (log && (epoch_ + 1) % std::max(1, cfg_.epochs / 20) == 0) {
            (*log) << "epoch " << epoch_ + 1 << "/" << cfg_.epochs << " loss "
                   << history_.loss.back() << " lr " << lr_at(step_, total_steps, cfg_.lr0) << "\n";
        }
    }
}

} // namespace i3net::train
