#pragma once

// Run configuration: merged, validated union of model + train + data settings.
// Canonical JSON schema (all keys optional; unknown keys are errors):
//
// {
//   "schema_version": 1,
//   "seed": 0,
//   "deterministic": false,
//   "data": { "train_dir": "", "val_dir": "", "scale": 2, "s_in": 4, "crop": 64,
//             "normalize_lo": -1024.0, "normalize_hi": 3071.0 },
//   "model": { "channels": 32, "n_blocks": 4, "cvb_positions": [2], "window": 16,
//              "variant": "full", "global_residual": true,
//              "token_expansion": 1, "channel_expansion": 1 },
//   "train": { "epochs": 50, "batch_size": 4, "lr0": 3e-4, "beta1": 0.9,
//              "beta2": 0.999, "adam_eps": 1e-8, "grad_clip": 0.0,
//              "patches_per_volume": 1, "checkpoint_interval": 10,
//              "val_interval": 10, "workers": 0 }
// }
//
// Defaults are the desk profile. Paper-scale values (channels 64, 16 blocks,
// cvb_positions [4,8,12], crop 256, 1500 epochs, batch 6) go through the same
// fields.

#include <optional>
#include <string>

#include "i3net/model.hpp"
#include "i3net/train.hpp"

namespace i3net::cli {

struct DataConfig {
    std::string train_dir;
    std::string val_dir;
    int scale = 2;
    int s_in = 4;
    int crop = 64;
    double normalize_lo = -1024.0;
    double normalize_hi = 3071.0;
};

struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 0;
    bool deterministic = false;
    DataConfig data;
    model::ModelConfig model;
    train::TrainConfig train;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<bool> deterministic;
};

RunConfig default_run_config();

// Reads the file (empty path = defaults only), applies CLI overrides, then
// env (I3NET_DETERMINISTIC=1 wins), and validates. All problems — unknown
// keys, type mismatches, range violations — are reported in one aggregated
// ValidationError.
RunConfig parse_config(const std::string& path, const Overrides& overrides);

// Canonical JSON (sorted keys, compact) of the resolved config.
std::string run_config_to_json(const RunConfig& rc);

// FNV-1a hex fingerprint of the canonical form.
std::string config_fingerprint(const RunConfig& rc);

bool deterministic_env_forced();

} // namespace i3net::cli
