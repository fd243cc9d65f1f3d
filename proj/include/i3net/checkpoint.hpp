#pragma once

// Checkpoint archive (bit-exact, little-endian):
//   bytes 0..3   magic "I3CK"
//   u32  version = 1
//   u32  flags (bit 0: train state present)
//   u32  config_len, then model config JSON (canonical: sorted keys, compact)
//   u32  n_tensors, then per tensor:
//          u16 name_len, name bytes
//          u8  dtype (0 = float32)
//          u8  ndim, u32 dims[ndim]
//          u64 byte_len, little-endian float32 payload
//   if train state: u32 state_len, state JSON
//   u64  FNV-1a hash of every preceding byte
//
// Model parameters use their registry names; when train state is present the
// Adam moments ride along as "opt.m.<name>" / "opt.v.<name>" tensors.

#include <map>
#include <optional>
#include <string>

#include "i3net/model.hpp"
#include "i3net/train.hpp"

namespace i3net::model {

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& json_text);

struct TrainStatePayload {
    std::int64_t step = 0;
    int epoch = 0;
    std::uint64_t seed = 0;
    double best_psnr = 0.0;
    bool best_found = false;
};

void save_checkpoint(const std::string& path, I3Net<float>& net,
                     train::Adam* opt = nullptr, const TrainStatePayload* state = nullptr);

struct LoadedCheckpoint {
    ModelConfig config;
    std::map<std::string, Tensor<float>> tensors; // params and (optionally) opt moments
    std::optional<TrainStatePayload> state;
};

// Verifies magic/version/hash and entry completeness; throws FormatError and
// applies nothing on any defect.
LoadedCheckpoint load_checkpoint(const std::string& path);

// Builds the model and applies parameters; throws on missing/mismatched entries.
I3Net<float> model_from_checkpoint(const LoadedCheckpoint& ck);

// Restores Adam moments into an optimizer built over the model's params.
void apply_optimizer_state(const LoadedCheckpoint& ck, train::Adam& opt);

} // namespace i3net::model
