#pragma once

// Volume persistence (RVL1), intensity normalization, axial downsampling,
// synthetic phantom generation and training-patch sampling.
//
// RVL1 layout (bit-exact, little-endian):
//   bytes 0..3    magic "RVL1"
//   bytes 4..15   uint32 S, H, W
//   bytes 16..39  float64 spacings ds, dh, dw (millimeters)
//   byte  40      uint8 intensity domain (0 = raw_hu, 1 = normalized_unit)
//   bytes 41..47  zero padding
//   then          S*H*W float32, C-order [s][h][w]

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "i3net/rng.hpp"
#include "i3net/tensor.hpp"

namespace i3net::vol {

enum class IntensityDomain : std::uint8_t { raw_hu = 0, normalized_unit = 1 };

struct Volume {
    int s = 0, h = 0, w = 0;
    double ds = 1.0, dh = 1.0, dw = 1.0;
    IntensityDomain domain = IntensityDomain::raw_hu;
    std::vector<float> data; // [s][h][w]

    Volume() = default;
    Volume(int s_, int h_, int w_)
        : s(s_), h(h_), w(w_), data(static_cast<size_t>(s_) * h_ * w_) {}

    float& at(int si, int hi, int wi) {
        return data[(static_cast<size_t>(si) * h + hi) * w + wi];
    }
    const float& at(int si, int hi, int wi) const {
        return data[(static_cast<size_t>(si) * h + hi) * w + wi];
    }
    size_t size() const { return data.size(); }

    // Throws ValidationError on any violated invariant.
    void validate() const;
};

inline constexpr std::size_t kRvl1HeaderSize = 48;

void write_volume(const Volume& v, const std::string& path);
Volume read_volume(const std::string& path);

// clamp((x - lo) / (hi - lo), 0, 1). Defaults cover the CT HU range.
Volume normalize_intensity(const Volume& v, float lo = -1024.0f, float hi = 3071.0f);
// Inverse map back to the raw domain.
Volume denormalize_intensity(const Volume& v, float lo = -1024.0f, float hi = 3071.0f);

// Trims trailing slices so (S-1) % r == 0, then keeps every r-th slice.
// Returns (lr, trimmed hr). lr spacing ds is multiplied by r.
std::pair<Volume, Volume> downsample_axial(const Volume& v, int r);

Volume crop_center(const Volume& v, int crop);

struct PhantomSpec {
    std::uint64_t seed = 0;
    int s = 19, h = 64, w = 64;
    int n_ellipsoids = 10; // #0 is the body envelope, the rest are organ analogs
    int n_tubes = 14;     // vessel analogs: thin, bright, high-frequency
    double background_smoothness = 1.0;
    float tissue_hu = 40.0f;
    float air_hu = -1000.0f;
    float organ_hu_lo = -300.0f, organ_hu_hi = 500.0f;
    float tube_hu_lo = 800.0f, tube_hu_hi = 1500.0f;
};

// Deterministic: identical specs produce bit-identical volumes on any
// platform. The generator draws from the counter-based RNG in a fixed order
// and evaluates voxels with +,-,*,/ and sqrt only.
Volume gen_phantom(const PhantomSpec& spec);

struct PatchPair {
    Tensor<float> lr; // [1, s_in, crop, crop]
    Tensor<float> hr; // [1, (s_in-1)*scale+1, crop, crop]
    int scale = 1;
};

// Random axial window (start uniform), deterministic center crop in-plane.
// lr slice k is a bitwise copy of hr slice k*r.
PatchPair sample_patch(const Volume& hr, int r, int s_in, int crop, Rng& rng);

Tensor<float> volume_to_tensor(const Volume& v);
Volume tensor_to_volume(const Tensor<float>& t, const Volume& like);

} // namespace i3net::vol
