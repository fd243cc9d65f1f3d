#pragma once

#include <string>
#include <vector>

#include "i3net/model.hpp"
#include "i3net/volume.hpp"

namespace i3net::model {

struct SynthFlags {
    bool padded_slices = false;  // lr had fewer than s_in slices
    bool padded_inplane = false; // H or W padded to a multiple of lcm(2, window)
    std::vector<std::string> notes;
};

// Whole-volume inference: slides an s_in-slice window with stride s_in-1
// (consecutive windows share one LR slice), averages overlapping outputs,
// then writes the LR slices back at anchor indices k*R bitwise. In-plane
// dims are symmetric-padded to a multiple of lcm(2, window) when needed and
// cropped back afterward.
vol::Volume synthesize_volume(const vol::Volume& lr, I3Net<float>& net, SynthFlags* flags = nullptr);

} // namespace i3net::model
