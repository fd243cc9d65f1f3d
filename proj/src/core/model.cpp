#include "i3net/model.hpp"

#include <algorithm>

#include "i3net/errors.hpp"

namespace i3net::model {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::inter_only: return "inter_only";
        default: return "plain_conv";
    }
}

Variant variant_from_name(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "inter_only") return Variant::inter_only;
    if (s == "plain_conv") return Variant::plain_conv;
    throw ValidationError("unknown model variant: " + s);
}

void ModelConfig::validate() const {
    if (channels < 4 || channels % 4 != 0)
        throw ValidationError("model: channels must be a positive multiple of 4, got " +
                              std::to_string(channels));
    if (n_blocks < 1) throw ValidationError("model: n_blocks must be >= 1");
    if (window < 1) throw ValidationError("model: window must be >= 1");
    if (s_in < 2) throw ValidationError("model: s_in must be >= 2");
    if (scale < 1) throw ValidationError("model: scale must be >= 1");
    if (token_expansion < 1 || channel_expansion < 1)
        throw ValidationError("model: mixer expansion factors must be >= 1");
    if (!std::is_sorted(cvb_positions.begin(), cvb_positions.end()))
        throw ValidationError("model: cvb_positions must be sorted");
    for (size_t i = 0; i + 1 < cvb_positions.size(); ++i)
        if (cvb_positions[i] == cvb_positions[i + 1])
            throw ValidationError("model: cvb_positions must be unique");
    for (int p : cvb_positions)
        if (p < 1 || p > n_blocks)
            throw ValidationError("model: cvb_positions entries must lie in [1, n_blocks]");
}

} // namespace i3net::model
