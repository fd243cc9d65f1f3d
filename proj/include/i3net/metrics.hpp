#pragma once

// Quality metrics on normalized volumes (data range 1.0) and the classical
// axial interpolation baselines.

#include <string>

#include "i3net/volume.hpp"

namespace i3net::eval {

struct PsnrResult {
    double db = 0.0;
    bool infinite = false; // identical inputs; serialized as null + flag
};

// 10 * log10(1 / MSE), float64 accumulation.
PsnrResult psnr(const vol::Volume& pred, const vol::Volume& gt);

enum class View { axial, coronal, sagittal };

const char* view_name(View v);

// Single-scale SSIM (11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// data range 1.0) per 2D slice along the chosen axis, averaged over slices.
// Slices smaller than the window are reflect-padded; *padded reports it.
double ssim_view(const vol::Volume& pred, const vol::Volume& gt, View view, bool* padded = nullptr);

enum class InterpKind { nearest, linear, cubic };

InterpKind interp_kind_from_name(const std::string& s);
const char* interp_kind_name(InterpKind k);

// Axial-only upsampling to (S-1)*r+1 slices. Anchors are copied bitwise for
// every kind. Cubic is piecewise 4-point Lagrange (exact on cubic profiles);
// with S < 4 it falls back to linear and sets *cubic_fallback.
vol::Volume baseline_interp(const vol::Volume& lr, int r, InterpKind kind,
                            bool* cubic_fallback = nullptr);

} // namespace i3net::eval
