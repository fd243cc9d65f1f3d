#pragma once

// Central finite-difference gradient checker. Runs in float64 regardless of
// the training precision: finite differences at float32 resolution are noise.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "i3net/rng.hpp"

namespace i3net::nn {

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::size_t n_checked = 0;
    std::size_t worst_coord = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::string note;
};

// f: point -> scalar value; analytic_grad: point -> full gradient. Non-finite
// evaluations fail the check with the offending coordinate recorded. When the
// point has more than max_coords coordinates, a seed-deterministic subset is
// checked. Relative error uses a 1e-6 denominator floor.
inline GradCheckReport grad_check(const std::function<double(const std::vector<double>&)>& f,
                                  const std::function<std::vector<double>(const std::vector<double>&)>& analytic_grad,
                                  std::vector<double> x, double tol_rel = 1e-3, double h = 1e-4,
                                  std::size_t max_coords = 512, std::uint64_t seed = 0) {
    GradCheckReport rep;
    std::vector<double> grad = analytic_grad(x);
    if (grad.size() != x.size()) {
        rep.note = "analytic gradient size mismatch";
        return rep;
    }
    std::vector<std::size_t> coords;
    if (x.size() <= max_coords) {
        coords.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) coords[i] = i;
    } else {
        Rng rng(seed, fnv1a64("grad_check"));
        coords.reserve(max_coords);
        for (std::size_t i = 0; i < max_coords; ++i)
            coords.push_back(static_cast<std::size_t>(rng.below(x.size())));
    }
    rep.pass = true;
    for (std::size_t ci : coords) {
        const double orig = x[ci];
        x[ci] = orig + h;
        double fp = f(x);
        x[ci] = orig - h;
        double fm = f(x);
        x[ci] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            rep.pass = false;
            rep.note = "non-finite evaluation at coordinate " + std::to_string(ci);
            return rep;
        }
        const double num = (fp - fm) / (2.0 * h);
        const double ana = grad[ci];
        const double denom = std::max(std::fabs(ana) + std::fabs(num), 1e-6);
        const double rel = std::fabs(ana - num) / denom;
        ++rep.n_checked;
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_coord = ci;
            rep.worst_analytic = ana;
            rep.worst_numeric = num;
        }
    }
    rep.pass = rep.max_rel_err <= tol_rel;
    return rep;
}

} // namespace i3net::nn
