#include <algorithm>
#include <cmath>

#include "i3net/errors.hpp"
#include "i3net/volume.hpp"

// Synthetic CT-like phantom: smooth value-noise background over soft tissue,
// an ellipsoidal body envelope surrounded by air, ellipsoidal organ analogs,
// and thin bright tubes for high-frequency content. All randomness is drawn
// up front in a fixed order; voxel evaluation uses only exact IEEE ops
// (+,-,*,/,sqrt and polynomial smoothstep), so volumes are bit-identical
// across platforms for a given spec.

namespace i3net::vol {

namespace {

struct Ellipsoid {
    double cz, cy, cx;
    double inv_az2, inv_ay2, inv_ax2;
    double hu;
    double edge; // softness of the boundary in quadric units
};

struct Tube {
    double z0, y0, x0;
    double dz, dy, dx; // segment direction (not normalized)
    double len2;
    double radius;
    double hu;
};

double smoothstep01(double t) {
    t = std::min(1.0, std::max(0.0, t));
    return t * t * (3.0 - 2.0 * t);
}

} // namespace

Volume gen_phantom(const PhantomSpec& spec) {
    if (spec.s <= 0 || spec.h <= 0 || spec.w <= 0)
        throw ValidationError("gen_phantom: zero-size dims");
    if (spec.n_ellipsoids < 0 || spec.n_tubes < 0)
        throw ValidationError("gen_phantom: negative structure count");
    Volume v(spec.s, spec.h, spec.w);
    v.ds = 3.0;
    v.dh = 0.7;
    v.dw = 0.7;
    v.domain = IntensityDomain::raw_hu;
    v.validate();

    Rng root(spec.seed, fnv1a64("phantom"));

    // Background value-noise grid, smoothstep-interpolated.
    const double noise_amp = 56.0 / (1.0 + 0.25 * spec.background_smoothness);
    const int cell_s = 4, cell_p = 8;
    const int gs = spec.s / cell_s + 2, gh = spec.h / cell_p + 2, gw = spec.w / cell_p + 2;
    std::vector<double> grid(static_cast<size_t>(gs) * gh * gw);
    {
        Rng noise_rng = root.stream("noise");
        for (auto& g : grid) g = noise_rng.uniform(-1.0, 1.0);
    }
    auto grid_at = [&](int z, int y, int x) {
        return grid[(static_cast<size_t>(z) * gh + y) * gw + x];
    };

    std::vector<Ellipsoid> ells;
    {
        Rng er = root.stream("ellipsoids");
        for (int i = 0; i < spec.n_ellipsoids; ++i) {
            Ellipsoid e;
            if (i == 0) {
                // Body envelope; the axial semi-axis is short enough that the
                // high-contrast skin rim visibly moves between slices.
                e.cz = 0.5 * spec.s;
                e.cy = 0.5 * spec.h * er.uniform(0.96, 1.04);
                e.cx = 0.5 * spec.w * er.uniform(0.96, 1.04);
                double az = 0.85 * spec.s;
                double ay = 0.42 * spec.h * er.uniform(0.9, 1.05);
                double ax = 0.45 * spec.w * er.uniform(0.9, 1.05);
                e.inv_az2 = 1.0 / (az * az);
                e.inv_ay2 = 1.0 / (ay * ay);
                e.inv_ax2 = 1.0 / (ax * ax);
                e.hu = 0.0; // body keeps the background value; outside is air
                e.edge = 0.08;
            } else {
                e.cz = spec.s * er.uniform(0.25, 0.75);
                e.cy = spec.h * er.uniform(0.3, 0.7);
                e.cx = spec.w * er.uniform(0.3, 0.7);
                double az = spec.s * er.uniform(0.10, 0.28);
                double ay = spec.h * er.uniform(0.06, 0.2);
                double ax = spec.w * er.uniform(0.06, 0.2);
                e.inv_az2 = 1.0 / (az * az);
                e.inv_ay2 = 1.0 / (ay * ay);
                e.inv_ax2 = 1.0 / (ax * ax);
                e.hu = er.uniform(spec.organ_hu_lo, spec.organ_hu_hi);
                e.edge = 0.05;
            }
            ells.push_back(e);
        }
    }

    std::vector<Tube> tubes;
    {
        Rng tr = root.stream("tubes");
        for (int i = 0; i < spec.n_tubes; ++i) {
            Tube t;
            // Long axial spans with independent in-plane endpoints: tilted
            // vessels whose cross-sections travel between adjacent slices.
            t.z0 = spec.s * tr.uniform(0.05, 0.3);
            t.y0 = spec.h * tr.uniform(0.2, 0.8);
            t.x0 = spec.w * tr.uniform(0.2, 0.8);
            double z1 = spec.s * tr.uniform(0.7, 0.95);
            double y1 = spec.h * tr.uniform(0.2, 0.8);
            double x1 = spec.w * tr.uniform(0.2, 0.8);
            t.dz = z1 - t.z0;
            t.dy = y1 - t.y0;
            t.dx = x1 - t.x0;
            t.len2 = t.dz * t.dz + t.dy * t.dy + t.dx * t.dx;
            t.radius = tr.uniform(0.8, 2.0);
            t.hu = tr.uniform(spec.tube_hu_lo, spec.tube_hu_hi);
            tubes.push_back(t);
        }
    }

    const double inv_cs = 1.0 / cell_s, inv_cp = 1.0 / cell_p;
    for (int z = 0; z < spec.s; ++z) {
        const double gz = z * inv_cs;
        const int z0 = static_cast<int>(gz);
        const double tz = smoothstep01(gz - z0);
        for (int y = 0; y < spec.h; ++y) {
            const double gy = y * inv_cp;
            const int y0 = static_cast<int>(gy);
            const double ty = smoothstep01(gy - y0);
            for (int x = 0; x < spec.w; ++x) {
                const double gx = x * inv_cp;
                const int x0 = static_cast<int>(gx);
                const double tx = smoothstep01(gx - x0);
                const double n00 = grid_at(z0, y0, x0) + tx * (grid_at(z0, y0, x0 + 1) - grid_at(z0, y0, x0));
                const double n01 = grid_at(z0, y0 + 1, x0) + tx * (grid_at(z0, y0 + 1, x0 + 1) - grid_at(z0, y0 + 1, x0));
                const double n10 = grid_at(z0 + 1, y0, x0) + tx * (grid_at(z0 + 1, y0, x0 + 1) - grid_at(z0 + 1, y0, x0));
                const double n11 = grid_at(z0 + 1, y0 + 1, x0) + tx * (grid_at(z0 + 1, y0 + 1, x0 + 1) - grid_at(z0 + 1, y0 + 1, x0));
                const double n0 = n00 + ty * (n01 - n00);
                const double n1 = n10 + ty * (n11 - n10);
                const double noise = n0 + tz * (n1 - n0);

                double val = spec.tissue_hu + noise_amp * noise;

                for (size_t i = 0; i < ells.size(); ++i) {
                    const Ellipsoid& e = ells[i];
                    const double dz = z - e.cz, dy = y - e.cy, dx = x - e.cx;
                    const double q = dz * dz * e.inv_az2 + dy * dy * e.inv_ay2 + dx * dx * e.inv_ax2;
                    const double wgt = smoothstep01((1.0 - q) / e.edge);
                    if (i == 0) {
                        val = spec.air_hu + (val - spec.air_hu) * wgt;
                    } else if (wgt > 0.0) {
                        val += (e.hu - val) * wgt;
                    }
                }

                for (const Tube& t : tubes) {
                    const double pz = z - t.z0, py = y - t.y0, px = x - t.x0;
                    double u = t.len2 > 0.0 ? (pz * t.dz + py * t.dy + px * t.dx) / t.len2 : 0.0;
                    u = std::min(1.0, std::max(0.0, u));
                    const double rz = pz - u * t.dz, ry = py - u * t.dy, rx = px - u * t.dx;
                    const double d = std::sqrt(rz * rz + ry * ry + rx * rx);
                    const double wgt = smoothstep01((t.radius - d) / 0.8 + 1.0);
                    if (wgt > 0.0) val += (t.hu - val) * wgt;
                }

                v.at(z, y, x) = static_cast<float>(val);
            }
        }
    }
    return v;
}

} // namespace i3net::vol
