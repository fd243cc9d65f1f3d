#include "i3net/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "i3net/errors.hpp"

namespace i3net::vol {

void Volume::validate() const {
    if (s < 2) throw ValidationError("volume: S must be >= 2, got " + std::to_string(s));
    if (h < 8) throw ValidationError("volume: H must be >= 8, got " + std::to_string(h));
    if (w < 8) throw ValidationError("volume: W must be >= 8, got " + std::to_string(w));
    if (!(ds > 0.0) || !(dh > 0.0) || !(dw > 0.0))
        throw ValidationError("volume: spacing components must be strictly positive");
    if (data.size() != static_cast<size_t>(s) * h * w)
        throw ValidationError("volume: payload size does not match dims");
    if (domain == IntensityDomain::normalized_unit) {
        for (float x : data)
            if (!(x >= 0.0f && x <= 1.0f))
                throw ValidationError("volume: normalized_unit voxel outside [0, 1]");
    }
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32(std::uint8_t* p, std::uint32_t x) {
    p[0] = std::uint8_t(x);
    p[1] = std::uint8_t(x >> 8);
    p[2] = std::uint8_t(x >> 16);
    p[3] = std::uint8_t(x >> 24);
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

void put_f64(std::uint8_t* p, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    for (int i = 0; i < 8; ++i) p[i] = std::uint8_t(bits >> (8 * i));
}

double get_f64(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p[i]) << (8 * i);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

bool host_is_little_endian() {
    const std::uint32_t one = 1;
    std::uint8_t b;
    std::memcpy(&b, &one, 1);
    return b == 1;
}

} // namespace

void write_volume(const Volume& v, const std::string& path) {
    v.validate();
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot open for write: " + path);
    std::uint8_t header[kRvl1HeaderSize] = {};
    std::memcpy(header, "RVL1", 4);
    put_u32(header + 4, static_cast<std::uint32_t>(v.s));
    put_u32(header + 8, static_cast<std::uint32_t>(v.h));
    put_u32(header + 12, static_cast<std::uint32_t>(v.w));
    put_f64(header + 16, v.ds);
    put_f64(header + 24, v.dh);
    put_f64(header + 32, v.dw);
    header[40] = static_cast<std::uint8_t>(v.domain);
    if (std::fwrite(header, 1, sizeof header, f.get()) != sizeof header)
        throw IoError("short header write: " + path);
    if (host_is_little_endian()) {
        if (std::fwrite(v.data.data(), 4, v.data.size(), f.get()) != v.data.size())
            throw IoError("short payload write: " + path);
    } else {
        std::vector<std::uint8_t> buf(v.data.size() * 4);
        for (size_t i = 0; i < v.data.size(); ++i) {
            std::uint32_t bits;
            std::memcpy(&bits, &v.data[i], 4);
            put_u32(buf.data() + 4 * i, bits);
        }
        if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size())
            throw IoError("short payload write: " + path);
    }
    if (std::fflush(f.get()) != 0) throw IoError("flush failed: " + path);
}

Volume read_volume(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open: " + path);
    std::uint8_t header[kRvl1HeaderSize];
    if (std::fread(header, 1, sizeof header, f.get()) != sizeof header)
        throw FormatError(path + ": truncated header");
    if (std::memcmp(header, "RVL1", 4) != 0) throw FormatError(path + ": bad magic");
    Volume v;
    v.s = static_cast<int>(get_u32(header + 4));
    v.h = static_cast<int>(get_u32(header + 8));
    v.w = static_cast<int>(get_u32(header + 12));
    if (v.s < 2) throw FormatError(path + ": header field S out of range");
    if (v.h < 8) throw FormatError(path + ": header field H out of range");
    if (v.w < 8) throw FormatError(path + ": header field W out of range");
    v.ds = get_f64(header + 16);
    v.dh = get_f64(header + 24);
    v.dw = get_f64(header + 32);
    if (!(v.ds > 0.0) || !(v.dh > 0.0) || !(v.dw > 0.0))
        throw FormatError(path + ": header field spacing out of range");
    if (header[40] > 1) throw FormatError(path + ": header field intensity_domain out of range");
    v.domain = static_cast<IntensityDomain>(header[40]);
    const size_t count = static_cast<size_t>(v.s) * v.h * v.w;
    v.data.resize(count);
    size_t got;
    if (host_is_little_endian()) {
        got = std::fread(v.data.data(), 4, count, f.get());
    } else {
        std::vector<std::uint8_t> buf(count * 4);
        got = std::fread(buf.data(), 4, count, f.get());
        for (size_t i = 0; i < got; ++i) {
            std::uint32_t bits = get_u32(buf.data() + 4 * i);
            std::memcpy(&v.data[i], &bits, 4);
        }
    }
    if (got != count)
        throw FormatError(path + ": payload length mismatch (header claims " + std::to_string(count) +
                          " voxels, got " + std::to_string(got) + ")");
    std::uint8_t extra;
    if (std::fread(&extra, 1, 1, f.get()) == 1)
        throw FormatError(path + ": payload length mismatch (trailing bytes)");
    v.validate();
    return v;
}

Volume normalize_intensity(const Volume& v, float lo, float hi) {
    if (!(lo < hi)) throw ValidationError("normalize_intensity: lo must be < hi");
    if (v.domain != IntensityDomain::raw_hu)
        throw ValidationError("normalize_intensity: volume is already normalized");
    Volume out = v;
    out.domain = IntensityDomain::normalized_unit;
    const float inv = 1.0f / (hi - lo);
    for (auto& x : out.data) x = std::min(1.0f, std::max(0.0f, (x - lo) * inv));
    return out;
}

Volume denormalize_intensity(const Volume& v, float lo, float hi) {
    if (!(lo < hi)) throw ValidationError("denormalize_intensity: lo must be < hi");
    if (v.domain != IntensityDomain::normalized_unit)
        throw ValidationError("denormalize_intensity: volume is not normalized");
    Volume out = v;
    out.domain = IntensityDomain::raw_hu;
    for (auto& x : out.data) x = x * (hi - lo) + lo;
    return out;
}

std::pair<Volume, Volume> downsample_axial(const Volume& v, int r) {
    if (r < 1) throw ValidationError("downsample_axial: scale must be >= 1");
    int s_hr = v.s - (v.s - 1) % r;
    if (v.s < r + 1 || s_hr < r + 1)
        throw ValidationError("downsample_axial: too few slices (" + std::to_string(v.s) +
                              ") for scale " + std::to_string(r));
    Volume hr = v;
    if (s_hr != v.s) {
        hr.s = s_hr;
        hr.data.resize(static_cast<size_t>(s_hr) * v.h * v.w);
    }
    Volume lr((s_hr - 1) / r + 1, v.h, v.w);
    lr.ds = v.ds * r;
    lr.dh = v.dh;
    lr.dw = v.dw;
    lr.domain = v.domain;
    const size_t plane = static_cast<size_t>(v.h) * v.w;
    for (int k = 0; k < lr.s; ++k)
        std::copy_n(hr.data.begin() + static_cast<size_t>(k) * r * plane, plane,
                    lr.data.begin() + static_cast<size_t>(k) * plane);
    return {std::move(lr), std::move(hr)};
}

Volume crop_center(const Volume& v, int crop) {
    if (crop <= 0 || crop > v.h || crop > v.w)
        throw ValidationError("crop_center: crop must be in [1, min(H, W)]");
    Volume out(v.s, crop, crop);
    out.ds = v.ds;
    out.dh = v.dh;
    out.dw = v.dw;
    out.domain = v.domain;
    const int y0 = (v.h - crop) / 2, x0 = (v.w - crop) / 2;
    for (int s = 0; s < v.s; ++s)
        for (int y = 0; y < crop; ++y)
            std::copy_n(&v.at(s, y0 + y, x0), crop, &out.at(s, y, 0));
    return out;
}

PatchPair sample_patch(const Volume& hr, int r, int s_in, int crop, Rng& rng) {
    if (r < 1) throw ValidationError("sample_patch: scale must be >= 1");
    if (s_in < 2) throw ValidationError("sample_patch: s_in must be >= 2");
    const int span = (s_in - 1) * r + 1;
    if (hr.s < span)
        throw ValidationError("sample_patch: volume has " + std::to_string(hr.s) +
                              " slices, need " + std::to_string(span));
    if (crop > hr.h || crop > hr.w)
        throw ValidationError("sample_patch: crop exceeds in-plane dims");
    if (crop % 16 != 0)
        throw ValidationError("sample_patch: crop must be divisible by 16 (window partition requirement)");
    if (crop % 2 != 0)
        throw ValidationError("sample_patch: crop must be even (shuffle factor)");
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(hr.s - span + 1)));
    const int y0 = (hr.h - crop) / 2, x0 = (hr.w - crop) / 2;
    PatchPair out;
    out.scale = r;
    out.hr = Tensor<float>(1, span, crop, crop);
    out.lr = Tensor<float>(1, s_in, crop, crop);
    for (int j = 0; j < span; ++j)
        for (int y = 0; y < crop; ++y)
            std::copy_n(&hr.at(start + j, y0 + y, x0), crop, &out.hr.at(0, j, y, 0));
    const size_t plane = static_cast<size_t>(crop) * crop;
    for (int k = 0; k < s_in; ++k)
        std::copy_n(out.hr.data() + static_cast<size_t>(k) * r * plane, plane,
                    out.lr.data() + static_cast<size_t>(k) * plane);
    return out;
}

Tensor<float> volume_to_tensor(const Volume& v) {
    Tensor<float> t(1, v.s, v.h, v.w);
    std::copy(v.data.begin(), v.data.end(), t.v.begin());
    return t;
}

Volume tensor_to_volume(const Tensor<float>& t, const Volume& like) {
    Volume v(t.c(), t.h(), t.w());
    v.ds = like.ds;
    v.dh = like.dh;
    v.dw = like.dw;
    v.domain = like.domain;
    std::copy(t.v.begin(), t.v.end(), v.data.begin());
    return v;
}

} // namespace i3net::vol
