#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "i3net/errors.hpp"
#include "i3net/rng.hpp"

namespace i3net {

// Dense [N, C, H, W] tensor, row-major, value semantics.
template <typename T>
struct Tensor {
    std::array<int, 4> dim{0, 0, 0, 0};
    std::vector<T> v;

    Tensor() = default;
    Tensor(int n, int c, int h, int w) : dim{n, c, h, w}, v(static_cast<size_t>(n) * c * h * w) {}

    static Tensor zeros(int n, int c, int h, int w) { return Tensor(n, c, h, w); }
    static Tensor full(int n, int c, int h, int w, T value) {
        Tensor t(n, c, h, w);
        std::fill(t.v.begin(), t.v.end(), value);
        return t;
    }
    static Tensor random_uniform(int n, int c, int h, int w, Rng& rng, T lo = T(-1), T hi = T(1)) {
        Tensor t(n, c, h, w);
        for (auto& x : t.v) x = static_cast<T>(rng.uniform(double(lo), double(hi)));
        return t;
    }

    int n() const { return dim[0]; }
    int c() const { return dim[1]; }
    int h() const { return dim[2]; }
    int w() const { return dim[3]; }
    size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return dim == o.dim; }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& at(int n_, int c_, int h_, int w_) {
        return v[((static_cast<size_t>(n_) * dim[1] + c_) * dim[2] + h_) * dim[3] + w_];
    }
    const T& at(int n_, int c_, int h_, int w_) const {
        return v[((static_cast<size_t>(n_) * dim[1] + c_) * dim[2] + h_) * dim[3] + w_];
    }

    void fill(T value) { std::fill(v.begin(), v.end(), value); }

    std::string shape_str() const {
        return "[" + std::to_string(dim[0]) + "," + std::to_string(dim[1]) + "," +
               std::to_string(dim[2]) + "," + std::to_string(dim[3]) + "]";
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(dim[0], dim[1], dim[2], dim[3]);
        for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
        return out;
    }
};

template <typename T>
bool all_finite(const Tensor<T>& t) {
    for (T x : t.v)
        if (!std::isfinite(double(x))) return false;
    return true;
}

// Runtime-switchable finite checks (enabled by tests and I3NET_DEBUG_FINITE=1).
bool finite_checks_enabled();
void set_finite_checks(bool on);

template <typename T>
void debug_check_finite(const Tensor<T>& t, const char* where) {
    if (!finite_checks_enabled()) return;
    if (!all_finite(t))
        throw NumericError(std::string("non-finite value after ") + where);
}

} // namespace i3net
