#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "retex/errors.hpp"
#include "retex/rng.hpp"

namespace retex {

// Row-major interleaved image buffer. Pixel (x, y) starts at
// data[(y * width + x) * channels]; row 0 is the top scanline.
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, int c, T fill = T(0))
        : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

    T* px(int x, int y) { return data.data() + (static_cast<size_t>(y) * width + x) * channels; }
    const T* px(int x, int y) const {
        return data.data() + (static_cast<size_t>(y) * width + x) * channels;
    }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    template <typename U>
    Image<U> cast() const {
        Image<U> out(width, height, channels);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

    void clamp01() {
        for (T& v : data) v = std::clamp(v, T(0), T(1));
    }
};

using ImageF = Image<float>;
using ImageD = Image<double>;

inline void require_same_shape(const ImageF& a, const ImageF& b, const char* what) {
    if (!a.same_shape(b)) throw ShapeMismatch(std::string(what) + ": image shapes differ");
}

// Nearest-pixel sample at continuous screen position (sx, sy), where pixel
// (i, j) spans [i, i+1) x [j, j+1). Coordinates are clamped to the image.
template <typename T>
inline const T* sample_nearest(const Image<T>& img, double sx, double sy) {
    int x = std::clamp(static_cast<int>(std::floor(sx)), 0, img.width - 1);
    int y = std::clamp(static_cast<int>(std::floor(sy)), 0, img.height - 1);
    return img.px(x, y);
}

// Bilinear sample at continuous screen position, interpolating between the
// four pixel centers surrounding it. Border pixels clamp.
template <typename T>
inline void sample_bilinear(const Image<T>& img, double sx, double sy, T* out) {
    double fx = sx - 0.5, fy = sy - 0.5;
    int x0 = static_cast<int>(std::floor(fx));
    int y0 = static_cast<int>(std::floor(fy));
    double tx = fx - x0, ty = fy - y0;
    int x1 = std::clamp(x0 + 1, 0, img.width - 1);
    int y1 = std::clamp(y0 + 1, 0, img.height - 1);
    x0 = std::clamp(x0, 0, img.width - 1);
    y0 = std::clamp(y0, 0, img.height - 1);
    const T* p00 = img.px(x0, y0);
    const T* p10 = img.px(x1, y0);
    const T* p01 = img.px(x0, y1);
    const T* p11 = img.px(x1, y1);
    for (int c = 0; c < img.channels; ++c) {
        double top = p00[c] * (1.0 - tx) + p10[c] * tx;
        double bot = p01[c] * (1.0 - tx) + p11[c] * tx;
        out[c] = static_cast<T>(top * (1.0 - ty) + bot * ty);
    }
}

// Image of i.i.d. standard normal draws, filled in row-major order.
template <typename T>
inline Image<T> gaussian_image(int w, int h, int c, Rng& rng) {
    Image<T> out(w, h, c);
    for (auto& v : out.data) v = static_cast<T>(rng.normal());
    return out;
}

inline double mean_abs_diff(const ImageF& a, const ImageF& b) {
    assert(a.same_shape(b));
    if (a.data.empty()) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += std::fabs(double(a.data[i]) - double(b.data[i]));
    return s / static_cast<double>(a.data.size());
}

inline double max_abs_diff(const ImageF& a, const ImageF& b) {
    assert(a.same_shape(b));
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(double(a.data[i]) - double(b.data[i])));
    return m;
}

}  // namespace retex
