#include "respan/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace respan {

namespace {

void check_dims(int bands, int height, int width) {
    if (bands < 1 || height < 1 || width < 1) {
        throw std::invalid_argument("ImageTensor: dimensions must be >= 1, got C=" +
                                    std::to_string(bands) + " H=" + std::to_string(height) +
                                    " W=" + std::to_string(width));
    }
}

#ifndef NDEBUG
void debug_assert_finite(const ImageTensor& t) { assert(all_finite(t)); }
#else
void debug_assert_finite(const ImageTensor&) {}
#endif

} // namespace

ImageTensor::ImageTensor(int bands, int height, int width)
    : bands_(bands), height_(height), width_(width) {
    check_dims(bands, height, width);
    data_.assign(static_cast<std::size_t>(bands) * height * width, 0.0);
}

ImageTensor::ImageTensor(int bands, int height, int width, std::vector<double> data)
    : bands_(bands), height_(height), width_(width), data_(std::move(data)) {
    check_dims(bands, height, width);
    const std::size_t expected = static_cast<std::size_t>(bands) * height * width;
    if (data_.size() != expected) {
        throw std::invalid_argument("ImageTensor: payload size " + std::to_string(data_.size()) +
                                    " does not match C*H*W = " + std::to_string(expected));
    }
}

void check_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                    std::to_string(a.bands()) + "x" + std::to_string(a.height()) +
                                    "x" + std::to_string(a.width()) + " vs " +
                                    std::to_string(b.bands()) + "x" + std::to_string(b.height()) +
                                    "x" + std::to_string(b.width()) + ")");
    }
}

ImageTensor add(const ImageTensor& a, const ImageTensor& b) {
    check_same_shape(a, b, "add");
    ImageTensor out(a.bands(), a.height(), a.width());
    const auto pa = a.data();
    const auto pb = b.data();
    auto po = out.data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] + pb[i];
    debug_assert_finite(out);
    return out;
}

ImageTensor sub(const ImageTensor& a, const ImageTensor& b) {
    check_same_shape(a, b, "sub");
    ImageTensor out(a.bands(), a.height(), a.width());
    const auto pa = a.data();
    const auto pb = b.data();
    auto po = out.data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] - pb[i];
    debug_assert_finite(out);
    return out;
}

ImageTensor scale(const ImageTensor& a, double s) {
    ImageTensor out(a.bands(), a.height(), a.width());
    const auto pa = a.data();
    auto po = out.data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] * s;
    debug_assert_finite(out);
    return out;
}

ImageTensor clamp(const ImageTensor& a, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
    ImageTensor out(a.bands(), a.height(), a.width());
    const auto pa = a.data();
    auto po = out.data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = std::clamp(pa[i], lo, hi);
    return out;
}

namespace {
void check_band(const ImageTensor& t, int c) {
    if (c < 0 || c >= t.bands()) {
        throw std::invalid_argument("band index " + std::to_string(c) + " out of range [0," +
                                    std::to_string(t.bands()) + ")");
    }
}
} // namespace

double band_mean(const ImageTensor& t, int c) {
    check_band(t, c);
    double s = 0.0;
    for (double v : t.band(c)) s += v;
    return s / static_cast<double>(t.band(c).size());
}

double band_min(const ImageTensor& t, int c) {
    check_band(t, c);
    double m = std::numeric_limits<double>::infinity();
    for (double v : t.band(c)) m = std::min(m, v);
    return m;
}

double band_max(const ImageTensor& t, int c) {
    check_band(t, c);
    double m = -std::numeric_limits<double>::infinity();
    for (double v : t.band(c)) m = std::max(m, v);
    return m;
}

double tensor_min(const ImageTensor& t) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : t.data()) m = std::min(m, v);
    return m;
}

double tensor_max(const ImageTensor& t) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : t.data()) m = std::max(m, v);
    return m;
}

double mse(const ImageTensor& a, const ImageTensor& b) {
    check_same_shape(a, b, "mse");
    double s = 0.0;
    const auto pa = a.data();
    const auto pb = b.data();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = pa[i] - pb[i];
        s += d * d;
    }
    return s / static_cast<double>(pa.size());
}

ImageTensor constant(int bands, int height, int width, double value) {
    ImageTensor out(bands, height, width);
    for (auto& v : out.data()) v = value;
    return out;
}

ImageTensor gaussian_field(SeededGaussian& rng, int bands, int height, int width,
                           double mean, double stddev) {
    if (stddev < 0.0) throw std::invalid_argument("gaussian_field: stddev must be >= 0");
    ImageTensor out(bands, height, width);
    for (auto& v : out.data()) v = mean + stddev * rng.normal();
    debug_assert_finite(out);
    return out;
}

ImageTensor upsample_nearest(const ImageTensor& t, int factor) {
    if (factor < 1) throw std::invalid_argument("upsample_nearest: factor must be >= 1");
    if (factor == 1) return t;
    ImageTensor out(t.bands(), t.height() * factor, t.width() * factor);
    for (int c = 0; c < t.bands(); ++c) {
        for (int y = 0; y < out.height(); ++y) {
            const int sy = y / factor;
            for (int x = 0; x < out.width(); ++x) {
                out.at(c, y, x) = t.at(c, sy, x / factor);
            }
        }
    }
    return out;
}

bool all_finite(const ImageTensor& t) {
    for (double v : t.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

ImageTensor quantize_f32(const ImageTensor& t) {
    ImageTensor out(t.bands(), t.height(), t.width());
    const auto pi = t.data();
    auto po = out.data();
    for (std::size_t i = 0; i < pi.size(); ++i) po[i] = static_cast<double>(static_cast<float>(pi[i]));
    return out;
}

} // namespace respan
