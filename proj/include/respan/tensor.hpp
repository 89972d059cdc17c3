#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "respan/rng.hpp"

namespace respan {

// Dense C x H x W raster, planar band-major with row-major bands, so per-band
// kernels stride contiguously. Values are double in memory; the on-disk
// formats quantize to float32 (see mbif.hpp). Treat instances as
// immutable once shared across threads: all free ops return new tensors.
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(int bands, int height, int width);
    ImageTensor(int bands, int height, int width, std::vector<double> data);

    int bands() const { return bands_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }

    double& at(int c, int y, int x) {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }
    double at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<double> band(int c) {
        return std::span<double>(data_).subspan(
            static_cast<std::size_t>(c) * height_ * width_,
            static_cast<std::size_t>(height_) * width_);
    }
    std::span<const double> band(int c) const {
        return std::span<const double>(data_).subspan(
            static_cast<std::size_t>(c) * height_ * width_,
            static_cast<std::size_t>(height_) * width_);
    }

    bool same_shape(const ImageTensor& o) const {
        return bands_ == o.bands_ && height_ == o.height_ && width_ == o.width_;
    }

private:
    int bands_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

// Throws std::invalid_argument naming `what` when shapes differ.
void check_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

ImageTensor add(const ImageTensor& a, const ImageTensor& b);
ImageTensor sub(const ImageTensor& a, const ImageTensor& b);
ImageTensor scale(const ImageTensor& a, double s);
ImageTensor clamp(const ImageTensor& a, double lo, double hi);

double band_mean(const ImageTensor& t, int c);
double band_min(const ImageTensor& t, int c);
double band_max(const ImageTensor& t, int c);
double tensor_min(const ImageTensor& t);
double tensor_max(const ImageTensor& t);
double mse(const ImageTensor& a, const ImageTensor& b);

// Constant-filled tensor.
ImageTensor constant(int bands, int height, int width, double value);

// i.i.d. draws mean + std * xi; always consumes exactly C*H*W normals.
ImageTensor gaussian_field(SeededGaussian& rng, int bands, int height, int width,
                           double mean, double stddev);

// Integer-factor nearest-neighbour upsampling (each pixel repeated factor^2).
ImageTensor upsample_nearest(const ImageTensor& t, int factor);

bool all_finite(const ImageTensor& t);

// Rounds every element through float32, mirroring what the file formats store.
ImageTensor quantize_f32(const ImageTensor& t);

} // namespace respan
