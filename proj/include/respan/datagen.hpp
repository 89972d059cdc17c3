#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "respan/tensor.hpp"

namespace respan {

// Synthetic reduced-resolution scenes: a smooth multi-band target, its
// blur/decimate/upsample degradation, and a weighted-sum panchromatic view.
// Bands share bump locations with band-specific amplitudes so per-pixel
// spectra are structured.
struct SceneConfig {
    int size = 32;                    // H = W, must be divisible by scale
    int bands = 4;
    int blobs = 6;
    double blur_sigma = 1.0;
    int scale = 4;
    std::vector<double> pan_weights;  // empty = uniform 1/C
    std::uint64_t seed = 0;
};

struct SceneTriple {
    ImageTensor hrms;  // x_0
    ImageTensor lrms;  // x_T, pre-upsampled back to H x W
    ImageTensor pan;   // y, 1 band
};

// Separable Gaussian blur, kernel truncated at 3 sigma, replicate padding,
// normalized to sum 1 so constants are fixed points.
ImageTensor gaussian_blur(const ImageTensor& img, double sigma);

// Top-left sample of each scale x scale block.
ImageTensor decimate(const ImageTensor& img, int scale);

SceneTriple generate_scene(const SceneConfig& cfg);

// Writes NNN_hrms.mbif / NNN_lrms.mbif / NNN_pan.mbif plus manifest.json.
// Scene seeds derive from cfg.seed and the scene index, so regeneration is
// byte-identical and scenes can be produced in parallel.
void generate_dataset(const std::filesystem::path& dir, int count, const SceneConfig& cfg,
                      int threads = 1);

} // namespace respan
