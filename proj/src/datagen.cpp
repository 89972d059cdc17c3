#include "respan/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "respan/mbif.hpp"
#include "respan/parallel.hpp"

namespace respan {

ImageTensor gaussian_blur(const ImageTensor& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        ksum += v;
    }
    for (auto& v : kernel) v /= ksum;

    const int h = img.height();
    const int w = img.width();
    ImageTensor tmp(img.bands(), h, w);
    for (int c = 0; c < img.bands(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int xx = std::clamp(x + i, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * img.at(c, y, xx);
                }
                tmp.at(c, y, x) = acc;
            }
        }
    }
    ImageTensor out(img.bands(), h, w);
    for (int c = 0; c < img.bands(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int yy = std::clamp(y + i, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(c, yy, x);
                }
                out.at(c, y, x) = acc;
            }
        }
    }
    return out;
}

ImageTensor decimate(const ImageTensor& img, int scale) {
    if (scale < 1) throw std::invalid_argument("decimate: scale must be >= 1");
    if (img.height() % scale != 0 || img.width() % scale != 0) {
        throw std::invalid_argument("decimate: dimensions not divisible by scale");
    }
    ImageTensor out(img.bands(), img.height() / scale, img.width() / scale);
    for (int c = 0; c < img.bands(); ++c) {
        for (int y = 0; y < out.height(); ++y) {
            for (int x = 0; x < out.width(); ++x) {
                out.at(c, y, x) = img.at(c, y * scale, x * scale);
            }
        }
    }
    return out;
}

namespace {

void validate(const SceneConfig& cfg) {
    if (cfg.size < 1 || cfg.bands < 1) throw std::invalid_argument("scene: bad size/bands");
    if (cfg.scale < 1 || cfg.size % cfg.scale != 0) {
        throw std::invalid_argument("scene: size must be divisible by scale");
    }
    if (!cfg.pan_weights.empty()) {
        if (static_cast<int>(cfg.pan_weights.size()) != cfg.bands) {
            throw std::invalid_argument("scene: pan_weights count must equal bands");
        }
        double s = 0.0;
        for (double w : cfg.pan_weights) {
            if (w < 0.0) throw std::invalid_argument("scene: pan_weights must be nonnegative");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-9) {
            throw std::invalid_argument("scene: pan_weights must sum to 1");
        }
    }
    if (cfg.blobs < 0) throw std::invalid_argument("scene: blobs must be >= 0");
}

} // namespace

SceneTriple generate_scene(const SceneConfig& cfg) {
    validate(cfg);
    SeededGaussian rng(cfg.seed);
    const int n = cfg.size;
    const int c = cfg.bands;

    ImageTensor hrms(c, n, n);
    std::vector<double> base(static_cast<std::size_t>(c));
    for (int b = 0; b < c; ++b) base[b] = 0.25 + 0.4 * rng.uniform();

    struct Bump {
        double cx, cy, r;
        std::vector<double> amp;
    };
    std::vector<Bump> bumps;
    for (int k = 0; k < cfg.blobs; ++k) {
        Bump bump;
        bump.cx = rng.uniform() * n;
        bump.cy = rng.uniform() * n;
        bump.r = n / 12.0 + rng.uniform() * (n / 5.0 - n / 12.0);
        bump.amp.resize(static_cast<std::size_t>(c));
        for (int b = 0; b < c; ++b) bump.amp[b] = (rng.uniform() - 0.4) * 0.8;
        bumps.push_back(std::move(bump));
    }

    for (int b = 0; b < c; ++b) {
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                double v = base[b];
                for (const auto& bump : bumps) {
                    const double dx = x - bump.cx;
                    const double dy = y - bump.cy;
                    v += bump.amp[b] * std::exp(-0.5 * (dx * dx + dy * dy) / (bump.r * bump.r));
                }
                hrms.at(b, y, x) = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    ImageTensor pan(1, n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double v = 0.0;
            for (int b = 0; b < c; ++b) {
                const double w = cfg.pan_weights.empty() ? 1.0 / c : cfg.pan_weights[b];
                v += w * hrms.at(b, y, x);
            }
            pan.at(0, y, x) = v;
        }
    }

    ImageTensor lrms =
        upsample_nearest(decimate(gaussian_blur(hrms, cfg.blur_sigma), cfg.scale), cfg.scale);
    return SceneTriple{std::move(hrms), std::move(lrms), std::move(pan)};
}

void generate_dataset(const std::filesystem::path& dir, int count, const SceneConfig& cfg,
                      int threads) {
    validate(cfg);
    if (count < 0) throw std::invalid_argument("generate_dataset: count must be >= 0");
    std::filesystem::create_directories(dir);

    nlohmann::json manifest;
    manifest["count"] = count;
    manifest["config"] = {{"size", cfg.size},       {"bands", cfg.bands},
                          {"blobs", cfg.blobs},     {"blur_sigma", cfg.blur_sigma},
                          {"scale", cfg.scale},     {"seed", cfg.seed}};
    auto files = nlohmann::json::array();
    for (int i = 0; i < count; ++i) {
        char stem[16];
        std::snprintf(stem, sizeof stem, "%03d", i);
        files.push_back({{"hrms", std::string(stem) + "_hrms.mbif"},
                         {"lrms", std::string(stem) + "_lrms.mbif"},
                         {"pan", std::string(stem) + "_pan.mbif"}});
    }
    manifest["files"] = files;

    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
        SceneConfig scene_cfg = cfg;
        scene_cfg.seed = SeededGaussian::derived_seed(cfg.seed, i);
        const SceneTriple triple = generate_scene(scene_cfg);
        const auto& entry = files[i];
        write_mbif(triple.hrms, dir / entry["hrms"].get<std::string>());
        write_mbif(triple.lrms, dir / entry["lrms"].get<std::string>());
        write_mbif(triple.pan, dir / entry["pan"].get<std::string>());
    });

    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << manifest.dump(2) << "\n";
}

} // namespace respan
