#include "respan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace respan {

namespace {
constexpr double kNormFloor = 1e-8;
}

double sam(const ImageTensor& pred, const ImageTensor& gt, bool strict) {
    check_same_shape(pred, gt, "sam");
    if (pred.bands() < 2) throw std::invalid_argument("sam: needs at least 2 bands");
    const int hw = pred.height() * pred.width();
    const int c = pred.bands();
    double sum_deg = 0.0;
    for (int i = 0; i < hw; ++i) {
        double dot = 0.0, np = 0.0, ng = 0.0;
        for (int b = 0; b < c; ++b) {
            const double p = pred.data()[static_cast<std::size_t>(b) * hw + i];
            const double g = gt.data()[static_cast<std::size_t>(b) * hw + i];
            dot += p * g;
            np += p * p;
            ng += g * g;
        }
        np = std::sqrt(np);
        ng = std::sqrt(ng);
        if (np < kNormFloor || ng < kNormFloor) {
            if (strict) throw std::runtime_error("sam: degenerate (near-zero) spectrum at pixel " +
                                                 std::to_string(i));
            continue;  // contributes angle 0, still counted
        }
        const double cosv = std::clamp(dot / (np * ng), -1.0, 1.0);
        sum_deg += std::acos(cosv) * 180.0 / std::numbers::pi;
    }
    return sum_deg / static_cast<double>(hw);
}

double ergas(const ImageTensor& pred, const ImageTensor& gt, double ratio) {
    check_same_shape(pred, gt, "ergas");
    if (!(ratio > 0.0)) throw std::invalid_argument("ergas: ratio must be > 0");
    double acc = 0.0;
    for (int c = 0; c < gt.bands(); ++c) {
        const double mu = band_mean(gt, c);
        if (mu == 0.0) {
            throw std::runtime_error("ergas: band " + std::to_string(c) + " of the reference has zero mean");
        }
        const auto pp = pred.band(c);
        const auto pg = gt.band(c);
        double se = 0.0;
        for (std::size_t i = 0; i < pp.size(); ++i) {
            const double d = pp[i] - pg[i];
            se += d * d;
        }
        const double rmse = std::sqrt(se / static_cast<double>(pp.size()));
        acc += (rmse / mu) * (rmse / mu);
    }
    return 100.0 / ratio * std::sqrt(acc / static_cast<double>(gt.bands()));
}

namespace {

// 3x3 high-pass response with replicate padding.
std::vector<double> laplacian(const ImageTensor& t, int band) {
    const int h = t.height();
    const int w = t.width();
    std::vector<double> out(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    const double k = (dy == 0 && dx == 0) ? 8.0 : -1.0;
                    acc += k * t.at(band, yy, xx);
                }
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

} // namespace

double scc(const ImageTensor& pred, const ImageTensor& gt) {
    check_same_shape(pred, gt, "scc");
    if (pred.height() < 3 || pred.width() < 3) {
        throw std::invalid_argument("scc: image must be at least 3x3");
    }
    double acc = 0.0;
    for (int c = 0; c < pred.bands(); ++c) {
        const auto hp = laplacian(pred, c);
        const auto hg = laplacian(gt, c);
        const double r = pearson(hp, hg);
        if (std::isnan(r)) {
            std::fprintf(stderr, "scc: band %d has a constant high-pass response, contributes 0\n", c);
            continue;
        }
        acc += r;
    }
    return acc / static_cast<double>(pred.bands());
}

double psnr(const ImageTensor& pred, const ImageTensor& gt) {
    const double m = mse(pred, gt);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

MetricReport evaluate(const ImageTensor& pred, const ImageTensor& gt, double ratio) {
    return MetricReport{sam(pred, gt), ergas(pred, gt, ratio), scc(pred, gt), psnr(pred, gt)};
}

} // namespace respan
