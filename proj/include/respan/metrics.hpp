#pragma once

#include "respan/tensor.hpp"

namespace respan {

struct MetricReport {
    double sam_deg = 0.0;
    double ergas = 0.0;
    double scc = 0.0;
    double psnr_db = 0.0;
};

// Mean spectral angle in degrees, cosine clamped to [-1,1]. Pixels where
// either spectral norm is below 1e-8 contribute angle 0 and stay in the
// count; with strict set they raise instead.
double sam(const ImageTensor& pred, const ImageTensor& gt, bool strict = false);

// 100/ratio * sqrt( mean_c (RMSE_c / mean_c(gt))^2 ). A zero-mean band is an
// error naming the band.
double ergas(const ImageTensor& pred, const ImageTensor& gt, double ratio = 4.0);

// Mean over bands of the Pearson correlation between 3x3 Laplacian high-pass
// responses (kernel -1 everywhere, +8 center; replicate padding). A band whose
// filtered response is constant contributes 0 with a warning on stderr.
double scc(const ImageTensor& pred, const ImageTensor& gt);

// 10*log10(1 / MSE) for a unit dynamic range; +infinity when pred == gt.
double psnr(const ImageTensor& pred, const ImageTensor& gt);

MetricReport evaluate(const ImageTensor& pred, const ImageTensor& gt, double ratio = 4.0);

} // namespace respan
