#pragma once

#include "respan/tensor.hpp"

namespace respan {

// Every loss reduces by the mean over all elements and reports the analytic
// gradient with respect to the prediction e0_hat. The residual error is
// h = e_0 - e0_hat, so d/d(e0_hat) = -d/dh.
struct LossReport {
    double value = 0.0;
    ImageTensor grad;
};

// Piecewise residual loss on h:
//   |h| < 1 :  |h| + (1 - exp(-|h|))
//   |h| >= 1:  (|h| + a)^2 + b,  a = 1/(2e) - 1/2,  b = 7/4 - 3/(2e) - 1/(4e^2)
// a and b make the two branches C0- and C1-continuous at |h| = 1, and close
// the square so that the loss at |h| = 2 is exactly 4. The subgradient at
// h = 0 is 0.
LossReport residual_loss(const ImageTensor& e0_hat, const ImageTensor& e0);

// mean( relu(e0_hat - max(e0)) + relu(min(e0) - e0_hat) ); extremes are taken
// over the whole target tensor, or per band when per_band is set. Subgradient
// at the clamp kink is 0.
LossReport boundary_penalty(const ImageTensor& e0_hat, const ImageTensor& e0,
                            bool per_band = false);

// residual_loss + gamma * boundary_penalty.
LossReport full_loss(const ImageTensor& e0_hat, const ImageTensor& e0, double gamma);

LossReport l1_loss(const ImageTensor& e0_hat, const ImageTensor& e0);
LossReport l2_loss(const ImageTensor& e0_hat, const ImageTensor& e0);

enum class LossKind { res, l1, l2 };

LossReport base_loss(LossKind kind, const ImageTensor& e0_hat, const ImageTensor& e0);

} // namespace respan
