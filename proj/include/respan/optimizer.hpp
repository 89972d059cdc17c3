#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "respan/denoiser.hpp"

namespace respan {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
};

// Decoupled weight decay:
//   m <- b1 m + (1-b1) g          v <- b2 v + (1-b2) g^2
//   w <- w - lr * mhat / (sqrt(vhat) + eps) - lr * wd * w
// with the usual 1/(1 - b^step) bias correction. Moment buffers are laid out
// per block on the first step; the block structure must not change afterwards.
class AdamW {
public:
    explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

    void step(std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads);
    void step(DenoiserParams& params, const DenoiserParams& grads);

    std::int64_t step_count() const { return step_; }
    const AdamWConfig& config() const { return cfg_; }

private:
    AdamWConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace respan
