#pragma once

#include <functional>

#include "respan/schedule.hpp"
#include "respan/tensor.hpp"
#include "respan/wavelet.hpp"

namespace respan {

// Residual Markov chain. The generated quantity is the residual
// e_0 = x_0 - x_T between the fused target and the pre-upsampled input; the
// latent state x_t = e_t + x_T carries full-image information at every step.
//
// Transition:   e_t | e_{t-1} ~ N(e_{t-1} - alpha_t * e_0, kappa^2 alpha_t)
// Marginal:     e_t | e_0     ~ N((1 - abar_t) e_0,        kappa^2 abar_t)
// Posterior:    e_{t-1} | e_t, e_0 ~
//   N( (abar_{t-1}/abar_t) e_t + (alpha_t/abar_t) e_0,
//      kappa^2 (abar_{t-1}/abar_t) alpha_t )
// With abar_0 = 0 the t = 1 posterior is deterministic at e_0.

struct ChainState {
    int t = 0;
    ImageTensor e_t;
    ImageTensor x_t;  // e_t + x_T at all times
};

struct PosteriorParams {
    ImageTensor mean;
    double stddev = 0.0;  // scalar, shared by every element
};

using Predictor =
    std::function<ImageTensor(const ImageTensor& x_t, const ConditionSet& cond, int t)>;

ImageTensor forward_step(const ImageTensor& e_prev, const ImageTensor& e_0, int t,
                         const ScheduleTable& tab, SeededGaussian& rng);

ImageTensor forward_marginal(const ImageTensor& e_0, int t, const ScheduleTable& tab,
                             SeededGaussian& rng);

PosteriorParams posterior(const ImageTensor& e_t, const ImageTensor& e_0_hat, int t,
                          const ScheduleTable& tab);

struct TrainingSample {
    int t = 0;
    ImageTensor e_t;
    ImageTensor x_t;
    ImageTensor e_0;
};

// One training draw: t uniform on {1..T}, e_t from the marginal, x_t = e_t + x_T.
TrainingSample make_training_sample(const ImageTensor& x_0, const ImageTensor& x_T,
                                    const ScheduleTable& tab, SeededGaussian& rng);

struct SampleResult {
    ImageTensor x_0_hat;  // clamped to [0,1]
    ImageTensor e_0_hat;  // raw residual from the final (deterministic) step
    int predictor_calls = 0;
};

// Full reverse chain: e_T ~ N(0, kappa^2), then T posterior steps, exactly one
// predictor call per step. The [0,1] clamp is applied once to the final image.
SampleResult sample(const ImageTensor& x_T, const ConditionSet& cond, const Predictor& predictor,
                    const ScheduleTable& tab, SeededGaussian& rng);

} // namespace respan
