#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "respan/chain.hpp"
#include "respan/tensor.hpp"
#include "respan/wavelet.hpp"

namespace respan {

// Residual predictor f(x_t, c, t): a small convolutional network whose first
// (shallow) layer sees the condition stack concatenated with the chain input,
// followed by a FiLM-style timestep modulation and a few 3x3 blocks.
//
//   h0 = conv3x3(concat(input, cond))           replicate padding
//   (s, b) = W_t * sinusoidal(t / T) + b_t      per hidden channel
//   h1 = silu(h0 * (1 + s) + b)
//   h_{k+1} = silu(conv3x3(h_k))                k = 1..blocks
//   e0_hat = conv3x3(h_blocks)                  linear output
//
// With use_condition off the shallow layer sees only the chain input, and with
// input_is_latent off the chain input is e_t rather than x_t = e_t + x_T.
struct DenoiserConfig {
    int bands = 4;
    int hidden = 32;
    int blocks = 3;
    int emb_dim = 32;           // sinusoidal embedding width, must be even
    bool input_is_latent = true;
    bool use_condition = true;

    int input_channels() const {
        return bands + (use_condition ? 1 + bands + 4 * (bands + 1) : 0);
    }
};

// One named parameter block; shapes are [out, in, 3, 3] for conv kernels,
// [out] for biases, [2*hidden, emb_dim] for the time projection.
struct ParamBlock {
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<double> values;

    std::size_t count() const { return values.size(); }
};

struct DenoiserParams {
    DenoiserConfig cfg;
    std::vector<ParamBlock> blocks;  // fixed order, see init()

    static DenoiserParams init(const DenoiserConfig& cfg, SeededGaussian& rng);
    // Same block layout with all values zero; gradient accumulator.
    DenoiserParams zeros_like() const;

    std::size_t parameter_count() const;
    ParamBlock& block(const std::string& name);
    const ParamBlock& block(const std::string& name) const;
};

// Activations retained for the backward pass.
struct ForwardCache {
    int t = 0;
    std::vector<double> input;      // stacked network input, in_ch x H x W
    std::vector<double> emb;        // sinusoidal embedding
    std::vector<double> h0;         // shallow conv output (pre-FiLM)
    std::vector<double> film;       // FiLM output (pre-activation)
    std::vector<std::vector<double>> block_in;   // activations entering each block conv
    std::vector<std::vector<double>> block_pre;  // block conv outputs (pre-activation)
    std::vector<double> last;       // activation entering the output conv
    int height = 0, width = 0;
};

ImageTensor denoiser_forward(const DenoiserParams& params, const ImageTensor& chain_input,
                             const ConditionSet& cond, int t, int total_steps,
                             ForwardCache* cache = nullptr);

// Parameter gradients for a matching forward cache; grad_out is dLoss/d(e0_hat).
DenoiserParams denoiser_backward(const DenoiserParams& params, const ForwardCache& cache,
                                 const ImageTensor& grad_out);

// Predictor that ignores the network and returns the true residual
// x_0 - x_T (the LRMS inside the condition), for sampler verification.
Predictor oracle_predictor(const ImageTensor& x_0_true);

// Predictor wrapping trained parameters.
Predictor make_predictor(const DenoiserParams& params, int total_steps);

} // namespace respan
