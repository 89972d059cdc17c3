#include "respan/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace respan {

namespace {

double silu(double z) { return z / (1.0 + std::exp(-z)); }

double silu_grad(double z) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

// Sinusoidal features of t / T: half sines, half cosines, frequencies
// log-spaced from 1 to 1e4.
std::vector<double> time_embedding(int t, int total_steps, int emb_dim) {
    const int half = emb_dim / 2;
    const double tau = static_cast<double>(t) / static_cast<double>(total_steps);
    std::vector<double> emb(static_cast<std::size_t>(emb_dim));
    for (int i = 0; i < half; ++i) {
        const double expo = half > 1 ? static_cast<double>(i) / (half - 1) : 0.0;
        const double freq = std::pow(10000.0, expo);
        emb[static_cast<std::size_t>(i)] = std::sin(tau * freq);
        emb[static_cast<std::size_t>(half + i)] = std::cos(tau * freq);
    }
    return emb;
}

// out[oc] = bias[oc] + sum_ic conv3x3(in[ic]); replicate padding.
void conv3x3_forward(const double* in, int in_ch, int h, int w, const double* kw,
                     const double* kb, int out_ch, double* out) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int oc = 0; oc < out_ch; ++oc) {
        double* op = out + static_cast<std::size_t>(oc) * plane;
        std::fill(op, op + plane, kb[oc]);
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* ip = in + static_cast<std::size_t>(ic) * plane;
            const double* kk = kw + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double kval = kk[(dy + 1) * 3 + (dx + 1)];
                    if (kval == 0.0) continue;
                    for (int y = 0; y < h; ++y) {
                        const int yy = std::clamp(y + dy, 0, h - 1);
                        const double* irow = ip + static_cast<std::size_t>(yy) * w;
                        double* orow = op + static_cast<std::size_t>(y) * w;
                        // interior of the row is a plain shifted add
                        int x = 0;
                        for (; x < (dx > 0 ? 0 : -dx); ++x) {
                            orow[x] += kval * irow[std::clamp(x + dx, 0, w - 1)];
                        }
                        const int x_end = dx < 0 ? w : w - dx;
                        for (; x < x_end; ++x) orow[x] += kval * irow[x + dx];
                        for (; x < w; ++x) orow[x] += kval * irow[w - 1];
                    }
                }
            }
        }
    }
}

// Gradients of conv3x3_forward: accumulates into gkw/gkb, and into gin when
// non-null, mirroring the clamped reads of the forward pass.
void conv3x3_backward(const double* in, int in_ch, int h, int w, const double* kw, int out_ch,
                      const double* gout, double* gkw, double* gkb, double* gin) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int oc = 0; oc < out_ch; ++oc) {
        const double* gp = gout + static_cast<std::size_t>(oc) * plane;
        double acc_b = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc_b += gp[i];
        gkb[oc] += acc_b;
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* ip = in + static_cast<std::size_t>(ic) * plane;
            double* gi = gin ? gin + static_cast<std::size_t>(ic) * plane : nullptr;
            const double* kk = kw + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            double* gk = gkw + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double kval = kk[(dy + 1) * 3 + (dx + 1)];
                    double acc_w = 0.0;
                    for (int y = 0; y < h; ++y) {
                        const int yy = std::clamp(y + dy, 0, h - 1);
                        const double* irow = ip + static_cast<std::size_t>(yy) * w;
                        const double* grow = gp + static_cast<std::size_t>(y) * w;
                        double* girow = gi ? gi + static_cast<std::size_t>(yy) * w : nullptr;
                        for (int x = 0; x < w; ++x) {
                            const int xx = std::clamp(x + dx, 0, w - 1);
                            acc_w += grow[x] * irow[xx];
                            if (girow) girow[xx] += kval * grow[x];
                        }
                    }
                    gk[(dy + 1) * 3 + (dx + 1)] += acc_w;
                }
            }
        }
    }
}

ParamBlock make_block(std::string name, std::vector<std::size_t> dims) {
    ParamBlock b;
    b.name = std::move(name);
    b.dims = std::move(dims);
    std::size_t n = 1;
    for (std::size_t d : b.dims) n *= d;
    b.values.assign(n, 0.0);
    return b;
}

void fill_fan_in_uniform(ParamBlock& block, std::size_t fan_in, SeededGaussian& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : block.values) v = rng.uniform(-bound, bound);
}

} // namespace

DenoiserParams DenoiserParams::init(const DenoiserConfig& cfg, SeededGaussian& rng) {
    if (cfg.bands < 1 || cfg.hidden < 1 || cfg.blocks < 0) {
        throw std::invalid_argument("denoiser: bad config");
    }
    if (cfg.emb_dim < 2 || cfg.emb_dim % 2 != 0) {
        throw std::invalid_argument("denoiser: emb_dim must be even and >= 2");
    }
    const std::size_t in_ch = static_cast<std::size_t>(cfg.input_channels());
    const std::size_t hidden = static_cast<std::size_t>(cfg.hidden);
    const std::size_t emb = static_cast<std::size_t>(cfg.emb_dim);
    const std::size_t bands = static_cast<std::size_t>(cfg.bands);

    DenoiserParams p;
    p.cfg = cfg;
    p.blocks.push_back(make_block("conv_in.w", {hidden, in_ch, 3, 3}));
    p.blocks.push_back(make_block("conv_in.b", {hidden}));
    p.blocks.push_back(make_block("time.w", {2 * hidden, emb}));
    p.blocks.push_back(make_block("time.b", {2 * hidden}));
    for (int k = 0; k < cfg.blocks; ++k) {
        p.blocks.push_back(make_block("block" + std::to_string(k) + ".w", {hidden, hidden, 3, 3}));
        p.blocks.push_back(make_block("block" + std::to_string(k) + ".b", {hidden}));
    }
    p.blocks.push_back(make_block("conv_out.w", {bands, hidden, 3, 3}));
    p.blocks.push_back(make_block("conv_out.b", {bands}));

    fill_fan_in_uniform(p.block("conv_in.w"), in_ch * 9, rng);
    fill_fan_in_uniform(p.block("time.w"), emb, rng);
    for (int k = 0; k < cfg.blocks; ++k) {
        fill_fan_in_uniform(p.block("block" + std::to_string(k) + ".w"), hidden * 9, rng);
    }
    fill_fan_in_uniform(p.block("conv_out.w"), hidden * 9, rng);
    return p;
}

DenoiserParams DenoiserParams::zeros_like() const {
    DenoiserParams g;
    g.cfg = cfg;
    g.blocks.reserve(blocks.size());
    for (const auto& b : blocks) g.blocks.push_back(make_block(b.name, b.dims));
    return g;
}

std::size_t DenoiserParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.count();
    return n;
}

ParamBlock& DenoiserParams::block(const std::string& name) {
    for (auto& b : blocks) {
        if (b.name == name) return b;
    }
    throw std::invalid_argument("denoiser: no parameter block named '" + name + "'");
}

const ParamBlock& DenoiserParams::block(const std::string& name) const {
    for (const auto& b : blocks) {
        if (b.name == name) return b;
    }
    throw std::invalid_argument("denoiser: no parameter block named '" + name + "'");
}

ImageTensor denoiser_forward(const DenoiserParams& params, const ImageTensor& chain_input,
                             const ConditionSet& cond, int t, int total_steps,
                             ForwardCache* cache) {
    const DenoiserConfig& cfg = params.cfg;
    if (chain_input.bands() != cfg.bands) {
        throw std::invalid_argument("denoiser_forward: input bands do not match config");
    }
    const int h = chain_input.height();
    const int w = chain_input.width();
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const int in_ch = cfg.input_channels();
    if (cfg.use_condition) {
        if (cond.stacked.height() != h || cond.stacked.width() != w) {
            throw std::invalid_argument("denoiser_forward: condition spatial size mismatch");
        }
        if (cond.stacked.bands() + chain_input.bands() != in_ch) {
            throw std::invalid_argument("denoiser_forward: condition channel count mismatch");
        }
    }

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc.t = t;
    cc.height = h;
    cc.width = w;

    cc.input.resize(static_cast<std::size_t>(in_ch) * plane);
    std::copy(chain_input.data().begin(), chain_input.data().end(), cc.input.begin());
    if (cfg.use_condition) {
        std::copy(cond.stacked.data().begin(), cond.stacked.data().end(),
                  cc.input.begin() + chain_input.size());
    }

    const std::size_t hidden = static_cast<std::size_t>(cfg.hidden);
    cc.h0.resize(hidden * plane);
    conv3x3_forward(cc.input.data(), in_ch, h, w, params.block("conv_in.w").values.data(),
                    params.block("conv_in.b").values.data(), cfg.hidden, cc.h0.data());

    cc.emb = time_embedding(t, total_steps, cfg.emb_dim);
    const auto& tw = params.block("time.w").values;
    const auto& tb = params.block("time.b").values;
    std::vector<double> sb(2 * hidden);
    for (std::size_t o = 0; o < 2 * hidden; ++o) {
        double acc = tb[o];
        const double* row = tw.data() + o * static_cast<std::size_t>(cfg.emb_dim);
        for (int i = 0; i < cfg.emb_dim; ++i) acc += row[i] * cc.emb[static_cast<std::size_t>(i)];
        sb[o] = acc;
    }

    cc.film.resize(hidden * plane);
    std::vector<double> act(hidden * plane);
    for (std::size_t ch = 0; ch < hidden; ++ch) {
        const double s = 1.0 + sb[ch];
        const double b = sb[hidden + ch];
        const double* src = cc.h0.data() + ch * plane;
        double* fdst = cc.film.data() + ch * plane;
        double* adst = act.data() + ch * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            const double z = src[i] * s + b;
            fdst[i] = z;
            adst[i] = silu(z);
        }
    }

    cc.block_in.assign(static_cast<std::size_t>(cfg.blocks), {});
    cc.block_pre.assign(static_cast<std::size_t>(cfg.blocks), {});
    for (int k = 0; k < cfg.blocks; ++k) {
        cc.block_in[static_cast<std::size_t>(k)] = act;
        auto& pre = cc.block_pre[static_cast<std::size_t>(k)];
        pre.resize(hidden * plane);
        const std::string stem = "block" + std::to_string(k);
        conv3x3_forward(act.data(), cfg.hidden, h, w, params.block(stem + ".w").values.data(),
                        params.block(stem + ".b").values.data(), cfg.hidden, pre.data());
        for (std::size_t i = 0; i < pre.size(); ++i) act[i] = silu(pre[i]);
    }
    cc.last = act;

    ImageTensor out(cfg.bands, h, w);
    conv3x3_forward(act.data(), cfg.hidden, h, w, params.block("conv_out.w").values.data(),
                    params.block("conv_out.b").values.data(), cfg.bands,
                    out.data().data());
    return out;
}

DenoiserParams denoiser_backward(const DenoiserParams& params, const ForwardCache& cache,
                                 const ImageTensor& grad_out) {
    const DenoiserConfig& cfg = params.cfg;
    const int h = cache.height;
    const int w = cache.width;
    if (grad_out.bands() != cfg.bands || grad_out.height() != h || grad_out.width() != w) {
        throw std::invalid_argument("denoiser_backward: grad_out shape mismatch");
    }
    if (static_cast<int>(cache.block_in.size()) != cfg.blocks || cache.h0.empty()) {
        throw std::invalid_argument("denoiser_backward: stale or mismatched cache");
    }
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t hidden = static_cast<std::size_t>(cfg.hidden);

    DenoiserParams grads = params.zeros_like();

    // output conv
    std::vector<double> gact(hidden * plane, 0.0);
    conv3x3_backward(cache.last.data(), cfg.hidden, h, w, params.block("conv_out.w").values.data(),
                     cfg.bands, grad_out.data().data(), grads.block("conv_out.w").values.data(),
                     grads.block("conv_out.b").values.data(), gact.data());

    // hidden blocks, deepest first
    for (int k = cfg.blocks - 1; k >= 0; --k) {
        const auto& pre = cache.block_pre[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < gact.size(); ++i) gact[i] *= silu_grad(pre[i]);
        const std::string stem = "block" + std::to_string(k);
        std::vector<double> gin(hidden * plane, 0.0);
        conv3x3_backward(cache.block_in[static_cast<std::size_t>(k)].data(), cfg.hidden, h, w,
                         params.block(stem + ".w").values.data(), cfg.hidden, gact.data(),
                         grads.block(stem + ".w").values.data(),
                         grads.block(stem + ".b").values.data(), gin.data());
        gact = std::move(gin);
    }

    // FiLM: z = h0 * (1 + s) + b, activation silu(z)
    const auto& tw = params.block("time.w").values;
    std::vector<double> sb(2 * hidden);
    const auto& tb = params.block("time.b").values;
    for (std::size_t o = 0; o < 2 * hidden; ++o) {
        double acc = tb[o];
        const double* row = tw.data() + o * static_cast<std::size_t>(cfg.emb_dim);
        for (int i = 0; i < cfg.emb_dim; ++i) acc += row[i] * cache.emb[static_cast<std::size_t>(i)];
        sb[o] = acc;
    }
    std::vector<double> gsb(2 * hidden, 0.0);
    std::vector<double> gh0(hidden * plane);
    for (std::size_t ch = 0; ch < hidden; ++ch) {
        const double s = 1.0 + sb[ch];
        const double* fz = cache.film.data() + ch * plane;
        const double* h0p = cache.h0.data() + ch * plane;
        const double* ga = gact.data() + ch * plane;
        double* gh = gh0.data() + ch * plane;
        double acc_s = 0.0, acc_b = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            const double gz = ga[i] * silu_grad(fz[i]);
            gh[i] = gz * s;
            acc_s += gz * h0p[i];
            acc_b += gz;
        }
        gsb[ch] = acc_s;
        gsb[hidden + ch] = acc_b;
    }
    auto& gtw = grads.block("time.w").values;
    auto& gtb = grads.block("time.b").values;
    for (std::size_t o = 0; o < 2 * hidden; ++o) {
        gtb[o] += gsb[o];
        double* row = gtw.data() + o * static_cast<std::size_t>(cfg.emb_dim);
        for (int i = 0; i < cfg.emb_dim; ++i) {
            row[i] += gsb[o] * cache.emb[static_cast<std::size_t>(i)];
        }
    }

    // shallow conv; no input gradient needed
    conv3x3_backward(cache.input.data(), cfg.input_channels(), h, w,
                     params.block("conv_in.w").values.data(), cfg.hidden, gh0.data(),
                     grads.block("conv_in.w").values.data(),
                     grads.block("conv_in.b").values.data(), nullptr);

    return grads;
}

Predictor oracle_predictor(const ImageTensor& x_0_true) {
    ImageTensor target = x_0_true;
    return [target](const ImageTensor&, const ConditionSet& cond, int) {
        return sub(target, cond.lrms);
    };
}

Predictor make_predictor(const DenoiserParams& params, int total_steps) {
    DenoiserParams copy = params;
    return [copy, total_steps](const ImageTensor& x_t, const ConditionSet& cond, int t) {
        return denoiser_forward(copy, x_t, cond, t, total_steps);
    };
}

} // namespace respan
