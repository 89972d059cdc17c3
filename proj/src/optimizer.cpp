#include "respan/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace respan {

void AdamW::step(std::span<const std::span<double>> params,
                 std::span<const std::span<const double>> grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("AdamW::step: parameter/gradient block mismatch");
    }
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].size(), 0.0);
            v_[i].assign(params[i].size(), 0.0);
        }
    }
    if (m_.size() != params.size()) {
        throw std::invalid_argument("AdamW::step: block structure changed between steps");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto w = params[i];
        const auto g = grads[i];
        if (w.size() != g.size() || w.size() != m_[i].size()) {
            throw std::invalid_argument("AdamW::step: block size mismatch");
        }
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.lr * cfg_.weight_decay * w[j];
        }
    }
}

void AdamW::step(DenoiserParams& params, const DenoiserParams& grads) {
    std::vector<std::span<double>> pw;
    std::vector<std::span<const double>> gw;
    pw.reserve(params.blocks.size());
    gw.reserve(grads.blocks.size());
    for (auto& b : params.blocks) pw.emplace_back(b.values);
    for (const auto& b : grads.blocks) gw.emplace_back(b.values);
    step(pw, gw);
}

} // namespace respan
