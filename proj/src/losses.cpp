#include "respan/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace respan {

namespace {

const double kA = 1.0 / (2.0 * std::exp(1.0)) - 0.5;
const double kB = 7.0 / 4.0 - 3.0 / (2.0 * std::exp(1.0)) -
                  1.0 / (4.0 * std::exp(1.0) * std::exp(1.0));

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

LossReport residual_loss(const ImageTensor& e0_hat, const ImageTensor& e0) {
    check_same_shape(e0_hat, e0, "residual_loss");
    LossReport rep;
    rep.grad = ImageTensor(e0.bands(), e0.height(), e0.width());
    const auto ph = e0_hat.data();
    const auto p0 = e0.data();
    auto pg = rep.grad.data();
    const double inv_n = 1.0 / static_cast<double>(p0.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        const double h = p0[i] - ph[i];
        const double ah = std::abs(h);
        double value, dldh;
        if (ah < 1.0) {
            value = ah + (1.0 - std::exp(-ah));
            dldh = sign(h) * (1.0 + std::exp(-ah));
        } else {
            value = (ah + kA) * (ah + kA) + kB;
            dldh = 2.0 * sign(h) * (ah + kA);
        }
        sum += value;
        pg[i] = -dldh * inv_n;
    }
    rep.value = sum * inv_n;
    return rep;
}

LossReport boundary_penalty(const ImageTensor& e0_hat, const ImageTensor& e0, bool per_band) {
    check_same_shape(e0_hat, e0, "boundary_penalty");
    LossReport rep;
    rep.grad = ImageTensor(e0.bands(), e0.height(), e0.width());
    const double inv_n = 1.0 / static_cast<double>(e0.size());
    double sum = 0.0;
    for (int c = 0; c < e0.bands(); ++c) {
        const double lo = per_band ? band_min(e0, c) : tensor_min(e0);
        const double hi = per_band ? band_max(e0, c) : tensor_max(e0);
        const auto ph = e0_hat.band(c);
        auto pg = rep.grad.band(c);
        for (std::size_t i = 0; i < ph.size(); ++i) {
            const double over = ph[i] - hi;
            const double under = lo - ph[i];
            double g = 0.0;
            if (over > 0.0) {
                sum += over;
                g += 1.0;
            }
            if (under > 0.0) {
                sum += under;
                g -= 1.0;
            }
            pg[i] = g * inv_n;
        }
    }
    rep.value = sum * inv_n;
    return rep;
}

LossReport full_loss(const ImageTensor& e0_hat, const ImageTensor& e0, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("full_loss: gamma must be >= 0");
    LossReport res = residual_loss(e0_hat, e0);
    const LossReport pen = boundary_penalty(e0_hat, e0);
    res.value += gamma * pen.value;
    auto pg = res.grad.data();
    const auto pp = pen.grad.data();
    for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += gamma * pp[i];
    return res;
}

LossReport l1_loss(const ImageTensor& e0_hat, const ImageTensor& e0) {
    check_same_shape(e0_hat, e0, "l1_loss");
    LossReport rep;
    rep.grad = ImageTensor(e0.bands(), e0.height(), e0.width());
    const auto ph = e0_hat.data();
    const auto p0 = e0.data();
    auto pg = rep.grad.data();
    const double inv_n = 1.0 / static_cast<double>(p0.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        const double h = p0[i] - ph[i];
        sum += std::abs(h);
        pg[i] = -sign(h) * inv_n;
    }
    rep.value = sum * inv_n;
    return rep;
}

LossReport l2_loss(const ImageTensor& e0_hat, const ImageTensor& e0) {
    check_same_shape(e0_hat, e0, "l2_loss");
    LossReport rep;
    rep.grad = ImageTensor(e0.bands(), e0.height(), e0.width());
    const auto ph = e0_hat.data();
    const auto p0 = e0.data();
    auto pg = rep.grad.data();
    const double inv_n = 1.0 / static_cast<double>(p0.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        const double h = p0[i] - ph[i];
        sum += h * h;
        pg[i] = -2.0 * h * inv_n;
    }
    rep.value = sum * inv_n;
    return rep;
}

LossReport base_loss(LossKind kind, const ImageTensor& e0_hat, const ImageTensor& e0) {
    switch (kind) {
        case LossKind::res: return residual_loss(e0_hat, e0);
        case LossKind::l1: return l1_loss(e0_hat, e0);
        case LossKind::l2: return l2_loss(e0_hat, e0);
    }
    throw std::invalid_argument("base_loss: unknown kind");
}

} // namespace respan
