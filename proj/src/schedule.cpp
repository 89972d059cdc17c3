#include "respan/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace respan {

double ScheduleTable::alpha_at(int t) const {
    if (t < 1 || t > steps()) {
        throw std::invalid_argument("alpha_at: t = " + std::to_string(t) + " outside [1," +
                                    std::to_string(steps()) + "]");
    }
    return alpha[static_cast<std::size_t>(t)];
}

double ScheduleTable::alpha_bar_at(int t) const {
    if (t < 0 || t > steps()) {
        throw std::invalid_argument("alpha_bar_at: t = " + std::to_string(t) + " outside [0," +
                                    std::to_string(steps()) + "]");
    }
    return alpha_bar[static_cast<std::size_t>(t)];
}

ScheduleTable build_schedule(const ScheduleConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("schedule: T must be >= 1");
    if (!(cfg.p > 0.0)) throw std::invalid_argument("schedule: p must be > 0");
    if (!(cfg.kappa > 0.0)) throw std::invalid_argument("schedule: kappa must be > 0");

    const int T = cfg.steps;
    const auto f = [&](double t) {
        return std::cos((t / T + cfg.p) / (1.0 + cfg.p) * std::numbers::pi / 2.0);
    };
    const double f0 = f(0.0);

    ScheduleTable tab;
    tab.kappa = cfg.kappa;
    tab.alpha_bar.resize(static_cast<std::size_t>(T) + 1);
    tab.alpha.resize(static_cast<std::size_t>(T) + 1);

    for (int t = 0; t <= T; ++t) tab.alpha_bar[t] = 1.0 - f(t) / f0;
    tab.alpha_bar[0] = 0.0;
    tab.alpha_bar[T] = 1.0;  // cos(pi/2) is analytically 0; pin the float residue

    tab.alpha[0] = 0.0;
    for (int t = 1; t <= T; ++t) {
        tab.alpha[t] = tab.alpha_bar[t] - tab.alpha_bar[t - 1];
        if (!(tab.alpha[t] > 0.0)) {
            throw std::runtime_error("schedule: non-positive increment at t = " + std::to_string(t));
        }
    }
    return tab;
}

MarginalParams marginal_params(const ScheduleTable& tab, int t) {
    if (t < 1 || t > tab.steps()) {
        throw std::invalid_argument("marginal_params: t = " + std::to_string(t) + " outside [1," +
                                    std::to_string(tab.steps()) + "]");
    }
    const double abar = tab.alpha_bar_at(t);
    return MarginalParams{1.0 - abar, tab.kappa * std::sqrt(abar)};
}

} // namespace respan
