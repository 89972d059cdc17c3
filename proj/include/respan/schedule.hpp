#pragma once

#include <vector>

namespace respan {

struct ScheduleConfig {
    int steps = 15;       // T
    double p = 8e-3;      // cosine shape hyperparameter
    double kappa = 1.0;   // global noise scale
};

// Cumulative cosine schedule:
//   f(t) = cos(((t/T + p) / (1 + p)) * pi/2)
//   abar(t) = 1 - f(t) / f(0)
//   alpha(t) = abar(t) - abar(t-1)
// abar(0) is 0 by construction and abar(T) is pinned to exactly 1 so the
// per-step increments telescope to 1 without float residue.
struct ScheduleTable {
    std::vector<double> alpha;      // [0] unused, valid for t = 1..T
    std::vector<double> alpha_bar;  // valid for t = 0..T
    double kappa = 1.0;

    int steps() const { return static_cast<int>(alpha.size()) - 1; }
    double alpha_at(int t) const;      // 1 <= t <= T
    double alpha_bar_at(int t) const;  // 0 <= t <= T
};

ScheduleTable build_schedule(const ScheduleConfig& cfg);

// Closed-form marginal of e_t given e_0: mean coeff * e_0, std deviation std.
struct MarginalParams {
    double coeff;   // 1 - abar(t)
    double stddev;  // kappa * sqrt(abar(t))
};

MarginalParams marginal_params(const ScheduleTable& tab, int t);

} // namespace respan
