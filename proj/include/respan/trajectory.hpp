#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "respan/schedule.hpp"
#include "respan/tensor.hpp"

namespace respan {

using Point2 = std::array<double, 2>;

// Paired 2D transport task. Sources come from a seeded Gaussian mixture and
// each target is a fixed function of its source, so pairs are deterministic
// rather than randomly coupled.
enum class Pairing { identity, shift, swirl };

Pairing pairing_from_string(const std::string& s);
Point2 apply_pairing(Pairing pairing, const Point2& x);

struct ToyTask {
    Pairing pairing = Pairing::shift;
    int samples = 512;
    std::uint64_t seed = 0;
};

std::vector<Point2> sample_sources(const ToyTask& task);

// Dense 2-layer tanh network (x, y, t/T) -> residual estimate.
struct ToyNet {
    int hidden = 32;
    std::vector<double> w1, b1;  // hidden x 3, hidden
    std::vector<double> w2, b2;  // hidden x hidden, hidden
    std::vector<double> w3, b3;  // 2 x hidden, 2

    Point2 predict(const Point2& pos, double tau) const;
};

struct ToyTrainConfig {
    int hidden = 32;
    int epochs = 400;
    double lr = 1e-2;
    ScheduleConfig sched;
    std::uint64_t seed = 0;
};

struct ToyTrainResult {
    ToyNet net;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

// Regresses the residual target on marginal-corrupted latent positions.
ToyTrainResult train_toy(const ToyTask& task, const ToyTrainConfig& cfg);

struct Trajectory {
    std::vector<Point2> points;  // T+1 positions from x_T to x_0_hat

    double chord() const;
    double path() const;
    double ratio() const;  // path / chord; +inf when the chord is zero
};

// Reverse chain per source point, recording x_t = e_t + x_T at every step.
// The 2D state rides through the shared posterior on 2x1x1 tensors. With
// zero_noise the initial residual and every posterior draw are taken at the
// mean, which isolates the geometry of the transport path.
std::vector<Trajectory> roll_trajectories(const ToyNet& net, const std::vector<Point2>& sources,
                                          const ScheduleTable& tab, std::uint64_t seed,
                                          bool zero_noise = false);

// Same roll but with the exact residual instead of a trained network.
std::vector<Trajectory> roll_oracle_trajectories(Pairing pairing,
                                                 const std::vector<Point2>& sources,
                                                 const ScheduleTable& tab, std::uint64_t seed,
                                                 bool zero_noise = false);

// Exact pairwise segment-crossing count over all trajectory segments,
// excluding comparisons within the same trajectory.
long count_crossings(const std::vector<Trajectory>& trajs);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<Trajectory>& trajs);
void write_trajectory_svg(const std::filesystem::path& path,
                          const std::vector<Trajectory>& trajs,
                          const std::vector<Point2>& sources,
                          const std::vector<Point2>& targets);

} // namespace respan
