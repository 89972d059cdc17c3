#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "respan/denoiser.hpp"
#include "respan/losses.hpp"
#include "respan/optimizer.hpp"
#include "respan/schedule.hpp"

namespace respan {

struct TrainConfig {
    std::filesystem::path data_dir;
    std::filesystem::path ckpt_out;
    std::filesystem::path log_csv;  // empty = no log

    int epochs = 200;
    double lr = 1e-4;
    LossKind loss = LossKind::res;
    double gamma = 10000.0;
    ScheduleConfig sched;
    std::uint64_t seed = 0;

    int hidden = 32;
    int blocks = 3;
    int emb_dim = 32;
    bool input_is_latent = true;  // x_t input; false trains on e_t
    bool use_condition = true;    // shallow cond-injection; false = plain shallow conv
    int accum = 1;                // gradient accumulation window
    bool per_band_penalty = false;  // boundary extremes per band instead of tensor-wide

    int val_count = -1;           // scenes held out from the end; -1 = count/8, min 1
    int val_every = 10;           // epochs between validation passes
    double weight_decay = 1e-4;
};

struct EpochRow {
    int epoch = 0;
    double mean_loss = 0.0;
    bool validated = false;
    double val_sam = 0.0;
    double val_psnr = 0.0;
};

struct TrainResult {
    DenoiserParams params;
    std::vector<EpochRow> log;
    // Final validation metrics next to the interpolation baseline they must beat.
    double val_sam = 0.0;
    double val_psnr = 0.0;
    double baseline_sam = 0.0;
    double baseline_psnr = 0.0;
};

// One (x_0, x_T, y) triple with its precomputed conditioning.
struct TrainScene {
    ImageTensor hrms;
    ImageTensor lrms;
    ImageTensor pan;
    ConditionSet cond;
    ImageTensor e_0;
};

std::vector<TrainScene> load_dataset(const std::filesystem::path& dir);

TrainResult train_model(const TrainConfig& cfg);

} // namespace respan
