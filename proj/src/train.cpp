#include "respan/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "respan/checkpoint.hpp"
#include "respan/mbif.hpp"
#include "respan/metrics.hpp"

namespace respan {

std::vector<TrainScene> load_dataset(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> hrms_files;
    if (std::filesystem::exists(dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            const auto name = entry.path().filename().string();
            if (name.size() > 10 && name.ends_with("_hrms.mbif")) {
                hrms_files.push_back(entry.path());
            }
        }
    }
    std::sort(hrms_files.begin(), hrms_files.end());
    if (hrms_files.empty()) {
        throw std::runtime_error("train: no *_hrms.mbif files in '" + dir.string() + "'");
    }

    std::vector<TrainScene> scenes;
    scenes.reserve(hrms_files.size());
    for (const auto& hrms_path : hrms_files) {
        auto stem = hrms_path.filename().string();
        stem.erase(stem.size() - std::string("_hrms.mbif").size());
        TrainScene s;
        s.hrms = read_mbif(hrms_path);
        s.lrms = read_mbif(dir / (stem + "_lrms.mbif"));
        s.pan = read_mbif(dir / (stem + "_pan.mbif"));
        s.cond = build_condition(s.lrms, s.pan);
        s.e_0 = sub(s.hrms, s.lrms);
        scenes.push_back(std::move(s));
    }
    return scenes;
}

namespace {

struct ValMetrics {
    double sam_model = 0.0, psnr_model = 0.0;
    double sam_base = 0.0, psnr_base = 0.0;
};

ValMetrics validate(const DenoiserParams& params, const ScheduleTable& tab,
                    const std::vector<TrainScene>& scenes, std::size_t val_begin,
                    std::uint64_t seed) {
    ValMetrics m;
    const Predictor predictor = make_predictor(params, tab.steps());
    int n = 0;
    for (std::size_t i = val_begin; i < scenes.size(); ++i, ++n) {
        SeededGaussian rng(SeededGaussian::derived_seed(seed, 0x5EED + i));
        const SampleResult res = sample(scenes[i].lrms, scenes[i].cond, predictor, tab, rng);
        m.sam_model += sam(res.x_0_hat, scenes[i].hrms);
        m.psnr_model += psnr(res.x_0_hat, scenes[i].hrms);
        m.sam_base += sam(scenes[i].lrms, scenes[i].hrms);
        m.psnr_base += psnr(scenes[i].lrms, scenes[i].hrms);
    }
    if (n > 0) {
        m.sam_model /= n;
        m.psnr_model /= n;
        m.sam_base /= n;
        m.psnr_base /= n;
    }
    return m;
}

void accumulate(DenoiserParams& into, const DenoiserParams& grads, double scale) {
    for (std::size_t i = 0; i < into.blocks.size(); ++i) {
        auto& dst = into.blocks[i].values;
        const auto& src = grads.blocks[i].values;
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
    }
}

} // namespace

TrainResult train_model(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (cfg.accum < 1) throw std::invalid_argument("train: accum must be >= 1");

    std::vector<TrainScene> scenes = load_dataset(cfg.data_dir);
    const int bands = scenes.front().hrms.bands();
    for (const auto& s : scenes) {
        check_same_shape(s.hrms, s.lrms, "train dataset");
        if (s.hrms.bands() != bands) throw std::runtime_error("train: mixed band counts");
    }

    const int val_count = cfg.val_count >= 0
                              ? cfg.val_count
                              : std::max<int>(1, static_cast<int>(scenes.size()) / 8);
    if (val_count >= static_cast<int>(scenes.size())) {
        throw std::invalid_argument("train: validation split leaves no training scenes");
    }
    const std::size_t train_count = scenes.size() - static_cast<std::size_t>(val_count);

    const ScheduleTable tab = build_schedule(cfg.sched);

    DenoiserConfig net_cfg;
    net_cfg.bands = bands;
    net_cfg.hidden = cfg.hidden;
    net_cfg.blocks = cfg.blocks;
    net_cfg.emb_dim = cfg.emb_dim;
    net_cfg.input_is_latent = cfg.input_is_latent;
    net_cfg.use_condition = cfg.use_condition;

    SeededGaussian init_rng(SeededGaussian::derived_seed(cfg.seed, 1));
    DenoiserParams params = DenoiserParams::init(net_cfg, init_rng);

    AdamWConfig opt_cfg;
    opt_cfg.lr = cfg.lr;
    opt_cfg.weight_decay = cfg.weight_decay;
    AdamW opt(opt_cfg);

    SeededGaussian rng(SeededGaussian::derived_seed(cfg.seed, 2));
    std::vector<std::size_t> order(train_count);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    DenoiserParams grad_acc = params.zeros_like();
    int acc_n = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates with the training stream keeps runs reproducible.
        for (std::size_t i = train_count; i > 1; --i) {
            const std::size_t j = rng.uniform_below(i);
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum = 0.0;
        for (std::size_t oi = 0; oi < train_count; ++oi) {
            const TrainScene& s = scenes[order[oi]];
            const TrainingSample ts = make_training_sample(s.hrms, s.lrms, tab, rng);
            const ImageTensor& net_in = cfg.input_is_latent ? ts.x_t : ts.e_t;

            ForwardCache cache;
            const ImageTensor e0_hat =
                denoiser_forward(params, net_in, s.cond, ts.t, tab.steps(), &cache);

            LossReport rep = base_loss(cfg.loss, e0_hat, ts.e_0);
            if (cfg.gamma > 0.0) {
                const LossReport pen = boundary_penalty(e0_hat, ts.e_0, cfg.per_band_penalty);
                rep.value += cfg.gamma * pen.value;
                auto pg = rep.grad.data();
                const auto pp = pen.grad.data();
                for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += cfg.gamma * pp[i];
            }
            if (!std::isfinite(rep.value)) {
                throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch));
            }
            loss_sum += rep.value;

            const DenoiserParams grads = denoiser_backward(params, cache, rep.grad);
            accumulate(grad_acc, grads, 1.0 / cfg.accum);
            if (++acc_n == cfg.accum) {
                opt.step(params, grad_acc);
                grad_acc = params.zeros_like();
                acc_n = 0;
            }
        }

        EpochRow row;
        row.epoch = epoch;
        row.mean_loss = loss_sum / static_cast<double>(train_count);
        if (epoch % cfg.val_every == 0 || epoch == cfg.epochs) {
            const ValMetrics vm = validate(params, tab, scenes, train_count, cfg.seed);
            row.validated = true;
            row.val_sam = vm.sam_model;
            row.val_psnr = vm.psnr_model;
            result.val_sam = vm.sam_model;
            result.val_psnr = vm.psnr_model;
            result.baseline_sam = vm.sam_base;
            result.baseline_psnr = vm.psnr_base;
        }
        result.log.push_back(row);
    }

    if (!cfg.ckpt_out.empty()) save_checkpoint(cfg.ckpt_out, params);
    if (!cfg.log_csv.empty()) {
        std::ofstream out(cfg.log_csv);
        if (!out) throw std::runtime_error("train: cannot write log '" + cfg.log_csv.string() + "'");
        out << "epoch,mean_loss,val_sam,val_psnr\n";
        for (const auto& row : result.log) {
            out << row.epoch << ',' << row.mean_loss << ',';
            if (row.validated) {
                out << row.val_sam << ',' << row.val_psnr;
            } else {
                out << ',';
            }
            out << '\n';
        }
    }

    result.params = std::move(params);
    return result;
}

} // namespace respan
