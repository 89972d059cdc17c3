#include "respan/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "respan/chain.hpp"
#include "respan/checkpoint.hpp"
#include "respan/datagen.hpp"
#include "respan/denoiser.hpp"
#include "respan/mbif.hpp"
#include "respan/metrics.hpp"
#include "respan/parallel.hpp"
#include "respan/schedule.hpp"
#include "respan/train.hpp"
#include "respan/trajectory.hpp"
#include "respan/verify.hpp"

namespace respan {

namespace {

namespace fs = std::filesystem;

// Every run echoes its fully resolved configuration before doing work.
class ConfigEcho {
public:
    explicit ConfigEcho(std::string subcommand) : sub_(std::move(subcommand)) {}

    template <typename T>
    ConfigEcho& kv(const std::string& key, const T& value) {
        std::ostringstream os;
        os << value;
        items_.push_back(key + "=" + os.str());
        return *this;
    }

    void print() const {
        std::ostringstream os;
        os << "[" << sub_ << "]";
        for (const auto& item : items_) os << " " << item;
        std::cerr << os.str() << "\n";
    }

private:
    std::string sub_;
    std::vector<std::string> items_;
};

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8g", v);
    return buf;
}

struct ScheduleArgs {
    int T = 15;
    double p = 8e-3;
    double kappa = 1.0;
};

void add_schedule_flags(CLI::App* cmd, ScheduleArgs& args) {
    cmd->add_option("--T", args.T, "chain length")->capture_default_str();
    cmd->add_option("--p", args.p, "cosine schedule hyperparameter")->capture_default_str();
    cmd->add_option("--kappa", args.kappa, "noise scale")->capture_default_str();
}

int cmd_schedule(const ScheduleArgs& sa, const std::string& csv) {
    const ScheduleTable tab = build_schedule({sa.T, sa.p, sa.kappa});
    std::ostringstream out;
    out << "t,alpha,alpha_bar,marginal_coeff,marginal_std\n";
    out << "0,0," << fmt_full(tab.alpha_bar_at(0)) << ",1,0\n";
    for (int t = 1; t <= sa.T; ++t) {
        const auto m = marginal_params(tab, t);
        out << t << ',' << fmt_full(tab.alpha_at(t)) << ',' << fmt_full(tab.alpha_bar_at(t)) << ','
            << fmt_full(m.coeff) << ',' << fmt_full(m.stddev) << '\n';
    }
    if (csv == "-") {
        std::cout << out.str();
    } else {
        std::ofstream f(csv);
        if (!f) throw std::runtime_error("schedule: cannot write '" + csv + "'");
        f << out.str();
    }
    return 0;
}

int cmd_gen_data(const fs::path& out_dir, int count, SceneConfig cfg, int threads) {
    generate_dataset(out_dir, count, cfg, threads);
    std::cerr << "wrote " << count << " scenes to " << out_dir.string() << "\n";
    return 0;
}

int cmd_train(const TrainConfig& cfg) {
    const TrainResult result = train_model(cfg);
    std::cout << "final_val_sam=" << fmt_short(result.val_sam)
              << " baseline_sam=" << fmt_short(result.baseline_sam)
              << " final_val_psnr=" << fmt_short(result.val_psnr)
              << " baseline_psnr=" << fmt_short(result.baseline_psnr) << "\n";
    return 0;
}

int cmd_sample(const fs::path& ckpt, const fs::path& lrms_path, const fs::path& pan_path,
               const fs::path& out_path, std::uint64_t seed, const ScheduleArgs& sa) {
    const DenoiserParams params = load_checkpoint(ckpt);
    const ImageTensor lrms = read_mbif(lrms_path);
    const ImageTensor pan = read_mbif(pan_path);
    const ConditionSet cond = build_condition(lrms, pan);
    const ScheduleTable tab = build_schedule({sa.T, sa.p, sa.kappa});

    Predictor pred;
    if (params.cfg.input_is_latent) {
        pred = make_predictor(params, tab.steps());
    } else {
        // networks trained on e_t recover it from the latent state
        DenoiserParams copy = params;
        const int steps = tab.steps();
        pred = [copy, steps, lrms](const ImageTensor& x_t, const ConditionSet& c, int t) {
            return denoiser_forward(copy, sub(x_t, lrms), c, t, steps);
        };
    }

    SeededGaussian rng(seed);
    const SampleResult res = sample(lrms, cond, pred, tab, rng);
    write_mbif(res.x_0_hat, out_path);
    std::cerr << "wrote " << out_path.string() << " after " << res.predictor_calls
              << " predictor calls\n";
    return 0;
}

std::vector<fs::path> list_mbif(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::exists(dir)) throw std::runtime_error("eval: directory '" + dir.string() + "' missing");
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".mbif") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

int cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const std::string& csv,
             double ratio, int threads, const fs::path& data_dir, const fs::path& dump_cond) {
    if (!dump_cond.empty()) {
        if (data_dir.empty()) {
            throw std::runtime_error("eval: --dump-cond requires --data-dir");
        }
        const auto scenes = load_dataset(data_dir);
        fs::create_directories(dump_cond);
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            char stem[16];
            std::snprintf(stem, sizeof stem, "%03zu", i);
            const auto& cond = scenes[i].cond;
            write_mbif(cond.stacked, dump_cond / (std::string(stem) + "_cond.mbif"));
            const struct {
                const char* name;
                const ImageTensor* img;
            } comps[] = {
                {"lrms_ll", &cond.lrms_quad.ll}, {"lrms_lh", &cond.lrms_quad.lh},
                {"lrms_hl", &cond.lrms_quad.hl}, {"lrms_hh", &cond.lrms_quad.hh},
                {"pan_ll", &cond.pan_quad.ll},   {"pan_lh", &cond.pan_quad.lh},
                {"pan_hl", &cond.pan_quad.hl},   {"pan_hh", &cond.pan_quad.hh},
            };
            for (const auto& comp : comps) {
                write_mbif(*comp.img,
                           dump_cond / (std::string(stem) + "_" + comp.name + ".mbif"));
            }
        }
        std::cerr << "dumped conditioning for " << scenes.size() << " scenes\n";
        if (pred_dir.empty()) return 0;
    }

    const auto preds = list_mbif(pred_dir);
    const auto gts = list_mbif(gt_dir);
    if (preds.size() != gts.size() || preds.empty()) {
        throw std::runtime_error("eval: need equal nonzero counts of .mbif files (pred " +
                                 std::to_string(preds.size()) + ", gt " +
                                 std::to_string(gts.size()) + ")");
    }

    std::vector<MetricReport> reports(preds.size());
    parallel_for(preds.size(), threads, [&](std::size_t i) {
        reports[i] = evaluate(read_mbif(preds[i]), read_mbif(gts[i]), ratio);
    });

    std::ostringstream out;
    out << "image,sam_deg,ergas,scc,psnr_db\n";
    double sums[4] = {0, 0, 0, 0}, sumsq[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const double vals[4] = {reports[i].sam_deg, reports[i].ergas, reports[i].scc,
                                reports[i].psnr_db};
        out << preds[i].filename().string();
        for (int k = 0; k < 4; ++k) {
            out << ',' << fmt_short(vals[k]);
            sums[k] += vals[k];
            sumsq[k] += vals[k] * vals[k];
        }
        out << '\n';
    }
    const double n = static_cast<double>(reports.size());
    out << "mean±std";
    for (int k = 0; k < 4; ++k) {
        const double mean = sums[k] / n;
        const double var = std::max(0.0, sumsq[k] / n - mean * mean);
        out << ',' << fmt_short(mean) << "±" << fmt_short(std::sqrt(var));
    }
    out << '\n';

    if (csv == "-") {
        std::cout << out.str();
    } else {
        std::ofstream f(csv);
        if (!f) throw std::runtime_error("eval: cannot write '" + csv + "'");
        f << out.str();
    }
    return 0;
}

int cmd_trajectory(const std::string& pairing_name, int n, const ScheduleArgs& sa, int samples,
                   int epochs, int hidden, double lr, const std::string& out_prefix,
                   std::uint64_t seed, bool oracle, bool zero_noise) {
    const Pairing pairing = pairing_from_string(pairing_name);
    const ScheduleTable tab = build_schedule({sa.T, sa.p, sa.kappa});

    ToyTask task;
    task.pairing = pairing;
    task.samples = samples;
    task.seed = SeededGaussian::derived_seed(seed, 11);

    std::vector<Point2> sources = sample_sources(task);
    std::vector<Point2> targets(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        targets[i] = apply_pairing(pairing, sources[i]);
    }

    std::vector<Point2> roll_sources(sources.begin(),
                                     sources.begin() + std::min<std::size_t>(n, sources.size()));

    std::vector<Trajectory> trajs;
    if (oracle) {
        trajs = roll_oracle_trajectories(pairing, roll_sources, tab,
                                         SeededGaussian::derived_seed(seed, 12), zero_noise);
    } else {
        ToyTrainConfig tcfg;
        tcfg.hidden = hidden;
        tcfg.epochs = epochs;
        tcfg.lr = lr;
        tcfg.sched = {sa.T, sa.p, sa.kappa};
        tcfg.seed = seed;
        const ToyTrainResult tr = train_toy(task, tcfg);
        std::cerr << "toy training loss " << fmt_short(tr.initial_loss) << " -> "
                  << fmt_short(tr.final_loss) << "\n";
        trajs = roll_trajectories(tr.net, roll_sources, tab,
                                  SeededGaussian::derived_seed(seed, 12), zero_noise);
    }

    const fs::path prefix(out_prefix);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    const fs::path csv_path = prefix.string() + ".csv";
    const fs::path svg_path = prefix.string() + ".svg";
    write_trajectory_csv(csv_path, trajs);
    write_trajectory_svg(svg_path, trajs, sources, targets);

    double mean_ratio = 0.0;
    int finite = 0;
    for (const auto& t : trajs) {
        if (std::isfinite(t.ratio())) {
            mean_ratio += t.ratio();
            ++finite;
        }
    }
    if (finite > 0) mean_ratio /= finite;
    std::cout << "trajectories=" << trajs.size() << " mean_ratio=" << fmt_short(mean_ratio)
              << " crossings=" << count_crossings(trajs) << " csv=" << csv_path.string()
              << " svg=" << svg_path.string() << "\n";
    return 0;
}

int cmd_verify(std::uint64_t seed) {
    const auto results = run_verify(seed);
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name
                  << std::string(width - r.name.size() + 2, ' ') << r.detail << "\n";
    }
    return all_passed(results) ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"residual-shift diffusion engine for multi-source image fusion"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic reduced-resolution dataset");
    fs::path gen_out;
    int gen_count = 16;
    SceneConfig scene_cfg;
    std::uint64_t gen_seed = 0;
    int gen_threads = 0;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--count", gen_count, "number of scenes")->capture_default_str();
    gen->add_option("--size", scene_cfg.size, "image size (H = W)")->capture_default_str();
    gen->add_option("--bands", scene_cfg.bands, "spectral bands")->capture_default_str();
    gen->add_option("--scale", scene_cfg.scale, "degradation ratio")->capture_default_str();
    gen->add_option("--blobs", scene_cfg.blobs, "bumps per scene")->capture_default_str();
    gen->add_option("--blur-sigma", scene_cfg.blur_sigma, "degradation blur sigma")
        ->capture_default_str();
    gen->add_option("--seed", gen_seed, "master seed")->capture_default_str();
    gen->add_option("--threads", gen_threads, "worker threads (0 = RESPAN_THREADS or 1)")
        ->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train the residual predictor");
    TrainConfig train_cfg;
    std::string train_loss = "res";
    std::string train_input = "xt";
    bool no_sci = false;
    ScheduleArgs train_sched;
    train->add_option("--data-dir", train_cfg.data_dir, "dataset directory")->required();
    train->add_option("--ckpt", train_cfg.ckpt_out, "checkpoint output path")->required();
    train->add_option("--log", train_cfg.log_csv, "per-epoch CSV log");
    train->add_option("--epochs", train_cfg.epochs, "training epochs")->capture_default_str();
    train->add_option("--lr", train_cfg.lr, "learning rate")->capture_default_str();
    train->add_option("--loss", train_loss, "base loss: res, l1 or l2")
        ->check(CLI::IsMember({"res", "l1", "l2"}))
        ->capture_default_str();
    train->add_option("--gamma", train_cfg.gamma, "boundary penalty weight")->capture_default_str();
    add_schedule_flags(train, train_sched);
    train->add_option("--seed", train_cfg.seed, "master seed")->capture_default_str();
    train->add_option("--input", train_input, "network input: xt (latent) or et (residual)")
        ->check(CLI::IsMember({"xt", "et"}))
        ->capture_default_str();
    train->add_flag("--no-sci", no_sci, "plain shallow conv without condition injection");
    train->add_flag("--per-band-penalty", train_cfg.per_band_penalty,
                    "boundary penalty extremes per band instead of tensor-wide");
    train->add_option("--hidden", train_cfg.hidden, "hidden channels")->capture_default_str();
    train->add_option("--blocks", train_cfg.blocks, "hidden conv blocks")->capture_default_str();
    train->add_option("--accum", train_cfg.accum, "gradient accumulation window")
        ->capture_default_str();
    train->add_option("--val-count", train_cfg.val_count, "held-out scenes (-1 = count/8)")
        ->capture_default_str();
    train->add_option("--val-every", train_cfg.val_every, "epochs between validations")
        ->capture_default_str();
    train->add_option("--weight-decay", train_cfg.weight_decay, "AdamW weight decay")
        ->capture_default_str();

    // sample
    auto* smp = app.add_subcommand("sample", "fuse one LRMS/PAN pair with a trained checkpoint");
    fs::path smp_ckpt, smp_lrms, smp_pan, smp_out;
    std::uint64_t smp_seed = 0;
    ScheduleArgs smp_sched;
    smp->add_option("--ckpt", smp_ckpt, "checkpoint")->required();
    smp->add_option("--lrms", smp_lrms, "LRMS input (pre-upsampled)")->required();
    smp->add_option("--pan", smp_pan, "PAN input")->required();
    smp->add_option("--out", smp_out, "fused output")->required();
    smp->add_option("--seed", smp_seed, "sampling seed")->capture_default_str();
    add_schedule_flags(smp, smp_sched);

    // eval
    auto* ev = app.add_subcommand("eval", "reduced-resolution fusion metrics over two directories");
    fs::path ev_pred, ev_gt, ev_data_dir, ev_dump_cond;
    std::string ev_csv = "-";
    double ev_ratio = 4.0;
    int ev_threads = 0;
    ev->add_option("--pred", ev_pred, "directory of predictions");
    ev->add_option("--gt", ev_gt, "directory of references");
    ev->add_option("--csv", ev_csv, "output CSV path, - for stdout")->capture_default_str();
    ev->add_option("--ratio", ev_ratio, "resolution ratio for ERGAS")->capture_default_str();
    ev->add_option("--threads", ev_threads, "worker threads (0 = RESPAN_THREADS or 1)")
        ->capture_default_str();
    ev->add_option("--data-dir", ev_data_dir, "dataset directory for --dump-cond");
    ev->add_option("--dump-cond", ev_dump_cond, "write conditioning tensors here and exit");

    // schedule
    auto* sch = app.add_subcommand("schedule", "emit the noise schedule as CSV");
    ScheduleArgs sch_args;
    std::string sch_csv = "-";
    add_schedule_flags(sch, sch_args);
    sch->add_option("--csv", sch_csv, "output CSV path, - for stdout")->capture_default_str();

    // trajectory
    auto* traj = app.add_subcommand("trajectory", "2D transport straightness lab");
    std::string traj_pairing = "shift";
    int traj_n = 50;
    ScheduleArgs traj_sched;
    int traj_samples = 512, traj_epochs = 400, traj_hidden = 32;
    double traj_lr = 1e-2;
    std::string traj_prefix = "runs/traj";
    std::uint64_t traj_seed = 0;
    bool traj_oracle = false, traj_zero_noise = false;
    traj->add_option("--pairing", traj_pairing, "source-target map")
        ->check(CLI::IsMember({"identity", "shift", "swirl"}))
        ->capture_default_str();
    traj->add_option("--n", traj_n, "trajectories to roll")->capture_default_str();
    add_schedule_flags(traj, traj_sched);
    traj->add_option("--samples", traj_samples, "training points")->capture_default_str();
    traj->add_option("--epochs", traj_epochs, "toy training epochs")->capture_default_str();
    traj->add_option("--hidden", traj_hidden, "toy network width")->capture_default_str();
    traj->add_option("--lr", traj_lr, "toy learning rate")->capture_default_str();
    traj->add_option("--out-prefix", traj_prefix, "output prefix for .csv/.svg")
        ->capture_default_str();
    traj->add_option("--seed", traj_seed, "master seed")->capture_default_str();
    traj->add_flag("--oracle", traj_oracle, "use the exact residual instead of training");
    traj->add_flag("--zero-noise", traj_zero_noise, "suppress chain noise (geometry only)");

    // verify
    auto* ver = app.add_subcommand("verify", "run the numerical property suite");
    std::uint64_t ver_seed = 0;
    ver->add_option("--seed", ver_seed, "master seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (gen->parsed()) {
            scene_cfg.seed = gen_seed;
            const int threads = resolve_threads(gen_threads);
            ConfigEcho echo("gen-data");
            echo.kv("out", gen_out.string())
                .kv("count", gen_count)
                .kv("size", scene_cfg.size)
                .kv("bands", scene_cfg.bands)
                .kv("scale", scene_cfg.scale)
                .kv("blobs", scene_cfg.blobs)
                .kv("blur_sigma", scene_cfg.blur_sigma)
                .kv("seed", gen_seed)
                .kv("threads", threads);
            echo.print();
            return cmd_gen_data(gen_out, gen_count, scene_cfg, threads);
        }
        if (train->parsed()) {
            train_cfg.loss = train_loss == "res"  ? LossKind::res
                             : train_loss == "l1" ? LossKind::l1
                                                  : LossKind::l2;
            train_cfg.input_is_latent = train_input == "xt";
            train_cfg.use_condition = !no_sci;
            train_cfg.sched = {train_sched.T, train_sched.p, train_sched.kappa};
            ConfigEcho echo("train");
            echo.kv("data_dir", train_cfg.data_dir.string())
                .kv("ckpt", train_cfg.ckpt_out.string())
                .kv("log", train_cfg.log_csv.string())
                .kv("epochs", train_cfg.epochs)
                .kv("lr", train_cfg.lr)
                .kv("loss", train_loss)
                .kv("gamma", train_cfg.gamma)
                .kv("T", train_sched.T)
                .kv("p", train_sched.p)
                .kv("kappa", train_sched.kappa)
                .kv("seed", train_cfg.seed)
                .kv("input", train_input)
                .kv("sci", train_cfg.use_condition ? 1 : 0)
                .kv("hidden", train_cfg.hidden)
                .kv("blocks", train_cfg.blocks)
                .kv("accum", train_cfg.accum)
                .kv("val_count", train_cfg.val_count)
                .kv("val_every", train_cfg.val_every)
                .kv("weight_decay", train_cfg.weight_decay)
                .kv("per_band_penalty", train_cfg.per_band_penalty ? 1 : 0);
            echo.print();
            return cmd_train(train_cfg);
        }
        if (smp->parsed()) {
            ConfigEcho echo("sample");
            echo.kv("ckpt", smp_ckpt.string())
                .kv("lrms", smp_lrms.string())
                .kv("pan", smp_pan.string())
                .kv("out", smp_out.string())
                .kv("seed", smp_seed)
                .kv("T", smp_sched.T)
                .kv("p", smp_sched.p)
                .kv("kappa", smp_sched.kappa);
            echo.print();
            return cmd_sample(smp_ckpt, smp_lrms, smp_pan, smp_out, smp_seed, smp_sched);
        }
        if (ev->parsed()) {
            const int threads = resolve_threads(ev_threads);
            ConfigEcho echo("eval");
            echo.kv("pred", ev_pred.string())
                .kv("gt", ev_gt.string())
                .kv("csv", ev_csv)
                .kv("ratio", ev_ratio)
                .kv("threads", threads)
                .kv("data_dir", ev_data_dir.string())
                .kv("dump_cond", ev_dump_cond.string());
            echo.print();
            if (ev_dump_cond.empty() && (ev_pred.empty() || ev_gt.empty())) {
                std::cerr << "eval: --pred and --gt are required unless --dump-cond is used\n";
                return 2;
            }
            return cmd_eval(ev_pred, ev_gt, ev_csv, ev_ratio, threads, ev_data_dir, ev_dump_cond);
        }
        if (sch->parsed()) {
            ConfigEcho echo("schedule");
            echo.kv("T", sch_args.T).kv("p", sch_args.p).kv("kappa", sch_args.kappa).kv("csv",
                                                                                        sch_csv);
            echo.print();
            return cmd_schedule(sch_args, sch_csv);
        }
        if (traj->parsed()) {
            ConfigEcho echo("trajectory");
            echo.kv("pairing", traj_pairing)
                .kv("n", traj_n)
                .kv("T", traj_sched.T)
                .kv("p", traj_sched.p)
                .kv("kappa", traj_sched.kappa)
                .kv("samples", traj_samples)
                .kv("epochs", traj_epochs)
                .kv("hidden", traj_hidden)
                .kv("lr", traj_lr)
                .kv("out_prefix", traj_prefix)
                .kv("seed", traj_seed)
                .kv("oracle", traj_oracle ? 1 : 0)
                .kv("zero_noise", traj_zero_noise ? 1 : 0);
            echo.print();
            return cmd_trajectory(traj_pairing, traj_n, traj_sched, traj_samples, traj_epochs,
                                  traj_hidden, traj_lr, traj_prefix, traj_seed, traj_oracle,
                                  traj_zero_noise);
        }
        if (ver->parsed()) {
            ConfigEcho echo("verify");
            echo.kv("seed", ver_seed);
            echo.print();
            return cmd_verify(ver_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace respan
