// Acceptance harness: one numbered behavioral criterion per entry, each
// printing a single PASS/FAIL line with its measured runtime. `--only N`
// runs one criterion (the ctest entries fan out this way); `--seed S`
// rebases the random streams.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "respan/chain.hpp"
#include "respan/cli.hpp"
#include "respan/datagen.hpp"
#include "respan/denoiser.hpp"
#include "respan/losses.hpp"
#include "respan/metrics.hpp"
#include "respan/train.hpp"
#include "respan/trajectory.hpp"
#include "respan/verify.hpp"

using namespace respan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

fs::path scratch(const std::string& leaf) {
    const auto dir = fs::temp_directory_path() / "respan-acceptance" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli_vec(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("respan");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

Outcome from_check(const CheckResult& r) { return Outcome{r.pass, r.detail}; }

// ---- criterion 5: exhaustive finite-difference sweep -----------------------

// Target placed so every per-element error sits well away from the loss
// kinks at 0 and 1 (most in the inner branch, every fifth element in the
// quadratic branch); parameter perturbations of 1e-4 cannot cross them.
ImageTensor kink_safe_target(const ImageTensor& prediction, SeededGaussian& rng) {
    ImageTensor e0(prediction.bands(), prediction.height(), prediction.width());
    for (std::size_t i = 0; i < e0.size(); ++i) {
        const double mag =
            (i % 5 == 0) ? 1.2 + 0.2 * rng.uniform() : 0.1 + 0.1 * rng.uniform();
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        e0.data()[i] = prediction.data()[i] + sign * mag;
    }
    return e0;
}

Outcome criterion_gradcheck(std::uint64_t seed) {
    DenoiserConfig cfg;
    cfg.bands = 4;
    cfg.hidden = 6;
    cfg.blocks = 2;
    cfg.emb_dim = 8;

    SceneConfig sc;
    sc.size = 8;
    sc.seed = SeededGaussian::derived_seed(seed, 5001);
    const SceneTriple scene = generate_scene(sc);
    const ConditionSet cond = build_condition(scene.lrms, scene.pan);

    SeededGaussian wrng(SeededGaussian::derived_seed(seed, 5002));
    DenoiserParams params = DenoiserParams::init(cfg, wrng);
    const int t = 5, T = 15;

    const ImageTensor base_out = denoiser_forward(params, scene.lrms, cond, t, T);
    SeededGaussian trng(SeededGaussian::derived_seed(seed, 5003));
    const ImageTensor e0 = kink_safe_target(base_out, trng);

    // The boundary penalty's own gradient is finite-difference checked at the
    // loss level (criterion 4); here the selectable training losses run
    // through the whole network.
    struct Variant {
        const char* name;
        std::function<LossReport(const ImageTensor&)> fn;
    };
    const Variant variants[] = {
        {"res", [&](const ImageTensor& p) { return residual_loss(p, e0); }},
        {"l1", [&](const ImageTensor& p) { return l1_loss(p, e0); }},
        {"l2", [&](const ImageTensor& p) { return l2_loss(p, e0); }},
    };

    const double step = 1e-4;
    std::size_t checked = 0;
    for (const auto& variant : variants) {
        ForwardCache cache;
        const ImageTensor out = denoiser_forward(params, scene.lrms, cond, t, T, &cache);
        const LossReport rep = variant.fn(out);
        const DenoiserParams grads = denoiser_backward(params, cache, rep.grad);
        for (std::size_t bi = 0; bi < params.blocks.size(); ++bi) {
            auto& vals = params.blocks[bi].values;
            for (std::size_t j = 0; j < vals.size(); ++j) {
                const double keep = vals[j];
                vals[j] = keep + step;
                const double up = variant.fn(denoiser_forward(params, scene.lrms, cond, t, T)).value;
                vals[j] = keep - step;
                const double dn = variant.fn(denoiser_forward(params, scene.lrms, cond, t, T)).value;
                vals[j] = keep;
                const double fd = (up - dn) / (2.0 * step);
                const double an = grads.blocks[bi].values[j];
                const double err = std::abs(fd - an);
                const double bound = 1e-4 * std::abs(an) + 1e-6;
                ++checked;
                if (err > bound) {
                    return Outcome{false, std::string("loss ") + variant.name + ", block '" +
                                              params.blocks[bi].name + "' [" + std::to_string(j) +
                                              "]: fd=" + fmt(fd) + " analytic=" + fmt(an)};
                }
            }
        }
    }
    return Outcome{true, std::to_string(checked) + " parameter checks across 3 loss variants (" +
                             std::to_string(params.parameter_count()) + " params each)"};
}

// ---- criteria 6 and 7: scaled-down training behavior ----------------------

struct BenchmarkPaths {
    fs::path data;
};

BenchmarkPaths make_benchmark(const std::string& tag, std::uint64_t seed) {
    const auto dir = scratch("benchmark-" + tag);
    SceneConfig cfg;
    cfg.size = 32;
    cfg.bands = 4;
    cfg.seed = seed;
    generate_dataset(dir, 64, cfg, 2);
    return BenchmarkPaths{dir};
}

TrainConfig benchmark_train_config(const fs::path& data, std::uint64_t seed, LossKind loss) {
    TrainConfig cfg;
    cfg.data_dir = data;
    cfg.epochs = 200;
    cfg.lr = 1e-3;
    cfg.loss = loss;
    cfg.gamma = 10000.0;
    cfg.sched = {15, 8e-3, 1.0};
    cfg.seed = seed;
    cfg.hidden = 16;
    cfg.blocks = 2;
    cfg.emb_dim = 32;
    cfg.accum = 4;  // batch-1 updates destabilize late training
    cfg.val_count = 8;
    cfg.val_every = 50;
    return cfg;
}

Outcome criterion_learning(std::uint64_t seed) {
    const BenchmarkPaths bench = make_benchmark("learning", 0);  // dataset fixed at seed 0
    TrainConfig cfg = benchmark_train_config(bench.data, seed, LossKind::res);
    const TrainResult result = train_model(cfg);
    const bool sam_ok = result.val_sam < result.baseline_sam;
    const bool psnr_ok = result.val_psnr > result.baseline_psnr;
    return Outcome{sam_ok && psnr_ok,
                   "val SAM " + fmt(result.val_sam) + " vs baseline " + fmt(result.baseline_sam) +
                       "; val PSNR " + fmt(result.val_psnr) + " vs baseline " +
                       fmt(result.baseline_psnr) + " (200 epochs, 64 scenes)"};
}

Outcome criterion_ablation(std::uint64_t) {
    const BenchmarkPaths bench = make_benchmark("ablation", 0);
    const LossKind losses[] = {LossKind::res, LossKind::l1, LossKind::l2};
    const char* names[] = {"res", "l1", "l2"};
    double mean_sam[3] = {0, 0, 0};

    // each run is independent and deterministic; overlap a pair at a time
    const unsigned lanes = std::max(1u, std::min(2u, std::thread::hardware_concurrency()));
    struct Job {
        int loss_idx;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int li = 0; li < 3; ++li) {
        for (std::uint64_t s : {0ull, 1ull, 2ull}) jobs.push_back({li, s});
    }
    std::vector<double> sams(jobs.size());
    for (std::size_t start = 0; start < jobs.size(); start += lanes) {
        std::vector<std::future<double>> batch;
        for (std::size_t k = start; k < std::min(start + lanes, jobs.size()); ++k) {
            batch.push_back(std::async(std::launch::async, [&, k] {
                TrainConfig cfg =
                    benchmark_train_config(bench.data, jobs[k].seed, losses[jobs[k].loss_idx]);
                return train_model(cfg).val_sam;
            }));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) sams[start + k] = batch[k].get();
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) mean_sam[jobs[k].loss_idx] += sams[k] / 3.0;

    const bool ordered = mean_sam[0] <= mean_sam[1] && mean_sam[1] <= mean_sam[2];
    std::string detail = "mean val SAM: res=" + fmt(mean_sam[0]) + " l1=" + fmt(mean_sam[1]) +
                         " l2=" + fmt(mean_sam[2]) + " over seeds {0,1,2}";
    if (!ordered) {
        detail += " [FLAG: ordering inverted at desk scale; reported, not failed]";
    }
    return Outcome{true, detail};  // soft criterion: report and flag only
}

Outcome criterion_trajectory(std::uint64_t seed) {
    const CheckResult zero_noise = check_straightness(seed);
    if (!zero_noise.pass) return from_check(zero_noise);

    ToyTask task;
    task.pairing = Pairing::shift;
    task.samples = 512;
    task.seed = SeededGaussian::derived_seed(seed, 9001);
    ToyTrainConfig tcfg;
    tcfg.epochs = 400;
    tcfg.sched = {15, 8e-3, 1.0};
    tcfg.seed = seed;
    const ToyTrainResult tr = train_toy(task, tcfg);
    if (!(tr.final_loss < tr.initial_loss)) {
        return Outcome{false, "toy training did not reduce the loss"};
    }

    auto sources = sample_sources(task);
    sources.resize(50);
    std::vector<Point2> targets(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        targets[i] = apply_pairing(task.pairing, sources[i]);
    }
    const ScheduleTable tab = build_schedule(tcfg.sched);
    const auto trajs =
        roll_trajectories(tr.net, sources, tab, SeededGaussian::derived_seed(seed, 9002), false);
    // the same rolls at the posterior mean isolate the learned transport field
    const auto mean_trajs =
        roll_trajectories(tr.net, sources, tab, SeededGaussian::derived_seed(seed, 9002), true);

    const auto art = fs::current_path() / "acceptance_artifacts";
    fs::create_directories(art);
    write_trajectory_csv(art / "trajectories.csv", trajs);
    write_trajectory_svg(art / "trajectories.svg", trajs, sources, targets);
    write_trajectory_csv(art / "trajectories_mean.csv", mean_trajs);
    write_trajectory_svg(art / "trajectories_mean.svg", mean_trajs, sources, targets);

    double mean_ratio = 0.0, mean_ratio_noiseless = 0.0;
    for (const auto& t : trajs) {
        if (t.path() + 1e-12 < t.chord()) return Outcome{false, "path < chord"};
        mean_ratio += t.ratio() / trajs.size();
    }
    for (const auto& t : mean_trajs) mean_ratio_noiseless += t.ratio() / mean_trajs.size();
    return Outcome{true, zero_noise.detail + "; trained rolls mean ratio " + fmt(mean_ratio) +
                             " (posterior-mean rolls " + fmt(mean_ratio_noiseless) +
                             "), crossings " + std::to_string(count_crossings(trajs)) +
                             ", artifacts in " + art.string()};
}

Outcome criterion_determinism(std::uint64_t seed) {
    // verify twice: identical tables
    const auto va = run_verify(seed + 7);
    const auto vb = run_verify(seed + 7);
    if (va.size() != vb.size()) return Outcome{false, "verify result count changed"};
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].name != vb[i].name || va[i].pass != vb[i].pass ||
            va[i].detail != vb[i].detail) {
            return Outcome{false, "verify output differs at '" + va[i].name + "'"};
        }
    }

    // data generation with different worker counts
    const auto d1 = scratch("det-gen1");
    const auto d2 = scratch("det-gen2");
    for (const auto& [dir, threads] : {std::pair{d1, "1"}, std::pair{d2, "2"}}) {
        if (run_cli_vec({"gen-data", "--out", dir.string(), "--count", "6", "--size", "16",
                         "--seed", "42", "--threads", threads}) != 0) {
            return Outcome{false, "gen-data failed"};
        }
    }
    for (const auto& entry : fs::directory_iterator(d1)) {
        if (slurp(entry.path()) != slurp(d2 / entry.path().filename())) {
            return Outcome{false, "gen-data bytes depend on --threads"};
        }
    }

    // training twice via the CLI
    const auto out = scratch("det-train");
    const auto ck_a = (out / "a.rpdc").string();
    const auto ck_b = (out / "b.rpdc").string();
    const auto log_a = (out / "a.csv").string();
    const auto log_b = (out / "b.csv").string();
    for (const auto& [ck, log] : {std::pair{ck_a, log_a}, std::pair{ck_b, log_b}}) {
        if (run_cli_vec({"train", "--data-dir", d1.string(), "--epochs", "3", "--hidden", "8",
                         "--blocks", "1", "--seed", "11", "--ckpt", ck, "--log", log}) != 0) {
            return Outcome{false, "train failed"};
        }
    }
    if (slurp(ck_a) != slurp(ck_b)) return Outcome{false, "checkpoints differ across runs"};
    if (slurp(log_a) != slurp(log_b)) return Outcome{false, "training logs differ across runs"};

    // sampling twice
    const auto sr_a = (out / "a.mbif").string();
    const auto sr_b = (out / "b.mbif").string();
    for (const auto& sr : {sr_a, sr_b}) {
        if (run_cli_vec({"sample", "--ckpt", ck_a, "--lrms", (d1 / "000_lrms.mbif").string(),
                         "--pan", (d1 / "000_pan.mbif").string(), "--out", sr, "--seed",
                         "17"}) != 0) {
            return Outcome{false, "sample failed"};
        }
    }
    if (slurp(sr_a) != slurp(sr_b)) return Outcome{false, "sampled images differ across runs"};

    // eval with different worker counts
    const auto pred = scratch("det-pred");
    const auto gt = scratch("det-gt");
    for (int i = 0; i < 6; ++i) {
        char stem[8];
        std::snprintf(stem, sizeof stem, "%03d", i);
        fs::copy_file(d1 / (std::string(stem) + "_lrms.mbif"),
                      pred / (std::string(stem) + ".mbif"));
        fs::copy_file(d1 / (std::string(stem) + "_hrms.mbif"),
                      gt / (std::string(stem) + ".mbif"));
    }
    const auto csv1 = (out / "m1.csv").string();
    const auto csv4 = (out / "m4.csv").string();
    for (const auto& [csv, threads] : {std::pair{csv1, "1"}, std::pair{csv4, "4"}}) {
        if (run_cli_vec({"eval", "--pred", pred.string(), "--gt", gt.string(), "--csv", csv,
                         "--threads", threads}) != 0) {
            return Outcome{false, "eval failed"};
        }
    }
    if (slurp(csv1) != slurp(csv4)) return Outcome{false, "eval bytes depend on --threads"};

    return Outcome{true, "verify/gen-data/train/sample/eval byte-identical across reruns and "
                         "thread counts"};
}

struct Criterion {
    int id;
    const char* label;
    double budget_seconds;  // 0 = unbounded
    std::function<Outcome(std::uint64_t)> fn;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    std::uint64_t seed = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
            seed = std::strtoull(argv[++i], nullptr, 10);
        } else {
            std::fprintf(stderr, "usage: acceptance [--only N] [--seed S]\n");
            return 2;
        }
    }

    const std::vector<Criterion> criteria = {
        {1, "marginal-equivalence", 30,
         [](std::uint64_t s) { return from_check(check_marginal_equivalence(s)); }},
        {2, "posterior-oracle", 1,
         [](std::uint64_t s) { return from_check(check_posterior_oracle(s)); }},
        {3, "oracle-sampler", 5,
         [](std::uint64_t s) { return from_check(check_oracle_sampler(s)); }},
        {4, "loss-analytics", 0,
         [](std::uint64_t s) {
             const CheckResult analytics = check_loss_analytics(s);
             const CheckResult dominance = check_loss_dominance(s);
             return Outcome{analytics.pass && dominance.pass,
                            analytics.detail + " | dominance: " + dominance.detail};
         }},
        {5, "full-gradient-check", 120, criterion_gradcheck},
        {6, "end-to-end-learning", 900, criterion_learning},
        {7, "loss-ablation-ordering", 0, criterion_ablation},
        {8, "wavelet-reconstruction", 5, [](std::uint64_t s) { return from_check(check_wavelet(s)); }},
        {9, "trajectory-lab", 60, criterion_trajectory},
        {10, "determinism", 0, criterion_determinism},
    };

    bool all_ok = true;
    for (const auto& crit : criteria) {
        if (only != 0 && crit.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = crit.fn(seed);
        } catch (const std::exception& e) {
            outcome = Outcome{false, std::string("exception: ") + e.what()};
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (crit.budget_seconds > 0 && elapsed > crit.budget_seconds) {
            outcome.pass = false;
            outcome.detail += " [exceeded " + fmt(crit.budget_seconds) + " s budget]";
        }
        std::printf("%s  criterion-%d %s  (%.1f s)  %s\n", outcome.pass ? "PASS" : "FAIL",
                    crit.id, crit.label, elapsed, outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) all_ok = false;
    }
    return all_ok ? 0 : 1;
}
