#include "respan/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "respan/chain.hpp"
#include "respan/optimizer.hpp"

namespace respan {

Pairing pairing_from_string(const std::string& s) {
    if (s == "identity") return Pairing::identity;
    if (s == "shift") return Pairing::shift;
    if (s == "swirl") return Pairing::swirl;
    throw std::invalid_argument("unknown pairing '" + s + "'");
}

Point2 apply_pairing(Pairing pairing, const Point2& x) {
    switch (pairing) {
        case Pairing::identity:
            return x;
        case Pairing::shift:
            return Point2{x[0] + 1.0, x[1] + 1.0};
        case Pairing::swirl: {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            const double theta = 2.5 * std::exp(-r2 / 8.0);
            const double c = std::cos(theta), s = std::sin(theta);
            return Point2{c * x[0] - s * x[1], s * x[0] + c * x[1]};
        }
    }
    throw std::invalid_argument("unknown pairing");
}

std::vector<Point2> sample_sources(const ToyTask& task) {
    if (task.samples < 1) throw std::invalid_argument("toy task: samples must be >= 1");
    // three-lobe Gaussian mixture
    static constexpr Point2 kCenters[3] = {{-2.0, -1.0}, {2.0, -1.0}, {0.0, 1.8}};
    SeededGaussian rng(task.seed);
    std::vector<Point2> pts(static_cast<std::size_t>(task.samples));
    for (auto& p : pts) {
        const auto& c = kCenters[rng.uniform_below(3)];
        p = Point2{c[0] + 0.45 * rng.normal(), c[1] + 0.45 * rng.normal()};
    }
    return pts;
}

Point2 ToyNet::predict(const Point2& pos, double tau) const {
    const int h = hidden;
    const double in[3] = {pos[0], pos[1], tau};
    std::vector<double> a1(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i) {
        double z = b1[static_cast<std::size_t>(i)];
        for (int j = 0; j < 3; ++j) z += w1[static_cast<std::size_t>(i) * 3 + j] * in[j];
        a1[static_cast<std::size_t>(i)] = std::tanh(z);
    }
    std::vector<double> a2(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i) {
        double z = b2[static_cast<std::size_t>(i)];
        for (int j = 0; j < h; ++j) z += w2[static_cast<std::size_t>(i) * h + j] * a1[static_cast<std::size_t>(j)];
        a2[static_cast<std::size_t>(i)] = std::tanh(z);
    }
    Point2 out{};
    for (int i = 0; i < 2; ++i) {
        double z = b3[static_cast<std::size_t>(i)];
        for (int j = 0; j < h; ++j) z += w3[static_cast<std::size_t>(i) * h + j] * a2[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = z;
    }
    return out;
}

ToyTrainResult train_toy(const ToyTask& task, const ToyTrainConfig& cfg) {
    if (task.samples < 100) throw std::invalid_argument("train_toy: needs at least 100 samples");
    const std::vector<Point2> sources = sample_sources(task);
    std::vector<Point2> residuals(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const Point2 tgt = apply_pairing(task.pairing, sources[i]);
        residuals[i] = Point2{tgt[0] - sources[i][0], tgt[1] - sources[i][1]};
    }

    const ScheduleTable tab = build_schedule(cfg.sched);
    const int h = cfg.hidden;

    ToyNet net;
    net.hidden = h;
    SeededGaussian rng(SeededGaussian::derived_seed(cfg.seed, 17));
    const auto init = [&](std::vector<double>& w, std::size_t n, double fan_in) {
        w.resize(n);
        const double bound = 1.0 / std::sqrt(fan_in);
        for (auto& v : w) v = rng.uniform(-bound, bound);
    };
    init(net.w1, static_cast<std::size_t>(h) * 3, 3.0);
    net.b1.assign(static_cast<std::size_t>(h), 0.0);
    init(net.w2, static_cast<std::size_t>(h) * h, h);
    net.b2.assign(static_cast<std::size_t>(h), 0.0);
    init(net.w3, 2 * static_cast<std::size_t>(h), h);
    net.b3.assign(2, 0.0);

    AdamWConfig opt_cfg;
    opt_cfg.lr = cfg.lr;
    opt_cfg.weight_decay = 0.0;
    AdamW opt(opt_cfg);

    std::vector<double> gw1(net.w1.size()), gb1(net.b1.size()), gw2(net.w2.size()),
        gb2(net.b2.size()), gw3(net.w3.size()), gb3(net.b3.size());
    const std::span<double> pspans[6] = {net.w1, net.b1, net.w2, net.b2, net.w3, net.b3};
    const std::span<const double> gspans[6] = {gw1, gb1, gw2, gb2, gw3, gb3};

    std::vector<std::size_t> order(sources.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    ToyTrainResult result;
    constexpr int kBatch = 32;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_below(i)]);
        }
        double epoch_loss = 0.0;
        int in_batch = 0;
        const auto zero_grads = [&] {
            std::fill(gw1.begin(), gw1.end(), 0.0);
            std::fill(gb1.begin(), gb1.end(), 0.0);
            std::fill(gw2.begin(), gw2.end(), 0.0);
            std::fill(gb2.begin(), gb2.end(), 0.0);
            std::fill(gw3.begin(), gw3.end(), 0.0);
            std::fill(gb3.begin(), gb3.end(), 0.0);
        };
        zero_grads();
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const std::size_t idx = order[oi];
            const int t = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(tab.steps()))) + 1;
            const auto m = marginal_params(tab, t);
            const Point2& e0 = residuals[idx];
            const Point2 e_t{m.coeff * e0[0] + m.stddev * rng.normal(),
                             m.coeff * e0[1] + m.stddev * rng.normal()};
            const Point2 x_t{e_t[0] + sources[idx][0], e_t[1] + sources[idx][1]};
            const double tau = static_cast<double>(t) / tab.steps();

            // forward, keeping activations
            const double in[3] = {x_t[0], x_t[1], tau};
            std::vector<double> z1(static_cast<std::size_t>(h)), a1(static_cast<std::size_t>(h));
            for (int i = 0; i < h; ++i) {
                double z = net.b1[static_cast<std::size_t>(i)];
                for (int j = 0; j < 3; ++j) z += net.w1[static_cast<std::size_t>(i) * 3 + j] * in[j];
                z1[static_cast<std::size_t>(i)] = z;
                a1[static_cast<std::size_t>(i)] = std::tanh(z);
            }
            std::vector<double> z2(static_cast<std::size_t>(h)), a2(static_cast<std::size_t>(h));
            for (int i = 0; i < h; ++i) {
                double z = net.b2[static_cast<std::size_t>(i)];
                for (int j = 0; j < h; ++j)
                    z += net.w2[static_cast<std::size_t>(i) * h + j] * a1[static_cast<std::size_t>(j)];
                z2[static_cast<std::size_t>(i)] = z;
                a2[static_cast<std::size_t>(i)] = std::tanh(z);
            }
            double out[2];
            for (int i = 0; i < 2; ++i) {
                double z = net.b3[static_cast<std::size_t>(i)];
                for (int j = 0; j < h; ++j)
                    z += net.w3[static_cast<std::size_t>(i) * h + j] * a2[static_cast<std::size_t>(j)];
                out[i] = z;
            }

            const double d0 = out[0] - e0[0];
            const double d1 = out[1] - e0[1];
            epoch_loss += 0.5 * (d0 * d0 + d1 * d1);

            // backward (loss = mean over the 2 components)
            const double gout[2] = {d0, d1};
            std::vector<double> ga2(static_cast<std::size_t>(h), 0.0);
            for (int i = 0; i < 2; ++i) {
                gb3[static_cast<std::size_t>(i)] += gout[i];
                for (int j = 0; j < h; ++j) {
                    gw3[static_cast<std::size_t>(i) * h + j] += gout[i] * a2[static_cast<std::size_t>(j)];
                    ga2[static_cast<std::size_t>(j)] += net.w3[static_cast<std::size_t>(i) * h + j] * gout[i];
                }
            }
            std::vector<double> ga1(static_cast<std::size_t>(h), 0.0);
            for (int i = 0; i < h; ++i) {
                const double gz = ga2[static_cast<std::size_t>(i)] *
                                  (1.0 - a2[static_cast<std::size_t>(i)] * a2[static_cast<std::size_t>(i)]);
                gb2[static_cast<std::size_t>(i)] += gz;
                for (int j = 0; j < h; ++j) {
                    gw2[static_cast<std::size_t>(i) * h + j] += gz * a1[static_cast<std::size_t>(j)];
                    ga1[static_cast<std::size_t>(j)] += net.w2[static_cast<std::size_t>(i) * h + j] * gz;
                }
            }
            for (int i = 0; i < h; ++i) {
                const double gz = ga1[static_cast<std::size_t>(i)] *
                                  (1.0 - a1[static_cast<std::size_t>(i)] * a1[static_cast<std::size_t>(i)]);
                gb1[static_cast<std::size_t>(i)] += gz;
                for (int j = 0; j < 3; ++j) gw1[static_cast<std::size_t>(i) * 3 + j] += gz * in[j];
            }

            if (++in_batch == kBatch || oi + 1 == order.size()) {
                const double inv = 1.0 / in_batch;
                for (auto* g : {&gw1, &gb1, &gw2, &gb2, &gw3, &gb3}) {
                    for (auto& v : *g) v *= inv;
                }
                opt.step(pspans, gspans);
                zero_grads();
                in_batch = 0;
            }
        }
        epoch_loss /= static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("train_toy: loss diverged at epoch " + std::to_string(epoch));
        }
        if (epoch == 1) result.initial_loss = epoch_loss;
        result.final_loss = epoch_loss;
    }
    result.net = std::move(net);
    return result;
}

double Trajectory::chord() const {
    if (points.size() < 2) return 0.0;
    const double dx = points.back()[0] - points.front()[0];
    const double dy = points.back()[1] - points.front()[1];
    return std::hypot(dx, dy);
}

double Trajectory::path() const {
    double s = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        s += std::hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]);
    }
    return s;
}

double Trajectory::ratio() const {
    const double c = chord();
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return path() / c;
}

namespace {

ImageTensor to_tensor(const Point2& p) {
    return ImageTensor(2, 1, 1, {p[0], p[1]});
}

Point2 from_tensor(const ImageTensor& t) { return Point2{t.data()[0], t.data()[1]}; }

std::vector<Trajectory> roll_impl(
    const std::function<Point2(std::size_t, const Point2&, int)>& predict,
    const std::vector<Point2>& sources, const ScheduleTable& tab, std::uint64_t seed,
    bool zero_noise) {
    std::vector<Trajectory> trajs(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        SeededGaussian rng(SeededGaussian::derived_seed(seed, i));
        const Point2& src = sources[i];
        Point2 e{0.0, 0.0};
        if (!zero_noise) {
            e[0] = tab.kappa * rng.normal();
            e[1] = tab.kappa * rng.normal();
        }
        Trajectory traj;
        traj.points.reserve(static_cast<std::size_t>(tab.steps()) + 1);
        traj.points.push_back(Point2{e[0] + src[0], e[1] + src[1]});
        for (int t = tab.steps(); t >= 1; --t) {
            const Point2 x_t{e[0] + src[0], e[1] + src[1]};
            const Point2 e0_hat = predict(i, x_t, t);
            const PosteriorParams post =
                posterior(to_tensor(e), to_tensor(e0_hat), t, tab);
            Point2 next = from_tensor(post.mean);
            if (!zero_noise && post.stddev > 0.0) {
                next[0] += post.stddev * rng.normal();
                next[1] += post.stddev * rng.normal();
            }
            e = next;
            traj.points.push_back(Point2{e[0] + src[0], e[1] + src[1]});
        }
        trajs[i] = std::move(traj);
    }
    return trajs;
}

} // namespace

std::vector<Trajectory> roll_trajectories(const ToyNet& net, const std::vector<Point2>& sources,
                                          const ScheduleTable& tab, std::uint64_t seed,
                                          bool zero_noise) {
    return roll_impl(
        [&](std::size_t, const Point2& x, int t) {
            return net.predict(x, static_cast<double>(t) / tab.steps());
        },
        sources, tab, seed, zero_noise);
}

std::vector<Trajectory> roll_oracle_trajectories(Pairing pairing,
                                                 const std::vector<Point2>& sources,
                                                 const ScheduleTable& tab, std::uint64_t seed,
                                                 bool zero_noise) {
    std::vector<Point2> residuals(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const Point2 tgt = apply_pairing(pairing, sources[i]);
        residuals[i] = Point2{tgt[0] - sources[i][0], tgt[1] - sources[i][1]};
    }
    return roll_impl(
        [&](std::size_t i, const Point2&, int) { return residuals[i]; },
        sources, tab, seed, zero_noise);
}

long count_crossings(const std::vector<Trajectory>& trajs) {
    struct Seg {
        Point2 a, b;
        std::size_t traj;
    };
    std::vector<Seg> segs;
    for (std::size_t ti = 0; ti < trajs.size(); ++ti) {
        const auto& pts = trajs[ti].points;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            segs.push_back(Seg{pts[i - 1], pts[i], ti});
        }
    }
    const auto orient = [](const Point2& a, const Point2& b, const Point2& c) {
        const double v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (v > 0.0) return 1;
        if (v < 0.0) return -1;
        return 0;
    };
    const auto on_seg = [](const Point2& a, const Point2& b, const Point2& p) {
        return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
               std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
    };
    long count = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            if (segs[i].traj == segs[j].traj) continue;
            const auto& s1 = segs[i];
            const auto& s2 = segs[j];
            const int o1 = orient(s1.a, s1.b, s2.a);
            const int o2 = orient(s1.a, s1.b, s2.b);
            const int o3 = orient(s2.a, s2.b, s1.a);
            const int o4 = orient(s2.a, s2.b, s1.b);
            bool hit = (o1 != o2 && o3 != o4);
            if (!hit) {
                hit = (o1 == 0 && on_seg(s1.a, s1.b, s2.a)) ||
                      (o2 == 0 && on_seg(s1.a, s1.b, s2.b)) ||
                      (o3 == 0 && on_seg(s2.a, s2.b, s1.a)) ||
                      (o4 == 0 && on_seg(s2.a, s2.b, s1.b));
            }
            if (hit) ++count;
        }
    }
    return count;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<Trajectory>& trajs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "traj_id,chord,path,ratio\n";
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        out << i << ',' << trajs[i].chord() << ',' << trajs[i].path() << ',' << trajs[i].ratio()
            << '\n';
    }
}

void write_trajectory_svg(const std::filesystem::path& path,
                          const std::vector<Trajectory>& trajs,
                          const std::vector<Point2>& sources,
                          const std::vector<Point2>& targets) {
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
    double hi_x = -lo_x, hi_y = -lo_x;
    const auto grow = [&](const Point2& p) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    };
    for (const auto& t : trajs) {
        for (const auto& p : t.points) grow(p);
    }
    for (const auto& p : sources) grow(p);
    for (const auto& p : targets) grow(p);
    if (!(hi_x > lo_x)) hi_x = lo_x + 1.0;
    if (!(hi_y > lo_y)) hi_y = lo_y + 1.0;

    constexpr double kSize = 640.0, kMargin = 40.0;
    const double sx = (kSize - 2 * kMargin) / (hi_x - lo_x);
    const double sy = (kSize - 2 * kMargin) / (hi_y - lo_y);
    const double s = std::min(sx, sy);
    const auto px = [&](const Point2& p) { return kMargin + (p[0] - lo_x) * s; };
    const auto py = [&](const Point2& p) { return kSize - kMargin - (p[1] - lo_y) * s; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize << " " << kSize << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& t : trajs) {
        out << "<polyline fill=\"none\" stroke=\"#2a9d8f\" stroke-width=\"1\" "
               "stroke-opacity=\"0.55\" points=\"";
        for (const auto& p : t.points) out << px(p) << ',' << py(p) << ' ';
        out << "\"/>\n";
    }
    for (const auto& p : sources) {
        out << "<circle cx=\"" << px(p) << "\" cy=\"" << py(p)
            << "\" r=\"2.2\" fill=\"#1d3557\" fill-opacity=\"0.7\"/>\n";
    }
    for (const auto& p : targets) {
        out << "<circle cx=\"" << px(p) << "\" cy=\"" << py(p)
            << "\" r=\"2.2\" fill=\"#e63946\" fill-opacity=\"0.7\"/>\n";
    }
    out << "</svg>\n";
}

} // namespace respan
