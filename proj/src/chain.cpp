#include "respan/chain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace respan {

namespace {

void check_step(int t, const ScheduleTable& tab, const char* what) {
    if (t < 1 || t > tab.steps()) {
        throw std::invalid_argument(std::string(what) + ": t = " + std::to_string(t) +
                                    " outside [1," + std::to_string(tab.steps()) + "]");
    }
}

} // namespace

ImageTensor forward_step(const ImageTensor& e_prev, const ImageTensor& e_0, int t,
                         const ScheduleTable& tab, SeededGaussian& rng) {
    check_same_shape(e_prev, e_0, "forward_step");
    check_step(t, tab, "forward_step");
    const double a = tab.alpha_at(t);
    const double sd = tab.kappa * std::sqrt(a);
    ImageTensor out(e_prev.bands(), e_prev.height(), e_prev.width());
    const auto pp = e_prev.data();
    const auto p0 = e_0.data();
    auto po = out.data();
    for (std::size_t i = 0; i < po.size(); ++i) {
        po[i] = pp[i] - a * p0[i] + sd * rng.normal();
    }
    return out;
}

ImageTensor forward_marginal(const ImageTensor& e_0, int t, const ScheduleTable& tab,
                             SeededGaussian& rng) {
    check_step(t, tab, "forward_marginal");
    const auto m = marginal_params(tab, t);
    ImageTensor out(e_0.bands(), e_0.height(), e_0.width());
    const auto p0 = e_0.data();
    auto po = out.data();
    for (std::size_t i = 0; i < po.size(); ++i) {
        po[i] = m.coeff * p0[i] + m.stddev * rng.normal();
    }
    return out;
}

PosteriorParams posterior(const ImageTensor& e_t, const ImageTensor& e_0_hat, int t,
                          const ScheduleTable& tab) {
    check_same_shape(e_t, e_0_hat, "posterior");
    check_step(t, tab, "posterior");
    if (t == 1) {
        // abar_0 = 0 collapses the posterior onto the prediction.
        return PosteriorParams{e_0_hat, 0.0};
    }
    const double abar_t = tab.alpha_bar_at(t);
    const double abar_prev = tab.alpha_bar_at(t - 1);
    const double a = tab.alpha_at(t);
    const double w_prev = abar_prev / abar_t;
    const double w_pred = a / abar_t;
    ImageTensor mean(e_t.bands(), e_t.height(), e_t.width());
    const auto pt = e_t.data();
    const auto ph = e_0_hat.data();
    auto pm = mean.data();
    for (std::size_t i = 0; i < pm.size(); ++i) {
        pm[i] = w_prev * pt[i] + w_pred * ph[i];
    }
    const double sd = tab.kappa * std::sqrt(w_prev * a);
    return PosteriorParams{std::move(mean), sd};
}

TrainingSample make_training_sample(const ImageTensor& x_0, const ImageTensor& x_T,
                                    const ScheduleTable& tab, SeededGaussian& rng) {
    check_same_shape(x_0, x_T, "make_training_sample");
    const int t = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(tab.steps()))) + 1;
    TrainingSample s;
    s.t = t;
    s.e_0 = sub(x_0, x_T);
    s.e_t = forward_marginal(s.e_0, t, tab, rng);
    s.x_t = add(s.e_t, x_T);
    return s;
}

SampleResult sample(const ImageTensor& x_T, const ConditionSet& cond, const Predictor& predictor,
                    const ScheduleTable& tab, SeededGaussian& rng) {
    SampleResult res;
    ImageTensor e_t =
        gaussian_field(rng, x_T.bands(), x_T.height(), x_T.width(), 0.0, tab.kappa);
    for (int t = tab.steps(); t >= 1; --t) {
        const ImageTensor x_t = add(e_t, x_T);
        ImageTensor e_0_hat = predictor(x_t, cond, t);
        ++res.predictor_calls;
        check_same_shape(e_0_hat, x_T, "sample: predictor output");
        PosteriorParams post = posterior(e_t, e_0_hat, t, tab);
        if (post.stddev == 0.0) {
            e_t = std::move(post.mean);
        } else {
            auto pm = post.mean.data();
            for (std::size_t i = 0; i < pm.size(); ++i) pm[i] += post.stddev * rng.normal();
            e_t = std::move(post.mean);
        }
    }
    res.e_0_hat = std::move(e_t);
    res.x_0_hat = clamp(add(res.e_0_hat, x_T), 0.0, 1.0);
    return res;
}

} // namespace respan
