#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "respan/schedule.hpp"

using namespace respan;

TEST_CASE("endpoints: abar(0) = 0 and abar(T) = 1 exactly") {
    const ScheduleTable tab = build_schedule({15, 8e-3, 1.0});
    CHECK(tab.alpha_bar_at(0) == 0.0);
    CHECK(tab.alpha_bar_at(15) == 1.0);

    double sum = 0.0;
    for (int t = 1; t <= 15; ++t) sum += tab.alpha_at(t);
    CHECK(std::abs(sum - 1.0) <= 1e-15);
}

TEST_CASE("early-step accumulation grows with p") {
    const double ps[3] = {8e-3, 8e-2, 8e-1};
    double prev = -1.0;
    for (double p : ps) {
        const ScheduleTable tab = build_schedule({15, p, 1.0});
        CHECK(tab.alpha_bar_at(1) > prev);
        prev = tab.alpha_bar_at(1);
    }
    // and pointwise over the interior for a pair of schedules
    const ScheduleTable lo = build_schedule({15, 8e-3, 1.0});
    const ScheduleTable hi = build_schedule({15, 8e-1, 1.0});
    for (int t = 1; t <= 14; ++t) CHECK(hi.alpha_bar_at(t) > lo.alpha_bar_at(t));
}

TEST_CASE("increments stay positive across a (T,p) grid") {
    for (int T : {1, 3, 15, 64, 200}) {
        for (double p : {1e-3, 8e-3, 0.1, 0.8, 2.0}) {
            const ScheduleTable tab = build_schedule({T, p, 1.0});
            for (int t = 1; t <= T; ++t) {
                CHECK(tab.alpha_at(t) > 0.0);
                CHECK(tab.alpha_bar_at(t) > tab.alpha_bar_at(t - 1));
            }
        }
    }
}

// Independent route: the same cosine expression evaluated in extended
// precision.
static long double abar_ref(int t, int T, long double p) {
    const long double pi_half = std::acos(-1.0L) / 2.0L;
    const auto f = [&](long double x) {
        return std::cos((x / T + p) / (1.0L + p) * pi_half);
    };
    return 1.0L - f(static_cast<long double>(t)) / f(0.0L);
}

TEST_CASE("marginal params at t=8 match an extended-precision evaluation") {
    const ScheduleTable tab = build_schedule({15, 8e-3, 1.0});
    const long double want_abar = abar_ref(8, 15, 8e-3L);
    const auto m = marginal_params(tab, 8);
    CHECK(std::abs(static_cast<double>(want_abar) - tab.alpha_bar_at(8)) < 1e-14);
    CHECK(std::abs(m.stddev - static_cast<double>(std::sqrt(want_abar))) < 1e-14);
    CHECK(std::abs(m.coeff - static_cast<double>(1.0L - want_abar)) < 1e-14);

    // kappa scales the stddev only
    const ScheduleTable scaled = build_schedule({15, 8e-3, 2.5});
    CHECK(marginal_params(scaled, 8).stddev == doctest::Approx(2.5 * m.stddev).epsilon(1e-14));
    CHECK(marginal_params(scaled, 8).coeff == m.coeff);
}

TEST_CASE("marginal params at the endpoints") {
    const ScheduleTable tab = build_schedule({15, 8e-3, 1.3});
    const auto at_T = marginal_params(tab, 15);
    CHECK(at_T.coeff == 0.0);
    CHECK(at_T.stddev == 1.3);

    // t -> 0 limit is (1, 0): left implicit in the table, checked via t=1
    const auto at_1 = marginal_params(tab, 1);
    CHECK(at_1.coeff == doctest::Approx(1.0 - tab.alpha_bar_at(1)));
    CHECK(at_1.stddev > 0.0);

    double prev = 0.0;
    for (int t = 1; t <= 15; ++t) {
        const double sd = marginal_params(tab, t).stddev;
        CHECK(sd >= prev);
        prev = sd;
    }
}

TEST_CASE("bad configs and out-of-range queries throw") {
    CHECK_THROWS_AS(build_schedule({0, 8e-3, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_schedule({15, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_schedule({15, -1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_schedule({15, 8e-3, 0.0}), std::invalid_argument);

    const ScheduleTable tab = build_schedule({15, 8e-3, 1.0});
    CHECK_THROWS_AS(marginal_params(tab, 0), std::invalid_argument);
    CHECK_THROWS_AS(marginal_params(tab, 16), std::invalid_argument);
    CHECK_THROWS_AS(tab.alpha_at(0), std::invalid_argument);
    CHECK_THROWS_AS(tab.alpha_bar_at(-1), std::invalid_argument);
}

TEST_CASE("T = 1 degenerates to a single full-size step") {
    const ScheduleTable tab = build_schedule({1, 8e-3, 1.0});
    CHECK(tab.alpha_at(1) == 1.0);
    CHECK(tab.alpha_bar_at(1) == 1.0);
}
