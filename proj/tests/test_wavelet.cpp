#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "respan/rng.hpp"
#include "respan/tensor.hpp"
#include "respan/wavelet.hpp"

using namespace respan;

TEST_CASE("constant image: approximation 2v, zero detail") {
    const ImageTensor img = constant(2, 4, 4, 0.5);
    const WaveletQuad q = db1_decompose(img);
    CHECK(q.ll.height() == 2);
    CHECK(q.ll.width() == 2);
    for (double v : q.ll.data()) CHECK(v == 1.0);
    for (const auto* d : {&q.lh, &q.hl, &q.hh}) {
        for (double v : d->data()) CHECK(v == 0.0);
    }
}

TEST_CASE("single impulse block splits evenly") {
    const ImageTensor img(1, 2, 2, {1.0, 0.0, 0.0, 0.0});
    const WaveletQuad q = db1_decompose(img);
    CHECK(q.ll.data()[0] == 0.5);
    CHECK(q.lh.data()[0] == 0.5);
    CHECK(q.hl.data()[0] == 0.5);
    CHECK(q.hh.data()[0] == 0.5);

    // independent inverse of that block
    const double a = (0.5 + 0.5 + 0.5 + 0.5) / 2.0;
    const double b = (0.5 + 0.5 - 0.5 - 0.5) / 2.0;
    const double c = (0.5 - 0.5 + 0.5 - 0.5) / 2.0;
    const double d = (0.5 - 0.5 - 0.5 + 0.5) / 2.0;
    CHECK(a == 1.0);
    CHECK(b == 0.0);
    CHECK(c == 0.0);
    CHECK(d == 0.0);
}

TEST_CASE("perfect reconstruction on random 4-band images") {
    SeededGaussian rng(41);
    const ImageTensor img = gaussian_field(rng, 4, 16, 16, 0.5, 0.3);
    const ImageTensor rec = db1_reconstruct(db1_decompose(img), 16, 16);
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(std::abs(rec.data()[i] - img.data()[i]) < 1e-6);
    }
}

TEST_CASE("energy preservation and linearity") {
    SeededGaussian rng(42);
    const ImageTensor x = gaussian_field(rng, 2, 8, 8, 0.0, 1.0);
    const ImageTensor y = gaussian_field(rng, 2, 8, 8, 0.0, 1.0);

    const auto energy = [](const ImageTensor& t) {
        double e = 0.0;
        for (double v : t.data()) e += v * v;
        return e;
    };
    const WaveletQuad qx = db1_decompose(x);
    const double split = energy(qx.ll) + energy(qx.lh) + energy(qx.hl) + energy(qx.hh);
    CHECK(std::abs(split - energy(x)) <= 1e-6 * energy(x));

    const ImageTensor combo = add(scale(x, 1.7), scale(y, -0.4));
    const WaveletQuad qc = db1_decompose(combo);
    const WaveletQuad qy = db1_decompose(y);
    const auto check_lin = [&](const ImageTensor& got, const ImageTensor& lx,
                               const ImageTensor& ly) {
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double want = 1.7 * lx.data()[i] - 0.4 * ly.data()[i];
            CHECK(std::abs(got.data()[i] - want) < 1e-6);
        }
    };
    check_lin(qc.ll, qx.ll, qy.ll);
    check_lin(qc.lh, qx.lh, qy.lh);
    check_lin(qc.hl, qx.hl, qy.hl);
    check_lin(qc.hh, qx.hh, qy.hh);
}

TEST_CASE("odd sizes go through replicate padding and crop back") {
    SeededGaussian rng(43);
    const ImageTensor img = gaussian_field(rng, 3, 7, 9, 0.5, 0.2);
    const WaveletQuad q = db1_decompose(img);
    CHECK(q.ll.height() == 4);
    CHECK(q.ll.width() == 5);
    const ImageTensor rec = db1_reconstruct(q, 7, 9);
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(std::abs(rec.data()[i] - img.data()[i]) < 1e-6);
    }
}

TEST_CASE("condition stack: channel count and layout") {
    const int C = 4, H = 8, W = 8;
    SeededGaussian rng(44);
    const ImageTensor lrms = gaussian_field(rng, C, H, W, 0.5, 0.1);
    const ImageTensor pan = gaussian_field(rng, 1, H, W, 0.5, 0.1);
    const ConditionSet cond = build_condition(lrms, pan);
    CHECK(cond.channels() == 1 + C + 4 * (C + 1));  // 25
    CHECK(cond.stacked.height() == H);
    CHECK(cond.stacked.width() == W);

    // first channel is PAN, next C are LRMS
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            CHECK(cond.stacked.at(0, y, x) == pan.at(0, y, x));
            for (int c = 0; c < C; ++c) {
                CHECK(cond.stacked.at(1 + c, y, x) == lrms.at(c, y, x));
            }
        }
    }
}

TEST_CASE("constant inputs produce zero detail channels") {
    const ImageTensor lrms = constant(2, 4, 4, 0.25);
    const ImageTensor pan = constant(1, 4, 4, 0.75);
    const ConditionSet cond = build_condition(lrms, pan);
    // layout: [pan, lrms(2), lrms ll(2) lh(2) hl(2) hh(2), pan ll lh hl hh]
    for (int c = 5; c < 11; ++c) {  // lrms lh, hl, hh
        for (double v : cond.stacked.band(c)) CHECK(v == 0.0);
    }
    for (int c = 12; c < 15; ++c) {  // pan lh, hl, hh
        for (double v : cond.stacked.band(c)) CHECK(v == 0.0);
    }
    // approximations carry the 2v gain
    for (double v : cond.stacked.band(3)) CHECK(v == 0.5);
    for (double v : cond.stacked.band(11)) CHECK(v == 1.5);
}

TEST_CASE("rebuilding on equal inputs gives identical stacks") {
    SeededGaussian rng(45);
    const ImageTensor lrms = gaussian_field(rng, 4, 8, 8, 0.5, 0.1);
    const ImageTensor pan = gaussian_field(rng, 1, 8, 8, 0.5, 0.1);
    const ConditionSet a = build_condition(lrms, pan);
    const ConditionSet b = build_condition(lrms, pan);
    for (std::size_t i = 0; i < a.stacked.size(); ++i) {
        CHECK(a.stacked.data()[i] == b.stacked.data()[i]);
    }
}

TEST_CASE("condition inputs are validated") {
    const ImageTensor lrms = constant(4, 8, 8, 0.5);
    CHECK_THROWS_AS(build_condition(lrms, constant(2, 8, 8, 0.5)), std::invalid_argument);
    CHECK_THROWS_AS(build_condition(lrms, constant(1, 4, 8, 0.5)), std::invalid_argument);
}
