#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "respan/metrics.hpp"
#include "respan/rng.hpp"

using namespace respan;

TEST_CASE("sam: identity, orthogonality, scale invariance") {
    SeededGaussian rng(61);
    const ImageTensor gt = gaussian_field(rng, 4, 6, 6, 0.6, 0.1);
    // acos near cos = 1 leaves sub-microdegree residue
    CHECK(sam(gt, gt) < 1e-5);
    CHECK(sam(scale(gt, 2.0), gt) < 1e-5);

    const ImageTensor a(4, 1, 1, {1.0, 0.0, 0.0, 0.0});
    const ImageTensor b(4, 1, 1, {0.0, 1.0, 0.0, 0.0});
    CHECK(sam(a, b) == doctest::Approx(90.0).epsilon(1e-12));
}

TEST_CASE("sam: degenerate spectra count as zero unless strict") {
    const ImageTensor zero(2, 1, 2, {0.0, 0.5, 0.0, 0.5});
    const ImageTensor gt(2, 1, 2, {0.3, 0.5, 0.4, 0.5});
    // first pixel of pred has zero norm: contributes 0 but stays in the mean
    const double relaxed = sam(zero, gt);
    CHECK(relaxed >= 0.0);
    CHECK(relaxed < 90.0);
    CHECK_THROWS_AS(sam(zero, gt, /*strict=*/true), std::runtime_error);
    CHECK_THROWS_AS(sam(ImageTensor(1, 2, 2), ImageTensor(1, 2, 2)), std::invalid_argument);
}

TEST_CASE("ergas: frozen example and joint-scaling invariance") {
    const ImageTensor gt = constant(1, 4, 4, 0.5);
    const ImageTensor pred = constant(1, 4, 4, 0.6);
    CHECK(ergas(pred, gt, 4.0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(ergas(gt, gt, 4.0) == 0.0);
    CHECK(ergas(scale(pred, 2.0), scale(gt, 2.0), 4.0) == doctest::Approx(5.0).epsilon(1e-12));
    // but scaling only the prediction moves it
    CHECK(ergas(scale(pred, 2.0), gt, 4.0) != doctest::Approx(5.0).epsilon(1e-6));

    CHECK_THROWS_WITH_AS(ergas(pred, constant(1, 4, 4, 0.0), 4.0), doctest::Contains("band 0"),
                         std::runtime_error);
}

TEST_CASE("scc: identity, offsets, and an anti-correlated band") {
    SeededGaussian rng(62);
    const ImageTensor gt = gaussian_field(rng, 2, 8, 8, 0.5, 0.2);
    CHECK(scc(gt, gt) == doctest::Approx(1.0).epsilon(1e-9));

    ImageTensor offset = gt;
    for (auto& v : offset.data()) v += 0.25;
    CHECK(scc(offset, gt) == doctest::Approx(1.0).epsilon(1e-9));

    // negate one band: its high-pass response flips sign entirely
    ImageTensor mixed = gt;
    for (auto v = mixed.band(0); auto& x : v) x = -x;
    CHECK(scc(mixed, gt) == doctest::Approx(0.0).epsilon(1e-9));

    CHECK_THROWS_AS(scc(ImageTensor(1, 2, 2), ImageTensor(1, 2, 2)), std::invalid_argument);
}

TEST_CASE("psnr: frozen values and the exact-match sentinel") {
    const ImageTensor gt = constant(1, 10, 10, 0.5);
    ImageTensor pred = gt;
    for (auto& v : pred.data()) v += 0.01;  // MSE = 1e-4
    CHECK(psnr(pred, gt) == doctest::Approx(40.0).epsilon(1e-9));

    ImageTensor coarse = gt;
    for (auto& v : coarse.data()) v += 0.1;  // MSE = 0.01
    CHECK(psnr(coarse, gt) == doctest::Approx(20.0).epsilon(1e-9));

    CHECK(std::isinf(psnr(gt, gt)));
    CHECK(psnr(gt, gt) > 0.0);
}

TEST_CASE("metrics are invariant under a shared pixel shuffle") {
    SeededGaussian rng(63);
    const int c = 3, h = 6, w = 6;
    const ImageTensor gt = gaussian_field(rng, c, h, w, 0.5, 0.15);
    const ImageTensor pred = gaussian_field(rng, c, h, w, 0.5, 0.15);

    // one fixed permutation of pixel indices applied to every band of both
    std::vector<int> perm(h * w);
    for (int i = 0; i < h * w; ++i) perm[i] = i;
    for (int i = h * w - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.uniform_below(static_cast<std::uint64_t>(i + 1))]);
    }
    const auto shuffle = [&](const ImageTensor& t) {
        ImageTensor out(c, h, w);
        for (int b = 0; b < c; ++b) {
            for (int i = 0; i < h * w; ++i) out.band(b)[i] = t.band(b)[perm[i]];
        }
        return out;
    };
    // SAM / ERGAS / PSNR are pixelwise reductions, so any shared shuffle
    // leaves them unchanged (SCC is not: its filter sees the layout)
    CHECK(sam(shuffle(pred), shuffle(gt)) == doctest::Approx(sam(pred, gt)).epsilon(1e-12));
    CHECK(ergas(shuffle(pred), shuffle(gt)) == doctest::Approx(ergas(pred, gt)).epsilon(1e-12));
    CHECK(psnr(shuffle(pred), shuffle(gt)) == doctest::Approx(psnr(pred, gt)).epsilon(1e-12));
}

TEST_CASE("scale invariance directions") {
    SeededGaussian rng(64);
    const ImageTensor gt = gaussian_field(rng, 3, 8, 8, 0.6, 0.1);
    ImageTensor pred = gt;
    for (auto& v : pred.data()) v += 0.02;

    CHECK(sam(scale(pred, 3.0), gt) == doctest::Approx(sam(pred, gt)).epsilon(1e-9));
    CHECK(scc(scale(pred, 3.0), gt) == doctest::Approx(scc(pred, gt)).epsilon(1e-9));
    CHECK(psnr(scale(pred, 3.0), gt) < psnr(pred, gt));
    CHECK(ergas(scale(pred, 3.0), gt) > ergas(pred, gt));
}

TEST_CASE("evaluate bundles all four metrics") {
    SeededGaussian rng(65);
    const ImageTensor gt = gaussian_field(rng, 4, 8, 8, 0.5, 0.1);
    ImageTensor pred = gt;
    for (auto& v : pred.data()) v += 0.01;
    const MetricReport rep = evaluate(pred, gt);
    CHECK(rep.sam_deg >= 0.0);
    CHECK(rep.sam_deg <= 180.0);
    CHECK(rep.ergas > 0.0);
    CHECK(rep.scc >= -1.0);
    CHECK(rep.scc <= 1.0);
    CHECK(std::isfinite(rep.psnr_db));
}
