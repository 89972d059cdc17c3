#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "respan/mbif.hpp"
#include "respan/rng.hpp"
#include "respan/tensor.hpp"

using namespace respan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "respan-test-tensor";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("elementwise ops follow their definitions") {
    const ImageTensor a(1, 1, 2, {-0.2, 1.3});
    const ImageTensor c = clamp(a, 0.0, 1.0);
    CHECK(c.data()[0] == 0.0);
    CHECK(c.data()[1] == 1.0);

    const ImageTensor t(2, 2, 2, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
    CHECK(mse(t, t) == 0.0);

    const ImageTensor x0 = constant(3, 4, 4, 0.8);
    const ImageTensor xT = constant(3, 4, 4, 0.3);
    const ImageTensor e0 = sub(x0, xT);
    for (double v : e0.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

    CHECK(band_mean(t, 1) == doctest::Approx(0.65));
    CHECK(band_min(t, 0) == 0.1);
    CHECK(band_max(t, 0) == 0.4);
    CHECK(tensor_min(t) == 0.1);
    CHECK(tensor_max(t) == 0.8);
}

TEST_CASE("add(sub(a,b),b) recovers a to one ulp") {
    SeededGaussian rng(3);
    const ImageTensor a = gaussian_field(rng, 2, 8, 8, 0.0, 2.0);
    const ImageTensor b = gaussian_field(rng, 2, 8, 8, 0.0, 2.0);
    const ImageTensor back = add(sub(a, b), b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double tol =
            2.0 * std::abs(a.data()[i]) * std::numeric_limits<double>::epsilon() +
            2.0 * std::abs(b.data()[i]) * std::numeric_limits<double>::epsilon();
        CHECK(std::abs(back.data()[i] - a.data()[i]) <= tol);
    }
}

TEST_CASE("shape mismatch and bad dimensions throw") {
    const ImageTensor a(1, 2, 2);
    const ImageTensor b(1, 2, 3);
    CHECK_THROWS_AS(add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(sub(a, b), std::invalid_argument);
    CHECK_THROWS_AS(mse(a, b), std::invalid_argument);
    CHECK_THROWS_AS(ImageTensor(0, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(ImageTensor(1, 2, 2, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(clamp(a, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(band_mean(a, 5), std::invalid_argument);
}

TEST_CASE("gaussian_field basics") {
    SeededGaussian rng(7);
    const ImageTensor zero_std = gaussian_field(rng, 2, 3, 3, 0.75, 0.0);
    for (double v : zero_std.data()) CHECK(v == 0.75);

    SeededGaussian a(11), b(11);
    const ImageTensor ta = gaussian_field(a, 1, 10, 10, 0.0, 1.0);
    const ImageTensor tb = gaussian_field(b, 1, 10, 10, 0.0, 1.0);
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta.data()[i] == tb.data()[i]);

    CHECK_THROWS_AS(gaussian_field(a, 1, 2, 2, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("gaussian_field moments: 1e5 draws, mean 0 std 2") {
    SeededGaussian rng(7);
    const ImageTensor t = gaussian_field(rng, 1, 250, 400, 0.0, 2.0);
    double sum = 0.0, sumsq = 0.0;
    for (double v : t.data()) {
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(t.size());
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sd - 2.0) < 0.02);
}

TEST_CASE("rng streams are deterministic and children are distinct") {
    SeededGaussian a(123), b(123);
    for (int i = 0; i < 10'000; ++i) CHECK(a.next_u64() == b.next_u64());

    const std::uint64_t c0 = SeededGaussian::derived_seed(5, 0);
    const std::uint64_t c1 = SeededGaussian::derived_seed(5, 1);
    CHECK(c0 != c1);
    CHECK(SeededGaussian::derived_seed(5, 0) == c0);

    SeededGaussian u(9);
    for (int i = 0; i < 1000; ++i) {
        const auto v = u.uniform_below(15);
        CHECK(v < 15);
    }
}

TEST_CASE("upsample_nearest repeats pixels") {
    const ImageTensor t(1, 2, 2, {1.0, 2.0, 3.0, 4.0});
    const ImageTensor up = upsample_nearest(t, 2);
    CHECK(up.height() == 4);
    CHECK(up.at(0, 0, 0) == 1.0);
    CHECK(up.at(0, 0, 1) == 1.0);
    CHECK(up.at(0, 1, 1) == 1.0);
    CHECK(up.at(0, 3, 3) == 4.0);
    CHECK(up.at(0, 0, 2) == 2.0);
}

TEST_CASE("mbif: constant payload and exact sizes") {
    const auto dir = temp_dir();

    const ImageTensor t = constant(4, 2, 2, 0.5);
    const auto p = dir / "const.mbif";
    write_mbif(t, p);
    const ImageTensor back = read_mbif(p);
    CHECK(back.bands() == 4);
    CHECK(back.height() == 2);
    CHECK(back.width() == 2);
    CHECK(back.size() == 16);
    for (double v : back.data()) CHECK(v == 0.5);

    const ImageTensor one(1, 1, 1, {0.25});
    const auto p1 = dir / "one.mbif";
    write_mbif(one, p1);
    CHECK(fs::file_size(p1) == 24);  // 4 magic + 4 version + 12 dims + 4 payload
}

TEST_CASE("mbif: round-trip is bit-exact and rewrites are byte-identical") {
    const auto dir = temp_dir();
    SeededGaussian rng(17);
    for (int i = 0; i < 100; ++i) {
        const int c = 1 + static_cast<int>(rng.uniform_below(4));
        const int h = 1 + static_cast<int>(rng.uniform_below(8));
        const int w = 1 + static_cast<int>(rng.uniform_below(8));
        const ImageTensor t = quantize_f32(gaussian_field(rng, c, h, w, 0.0, 2.0));
        const auto pa = dir / "a.mbif";
        const auto pb = dir / "b.mbif";
        write_mbif(t, pa);
        const ImageTensor back = read_mbif(pa);
        REQUIRE(back.same_shape(t));
        for (std::size_t j = 0; j < t.size(); ++j) REQUIRE(back.data()[j] == t.data()[j]);
        write_mbif(back, pb);
        REQUIRE(slurp(pa) == slurp(pb));
    }
}

TEST_CASE("mbif: format errors name the byte offset") {
    const auto dir = temp_dir();
    const auto p = dir / "bad.mbif";

    {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        f << "MBI2";
        const char zeros[20] = {};
        f.write(zeros, 20);
    }
    CHECK_THROWS_WITH_AS(read_mbif(p), doctest::Contains("byte offset 0"), MbifError);

    write_mbif(constant(1, 2, 2, 0.5), p);
    fs::resize_file(p, 24);  // drop part of the payload
    CHECK_THROWS_WITH_AS(read_mbif(p), doctest::Contains("truncated"), MbifError);

    write_mbif(constant(1, 1, 1, 0.5), p);
    {
        std::ofstream f(p, std::ios::binary | std::ios::app);
        f << "xx";
    }
    CHECK_THROWS_WITH_AS(read_mbif(p), doctest::Contains("trailing"), MbifError);

    CHECK_THROWS_AS(read_mbif(dir / "does-not-exist.mbif"), MbifError);

    ImageTensor bad(1, 1, 1, {0.0});
    bad.data()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(write_mbif(bad, p), std::invalid_argument);
}

TEST_CASE("mbif: non-finite payload in the file is rejected with its offset") {
    const auto dir = temp_dir();
    const auto p = dir / "inf.mbif";
    write_mbif(ImageTensor(1, 1, 2, {0.5, 0.25}), p);
    {
        // overwrite the second float with +inf
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(24);
        const unsigned char inf_le[4] = {0x00, 0x00, 0x80, 0x7F};
        f.write(reinterpret_cast<const char*>(inf_le), 4);
    }
    CHECK_THROWS_WITH_AS(read_mbif(p), doctest::Contains("byte offset 24"), MbifError);
}
