#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "egofilter/audio.hpp"
#include "egofilter/rng.hpp"
#include "egofilter/wav.hpp"

using namespace egofilter;

namespace {

AudioClip random_clip(size_t n, uint64_t seed) {
    Rng rng(seed);
    AudioClip c;
    c.samples.resize(n);
    for (auto& s : c.samples) s = rng.uniform(-0.9, 0.9);
    return c;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("peak_normalize basic") {
    AudioClip c{{0.5, -0.25}, 16000};
    AudioClip out = peak_normalize(c);
    CHECK(out.samples[0] == doctest::Approx(1.0));
    CHECK(out.samples[1] == doctest::Approx(-0.5));
}

TEST_CASE("peak_normalize all-zero identity") {
    AudioClip c{{0.0, 0.0, 0.0}, 16000};
    AudioClip out = peak_normalize(c);
    for (double s : out.samples) CHECK(s == 0.0);
}

TEST_CASE("peak_normalize postcondition and idempotence") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        AudioClip c = random_clip(500, seed);
        AudioClip once = peak_normalize(c);
        double peak = 0.0;
        for (double s : once.samples) peak = std::max(peak, std::fabs(s));
        CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
        AudioClip twice = peak_normalize(once);
        for (size_t i = 0; i < once.size(); ++i) {
            CHECK(twice.samples[i] == doctest::Approx(once.samples[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("overlap_snr_db identical clips is 0 dB") {
    AudioClip c = random_clip(1000, 7);
    CHECK(overlap_snr_db(c, c, {0, c.size()}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("overlap_snr_db scale arithmetic") {
    AudioClip a = random_clip(1000, 11);
    AudioClip b = a;
    for (double& s : b.samples) s *= 0.1;
    CHECK(overlap_snr_db(b, a, {0, a.size()}) == doctest::Approx(-20.0).epsilon(1e-9));
}

TEST_CASE("overlap_snr_db partial range uses only the range") {
    AudioClip t{{0, 0, 1, 1, 0, 0}, 16000};
    AudioClip i{{9, 9, 2, 2, 9, 9}, 16000};
    CHECK(overlap_snr_db(t, i, {2, 4}) ==
          doctest::Approx(10.0 * std::log10(1.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("overlap_snr_db error cases") {
    AudioClip t = random_clip(100, 3);
    AudioClip silent{std::vector<double>(100, 0.0), 16000};
    CHECK_THROWS_AS((void)overlap_snr_db(t, silent, {0, 100}), std::invalid_argument);
    CHECK_THROWS_AS((void)overlap_snr_db(t, t, {0, 200}), std::invalid_argument);
    CHECK_THROWS_AS((void)overlap_snr_db(t, t, {50, 50}), std::invalid_argument);
}

TEST_CASE("wav round trip is exact for quantized samples") {
    AudioClip c;
    c.sample_rate = 16000;
    Rng rng(42);
    c.samples.resize(4321);
    for (auto& s : c.samples) {
        int q = static_cast<int>(rng.uniform(-32768.0, 32768.0));
        s = q / 32768.0;
    }
    auto path = temp_file("egofilter_wav_rt.wav");
    write_wav(path.string(), c);
    AudioClip back = read_wav(path.string());
    REQUIRE(back.size() == c.size());
    CHECK(back.sample_rate == 16000);
    for (size_t i = 0; i < c.size(); ++i) REQUIRE(back.samples[i] == c.samples[i]);
    std::filesystem::remove(path);
}

TEST_CASE("wav write clamps out-of-range samples") {
    AudioClip c{{1.5, -1.5, 0.999999}, 16000};
    auto path = temp_file("egofilter_wav_clamp.wav");
    write_wav(path.string(), c);
    AudioClip back = read_wav(path.string());
    CHECK(back.samples[0] == doctest::Approx(32767.0 / 32768.0));
    CHECK(back.samples[1] == doctest::Approx(-1.0));
    std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects malformed input") {
    auto path = temp_file("egofilter_not_a_wav.wav");
    {
        std::ofstream f(path, std::ios::binary);
        f << "this is not audio";
    }
    CHECK_THROWS_AS((void)read_wav(path.string()), std::runtime_error);
    CHECK_THROWS_AS((void)read_wav("/nonexistent/nope.wav"), std::runtime_error);
    std::filesystem::remove(path);
}
