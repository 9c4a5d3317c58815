#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "egofilter/eval.hpp"
#include "egofilter/rng.hpp"
#include "egofilter/stft.hpp"
#include "egofilter/subtract.hpp"
#include "support/synthvoice.hpp"

using namespace egofilter;

namespace {

// Dyadic entries (multiples of 1/64) make sums and differences exact in
// doubles, so additive constructions can be checked bitwise.
Mat dyadic_mag(int rows, int cols, uint64_t seed) {
    Mat m(rows, cols);
    Rng rng(seed);
    for (auto& x : m.v) {
        x = static_cast<double>(static_cast<int>(rng.uniform(0.0, 64.0))) / 64.0;
    }
    return m;
}

}  // namespace

TEST_CASE("a perfect estimate zeroes the output") {
    const Mat x = dyadic_mag(12, 9, 1);
    const Mat s = subtract(x, x);
    for (double v : s.v) CHECK(v == 0.0);
}

TEST_CASE("additively constructed mixtures separate exactly") {
    const Mat target = dyadic_mag(12, 9, 2);
    const Mat rhat = dyadic_mag(12, 9, 3);
    Mat x(12, 9);
    for (size_t n = 0; n < x.v.size(); ++n) x.v[n] = target.v[n] + rhat.v[n];
    const Mat s = subtract(x, rhat);
    for (size_t n = 0; n < s.v.size(); ++n) CHECK(s.v[n] == target.v[n]);
}

TEST_CASE("overshooting estimates floor at zero") {
    Mat x(1, 1), r(1, 1);
    x.v[0] = 0.2;
    r.v[0] = 0.5;
    CHECK(subtract(x, r).v[0] == 0.0);
}

TEST_CASE("beta keeps a fraction of the mixture as the floor") {
    Mat x(1, 3), r(1, 3);
    x.v = {1.0, 1.0, 1.0};
    r.v = {0.0, 0.5, 2.0};
    SubtractionConfig cfg;
    cfg.floor_beta = 0.1;
    const Mat s = subtract(x, r, cfg);
    CHECK(s.v[0] == doctest::Approx(1.0));
    CHECK(s.v[1] == doctest::Approx(0.5));
    CHECK(s.v[2] == doctest::Approx(0.1));  // floored at beta * x
}

TEST_CASE("alpha scales the estimate before subtraction") {
    Mat x(1, 1), r(1, 1);
    x.v[0] = 1.0;
    r.v[0] = 0.25;
    SubtractionConfig cfg;
    cfg.over_subtraction_alpha = 2.0;
    CHECK(subtract(x, r, cfg).v[0] == doctest::Approx(0.5));
}

TEST_CASE("outputs are never negative and never grow with the estimate") {
    Rng rng(7);
    Mat x(20, 15), r(20, 15);
    for (auto& v : x.v) v = rng.uniform(0.0, 3.0);
    for (auto& v : r.v) v = rng.uniform(0.0, 3.0);
    SubtractionConfig cfg;
    cfg.floor_beta = 0.05;
    cfg.over_subtraction_alpha = 1.3;
    const Mat s = subtract(x, r, cfg);
    for (double v : s.v) CHECK(v >= 0.0);

    // raising any estimate cell can only lower (or hold) the output cell
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = static_cast<size_t>(rng.uniform(0.0, 300.0));
        Mat r2 = r;
        r2.v[n] += rng.uniform(0.0, 2.0);
        const Mat s2 = subtract(x, r2, cfg);
        CHECK(s2.v[n] <= s.v[n]);
    }
}

TEST_CASE("subtract validates shapes and signs") {
    Mat a(3, 4), b(4, 3);
    CHECK_THROWS_WITH_AS(subtract(a, b), "subtract: shape mismatch",
                         std::invalid_argument);
    Mat c(3, 4), d(3, 4);
    d.v[5] = -0.1;
    CHECK_THROWS_AS(subtract(c, d), std::invalid_argument);
    SubtractionConfig bad;
    bad.floor_beta = -0.5;
    CHECK_THROWS_AS(subtract(c, c, bad), std::invalid_argument);
    bad.floor_beta = 0.0;
    bad.over_subtraction_alpha = 0.0;
    CHECK_THROWS_AS(subtract(c, c, bad), std::invalid_argument);
}

TEST_CASE("reconstruct with a signal's own magnitude and phase recovers it") {
    const AudioClip clip = testsupport::speech_like({});
    const Spectrogram sp = stft(clip);
    const AudioClip rec =
        reconstruct(sp.magnitude, sp.phase, sp.frame_len, sp.hop, sp.sample_rate);
    // interior samples (away from the divided-window edges) match closely
    for (size_t i = 400; i + 400 < rec.samples.size(); ++i) {
        REQUIRE(std::fabs(rec.samples[i] - clip.samples[i]) < 1e-6);
    }
}

TEST_CASE("zero magnitude reconstructs to silence") {
    Mat mag(201, 30), phase(201, 30);
    Rng rng(9);
    for (auto& p : phase.v) p = rng.uniform(-3.14, 3.14);
    const AudioClip rec = reconstruct(mag, phase, 400, 160, 16000);
    for (double v : rec.samples) CHECK(v == 0.0);
}

TEST_CASE("oracle subtraction recovers the target above 40 dB SI-SDR") {
    const AudioClip target = testsupport::human_utterance(11, 5);
    const AudioClip ego = testsupport::robot_utterance(12, 6);
    const Spectrogram sp_t = stft(target);
    const Spectrogram sp_e = stft(ego);

    // additive-magnitude mixture carrying the target's phase
    const size_t frames = std::min(sp_t.frames(), sp_e.frames());
    Mat x(static_cast<int>(sp_t.bins()), static_cast<int>(frames));
    Mat rhat(static_cast<int>(sp_t.bins()), static_cast<int>(frames));
    Mat phase(static_cast<int>(sp_t.bins()), static_cast<int>(frames));
    for (size_t f = 0; f < sp_t.bins(); ++f) {
        for (size_t t = 0; t < frames; ++t) {
            x(f, t) = sp_t.magnitude(f, t) + sp_e.magnitude(f, t);
            rhat(f, t) = sp_e.magnitude(f, t);
            phase(f, t) = sp_t.phase(f, t);
        }
    }
    const Mat shat = subtract(x, rhat);
    const AudioClip rec = reconstruct(shat, phase, 400, 160, 16000);

    // compare on the fully overlapped interior of the reconstruction
    AudioClip est, ref;
    est.samples.assign(rec.samples.begin() + 400, rec.samples.end() - 400);
    ref.samples.assign(target.samples.begin() + 400,
                       target.samples.begin() + (rec.samples.size() - 400));
    CHECK(si_sdr(est, ref) > 40.0);
}
