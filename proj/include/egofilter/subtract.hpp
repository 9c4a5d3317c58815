#pragma once

#include "egofilter/audio.hpp"
#include "egofilter/mat.hpp"
#include "egofilter/stft.hpp"

namespace egofilter {

// Magnitude-domain subtraction knobs. Defaults are plain subtraction with a
// zero floor; alpha scales the estimate before subtraction, beta keeps a
// fraction of the mixture as the floor instead of hard zero.
struct SubtractionConfig {
    double floor_beta = 0.0;
    double over_subtraction_alpha = 1.0;
};

// S = max(X - alpha * Rhat, beta * X), elementwise. Inputs are magnitude
// spectrograms of identical shape with non-negative entries.
Mat subtract(const Mat& x_mag, const Mat& rhat_mag,
             const SubtractionConfig& cfg = {});

// Resynthesis of an estimated magnitude with a borrowed (unmodified) phase.
AudioClip reconstruct(const Mat& s_mag, const Mat& phase, int frame_len,
                      int hop, int sample_rate);

}  // namespace egofilter
