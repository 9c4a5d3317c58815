#ifndef EGOFILTER_STFT_HPP
#define EGOFILTER_STFT_HPP

#include <vector>

#include "egofilter/audio.hpp"
#include "egofilter/mat.hpp"

namespace egofilter {

// One-sided magnitude/phase pair. Rows are frequency bins (F = frame_len/2+1),
// columns are frames.
struct Spectrogram {
    Mat magnitude;
    Mat phase;
    int frame_len = 400;
    int hop = 160;
    int sample_rate = 16000;

    size_t bins() const { return magnitude.rows; }
    size_t frames() const { return magnitude.cols; }
    // Center frequency of row i in Hz.
    double bin_hz(size_t i) const {
        return static_cast<double>(i) * sample_rate / frame_len;
    }
};

std::vector<double> hann_periodic(int n);

// T = floor((len - frame_len)/hop) + 1 frames, periodic Hann analysis window.
Spectrogram stft(const AudioClip& clip, int frame_len = 400, int hop = 160);

struct IstftResult {
    AudioClip clip;
    // Samples where the summed squared synthesis window was <= 1e-8; these
    // are set to zero rather than divided.
    std::vector<size_t> zeroed_samples;
};

// Weighted overlap-add with per-sample division by the summed squared window.
// Output length is frame_len + (T-1)*hop.
IstftResult istft(const Spectrogram& spec);

// Ratio of summed log-magnitudes above 1000 Hz to those at or below 1000 Hz,
// each term 20*log10(max(magnitude, 1e-10)).
double alpha_ratio(const Spectrogram& spec);

}  // namespace egofilter

#endif
