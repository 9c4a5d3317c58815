#include "egofilter/subtract.hpp"

#include <algorithm>
#include <stdexcept>

namespace egofilter {

Mat subtract(const Mat& x_mag, const Mat& rhat_mag,
             const SubtractionConfig& cfg) {
    require_same_shape(x_mag, rhat_mag, "subtract");
    if (cfg.floor_beta < 0.0) {
        throw std::invalid_argument("subtract: floor_beta must be >= 0");
    }
    if (!(cfg.over_subtraction_alpha > 0.0)) {
        throw std::invalid_argument(
            "subtract: over_subtraction_alpha must be > 0");
    }
    for (double v : x_mag.v) {
        if (v < 0.0) throw std::invalid_argument("subtract: negative magnitude");
    }
    for (double v : rhat_mag.v) {
        if (v < 0.0) throw std::invalid_argument("subtract: negative magnitude");
    }

    Mat s(x_mag.rows, x_mag.cols);
    const double a = cfg.over_subtraction_alpha;
    const double b = cfg.floor_beta;
    for (size_t n = 0; n < s.v.size(); ++n) {
        s.v[n] = std::max(x_mag.v[n] - a * rhat_mag.v[n], b * x_mag.v[n]);
    }
    return s;
}

AudioClip reconstruct(const Mat& s_mag, const Mat& phase, int frame_len,
                      int hop, int sample_rate) {
    require_same_shape(s_mag, phase, "reconstruct");
    Spectrogram spec;
    spec.magnitude = s_mag;
    spec.phase = phase;
    spec.frame_len = frame_len;
    spec.hop = hop;
    spec.sample_rate = sample_rate;
    return istft(spec).clip;
}

}  // namespace egofilter
