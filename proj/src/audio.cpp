#include "egofilter/audio.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace egofilter {

void require_finite(const AudioClip& clip, const char* what) {
    for (double s : clip.samples) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument(std::string(what) +
                                        ": non-finite sample");
        }
    }
}

AudioClip peak_normalize(const AudioClip& clip) {
    double peak = 0.0;
    for (double s : clip.samples) peak = std::max(peak, std::fabs(s));
    if (peak == 0.0) return clip;
    AudioClip out = clip;
    for (double& s : out.samples) s /= peak;
    return out;
}

double overlap_snr_db(const AudioClip& target, const AudioClip& interference,
                      SampleRange overlap) {
    if (overlap.end <= overlap.begin) {
        throw std::invalid_argument("overlap_snr_db: empty overlap range");
    }
    if (overlap.end > target.size() || overlap.end > interference.size()) {
        throw std::invalid_argument(
            "overlap_snr_db: clip does not cover overlap range");
    }
    double pt = 0.0;
    double pi = 0.0;
    for (size_t n = overlap.begin; n < overlap.end; ++n) {
        pt += target.samples[n] * target.samples[n];
        pi += interference.samples[n] * interference.samples[n];
    }
    const double len = static_cast<double>(overlap.length());
    pt /= len;
    pi /= len;
    if (pi == 0.0) {
        throw std::invalid_argument("overlap_snr_db: zero interference power");
    }
    return 10.0 * std::log10(pt / pi);
}

}  // namespace egofilter
