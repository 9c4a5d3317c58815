#ifndef EGOFILTER_AUDIO_HPP
#define EGOFILTER_AUDIO_HPP

#include <cstddef>
#include <vector>

namespace egofilter {

// Mono audio, nominal amplitude range [-1, 1).
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 16000;

    size_t size() const { return samples.size(); }
    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// Half-open sample range [begin, end).
struct SampleRange {
    size_t begin = 0;
    size_t end = 0;

    size_t length() const { return end > begin ? end - begin : 0; }
};

// Throws std::invalid_argument if any sample is NaN/Inf.
void require_finite(const AudioClip& clip, const char* what);

// Divides by max |sample|. All-zero input is returned unchanged.
AudioClip peak_normalize(const AudioClip& clip);

// 10*log10(P_target / P_interference), powers averaged over the overlap
// range. Throws if either clip does not cover the range or the interference
// power in the range is zero.
double overlap_snr_db(const AudioClip& target, const AudioClip& interference,
                      SampleRange overlap);

}  // namespace egofilter

#endif
