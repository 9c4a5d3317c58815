#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egofilter/audio.hpp"

namespace egofilter {

// Recipe for one synthetic mixture. Paths refer to mono 16 kHz WAV files.
struct MixtureSpec {
    std::string target_path;
    std::string robot_path;
    double snr_db = -22.33;
    double rt60_seconds = 0.3;
    double fan_noise_db = -30.0;  // relative to recorded-ego RMS
    double overlap_offset_seconds = 0.0;
    uint64_t seed = 0;
    int words = 0;  // optional metadata carried through to evaluation
};

// Exponential decay law used by synth_rir: 10^(-3 t / rt60), i.e. -60 dB of
// amplitude at t = rt60. rt60 = 0 is treated as the anechoic case.
double rir_envelope(double rt60_seconds, double t_seconds);

// Unit direct-path impulse followed by Gaussian noise under rir_envelope.
// The tail level is calibrated so its expected energy equals the direct
// path's at rt60 = 0.5 s (0 dB direct-to-reverberant ratio there).
std::vector<double> synth_rir(double rt60_seconds, double length_seconds,
                              uint64_t seed);

// Loudspeaker-to-microphone path: convolution with the RIR, a first-order
// +3 dB high shelf above 2 kHz, then a soft clip that is the identity below
// |x| = 0.9 and saturates smoothly toward 1.
AudioClip apply_playback(const AudioClip& robot_clip,
                         const std::vector<double>& rir);

// Voss-McCartney pink noise, normalized to unit RMS.
std::vector<double> pink_noise(size_t n, uint64_t seed);

struct MixOutput {
    AudioClip mixture;
    AudioClip recorded_ego;   // aligned to the mixture timeline
    AudioClip scaled_target;  // aligned to the mixture timeline
    SampleRange ego_range;    // recorded ego's support within the mixture
    SampleRange target_range;
    SampleRange overlap;
    double peak_scale = 1.0;  // applied to all three when |mixture| > 1
};

// Core mixing: places the recorded ego at time zero and the target at the
// requested offset, scales the target so the overlap SNR matches the spec
// exactly, and adds pink fan noise. All outputs share one timeline so the
// mixture is the elementwise sum of its parts.
MixOutput mix_clips(const AudioClip& robot_clip, const AudioClip& target_clip,
                    const MixtureSpec& spec);

// File-driven variant: loads the WAVs named by the spec.
MixOutput mix(const MixtureSpec& spec);

// Line-delimited JSON manifest, one MixtureSpec per line.
std::vector<MixtureSpec> load_manifest(const std::string& path);
void save_manifest(const std::vector<MixtureSpec>& specs,
                   const std::string& path);

}  // namespace egofilter
