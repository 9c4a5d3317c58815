#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egofilter/audio.hpp"
#include "egofilter/egonet.hpp"
#include "egofilter/mat.hpp"
#include "egofilter/subtract.hpp"

namespace egofilter {

// Streaming geometry. block_stride_seconds is the overlap shared by
// consecutive one-second blocks and must equal buffer_seconds minus
// keep_seconds. flush_tail controls whether a trailing partial buffer is
// processed (zero-padded, kept segment truncated to real samples) when the
// stream ends; it defaults off so a stream emits only full-protocol
// segments.
struct PipelineConfig {
    double buffer_seconds = 1.0;
    double keep_seconds = 0.8;
    int frame_len = 400;
    int hop = 160;
    double vad_energy_multiplier = 3.0;
    int vad_frames_required = 3;
    double block_stride_seconds = 0.2;
    bool flush_tail = false;
    SubtractionConfig subtraction;
};

// Energy VAD over 10 ms frames. The noise floor is the running mean energy
// of frames seen before any activity; when no noise frame exists yet, a
// frame is active above the absolute threshold 1e-6.
struct VadState {
    double noise_energy_sum = 0.0;
    long noise_frames = 0;
    int consecutive_active = 0;
    long frames_seen = 0;
    std::optional<long> onset;  // sample index into the stream
};

struct StageTiming {
    std::string stage;
    long buffer_index = 0;
    double millis = 0.0;
};

struct StreamState {
    VadState vad;
    // Pre-onset samples not yet ruled in or out by the VAD; holdback_base is
    // the stream index of holdback[0].
    std::vector<double> holdback;
    long holdback_base = 0;
    std::vector<double> buffer;  // post-onset samples, at most 1.0 s
    long rhat_cursor = 0;        // frames of rhat consumed
    long emitted = 0;
    std::vector<StageTiming> timings;
    std::vector<double> prenorm_rms;  // per emission, before normalization
};

struct EgoEstimate {
    Mat rhat;
    double prepare_millis = 0.0;
};

// One forward pass over the robot utterance's magnitude spectrogram,
// wall-clock timed.
EgoEstimate prepare_ego_estimate(const AudioClip& robot_clip,
                                 const EgoNetWeights& weights);

// Feeds the VAD; once the onset fires, samples from the onset onward land in
// the stream buffer. Returns the onset sample index if known.
std::optional<long> detect_onset(StreamState& state,
                                 const std::vector<double>& chunk,
                                 const PipelineConfig& cfg);

// Appends a chunk and emits one peak-normalized keep_seconds segment per
// filled buffer. rhat frames beyond the estimate's end are treated as zeros.
std::vector<AudioClip> push_samples(StreamState& state,
                                    const std::vector<double>& chunk,
                                    const Mat& rhat,
                                    const PipelineConfig& cfg);

// End of stream. With cfg.flush_tail set, a non-empty partial buffer is
// zero-padded to a full buffer, processed once, and the kept segment is
// truncated to the real samples.
std::vector<AudioClip> finish(StreamState& state, const Mat& rhat,
                              const PipelineConfig& cfg);

// Whole-utterance filtering: VAD alignment, one STFT over the post-onset
// mixture, one subtraction, one resynthesis, one normalization. Output
// length is (T-1)*hop + frame_len where T is the post-onset frame count.
AudioClip run_offline_entire(const AudioClip& mixture,
                             const AudioClip& robot_clip,
                             const EgoNetWeights& weights,
                             const PipelineConfig& cfg);

// Deterministic offline replay of the streaming path; the emitted segments
// are concatenated in order. Bit-identical to feeding the same samples
// through push_samples in any chunking.
AudioClip run_offline_blocks(const AudioClip& mixture,
                             const AudioClip& robot_clip,
                             const EgoNetWeights& weights,
                             const PipelineConfig& cfg);

}  // namespace egofilter
