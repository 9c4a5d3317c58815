#include "egofilter/stream.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "egofilter/stft.hpp"

namespace egofilter {

namespace {

constexpr int kSampleRate = 16000;
constexpr int kVadFrame = kSampleRate / 100;  // 10 ms
constexpr double kVadAbsoluteThreshold = 1e-6;

void validate_config(const PipelineConfig& cfg) {
    if (!(cfg.buffer_seconds > 0.0) || !(cfg.keep_seconds > 0.0) ||
        cfg.frame_len <= 0 || cfg.hop <= 0 ||
        !(cfg.vad_energy_multiplier > 0.0) || cfg.vad_frames_required < 1) {
        throw std::invalid_argument("pipeline config: all fields must be positive");
    }
    if (!(cfg.keep_seconds < cfg.buffer_seconds)) {
        throw std::invalid_argument(
            "pipeline config: keep_seconds must be below buffer_seconds");
    }
    if (std::fabs(cfg.buffer_seconds - cfg.keep_seconds -
                  cfg.block_stride_seconds) > 1e-9) {
        throw std::invalid_argument(
            "pipeline config: block_stride_seconds must equal "
            "buffer_seconds - keep_seconds");
    }
}

void require_16k(const AudioClip& clip, const char* what) {
    if (clip.sample_rate != kSampleRate) {
        throw std::invalid_argument(std::string(what) + ": expected 16 kHz audio");
    }
}

long buffer_capacity(const PipelineConfig& cfg) {
    return std::lround(cfg.buffer_seconds * kSampleRate);
}

long keep_length(const PipelineConfig& cfg) {
    return std::lround(cfg.keep_seconds * kSampleRate);
}

// Mixture columns minus the rhat frame range [cursor, cursor + T); frames
// past the estimate's end subtract nothing (the robot has finished).
Mat rhat_slice(const Mat& rhat, long cursor, int bins, int frames) {
    if (rhat.rows != bins) {
        throw std::invalid_argument("rhat bin count does not match the mixture");
    }
    Mat slice(bins, frames);
    for (int t = 0; t < frames; ++t) {
        const long src = cursor + t;
        if (src < 0 || src >= static_cast<long>(rhat.cols)) continue;
        for (int f = 0; f < bins; ++f) {
            slice(f, t) = rhat(f, static_cast<size_t>(src));
        }
    }
    return slice;
}

double rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// Processes exactly one full buffer from the front of state.buffer and emits
// the kept middle segment. kept_limit trims the kept range (tail flush).
AudioClip process_buffer(StreamState& state, const Mat& rhat,
                         const PipelineConfig& cfg, long kept_limit) {
    const auto t0 = std::chrono::steady_clock::now();

    const long cap = buffer_capacity(cfg);
    const long keep = keep_length(cfg);
    const long lead = (cap - keep) / 2;

    AudioClip window;
    window.sample_rate = kSampleRate;
    window.samples.assign(state.buffer.begin(), state.buffer.begin() + cap);

    const Spectrogram sp = stft(window, cfg.frame_len, cfg.hop);
    const Mat slice = rhat_slice(rhat, state.rhat_cursor,
                                 static_cast<int>(sp.bins()),
                                 static_cast<int>(sp.frames()));
    const Mat shat = subtract(sp.magnitude, slice, cfg.subtraction);
    const AudioClip rec =
        reconstruct(shat, sp.phase, cfg.frame_len, cfg.hop, kSampleRate);

    const long kept_end = std::min(lead + keep, kept_limit);
    AudioClip segment;
    segment.sample_rate = kSampleRate;
    if (kept_end > lead) {
        segment.samples.assign(rec.samples.begin() + lead,
                               rec.samples.begin() + kept_end);
    }
    state.prenorm_rms.push_back(rms(segment.samples));
    segment = peak_normalize(segment);

    state.buffer.erase(state.buffer.begin(), state.buffer.begin() + keep);
    state.rhat_cursor += keep / cfg.hop;

    const auto t1 = std::chrono::steady_clock::now();
    state.timings.push_back(
        {"buffer", state.emitted,
         std::chrono::duration<double, std::milli>(t1 - t0).count()});
    ++state.emitted;
    return segment;
}

std::vector<AudioClip> drain_full_buffers(StreamState& state, const Mat& rhat,
                                          const PipelineConfig& cfg) {
    std::vector<AudioClip> out;
    const long cap = buffer_capacity(cfg);
    while (static_cast<long>(state.buffer.size()) >= cap) {
        AudioClip seg = process_buffer(state, rhat, cfg, cap);
        if (!seg.samples.empty()) out.push_back(std::move(seg));
    }
    return out;
}

}  // namespace

EgoEstimate prepare_ego_estimate(const AudioClip& robot_clip,
                                 const EgoNetWeights& weights) {
    require_16k(robot_clip, "prepare_ego_estimate");
    const auto t0 = std::chrono::steady_clock::now();
    const Spectrogram sp = stft(robot_clip);
    EgoEstimate est;
    est.rhat = forward(weights, sp.magnitude);
    const auto t1 = std::chrono::steady_clock::now();
    est.prepare_millis =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    return est;
}

std::optional<long> detect_onset(StreamState& state,
                                 const std::vector<double>& chunk,
                                 const PipelineConfig& cfg) {
    validate_config(cfg);
    if (state.vad.onset) {
        state.buffer.insert(state.buffer.end(), chunk.begin(), chunk.end());
        return state.vad.onset;
    }
    state.holdback.insert(state.holdback.end(), chunk.begin(), chunk.end());

    VadState& vad = state.vad;
    while (!vad.onset) {
        const long frame_start = vad.frames_seen * kVadFrame;
        const long have =
            state.holdback_base + static_cast<long>(state.holdback.size());
        if (have < frame_start + kVadFrame) break;

        const double* frame =
            state.holdback.data() + (frame_start - state.holdback_base);
        double energy = 0.0;
        for (int i = 0; i < kVadFrame; ++i) energy += frame[i] * frame[i];
        energy /= kVadFrame;

        bool active;
        if (vad.noise_frames > 0) {
            const double floor = vad.noise_energy_sum / vad.noise_frames;
            active = energy > cfg.vad_energy_multiplier * floor;
        } else {
            active = energy > kVadAbsoluteThreshold;
        }
        if (active) {
            ++vad.consecutive_active;
            if (vad.consecutive_active >= cfg.vad_frames_required) {
                vad.onset = (vad.frames_seen - cfg.vad_frames_required + 1) *
                            static_cast<long>(kVadFrame);
            }
        } else {
            vad.noise_energy_sum += energy;
            ++vad.noise_frames;
            vad.consecutive_active = 0;
        }
        ++vad.frames_seen;
    }

    if (vad.onset) {
        const long from = *vad.onset - state.holdback_base;
        state.buffer.insert(state.buffer.end(), state.holdback.begin() + from,
                            state.holdback.end());
        state.holdback.clear();
        state.holdback_base = 0;
    } else {
        // Everything before the current (still unconfirmed) active run is
        // settled noise and can be dropped.
        const long settled =
            (vad.frames_seen - vad.consecutive_active) * kVadFrame;
        if (settled > state.holdback_base) {
            state.holdback.erase(
                state.holdback.begin(),
                state.holdback.begin() + (settled - state.holdback_base));
            state.holdback_base = settled;
        }
    }
    return vad.onset;
}

std::vector<AudioClip> push_samples(StreamState& state,
                                    const std::vector<double>& chunk,
                                    const Mat& rhat,
                                    const PipelineConfig& cfg) {
    validate_config(cfg);
    if (rhat.rows == 0) {
        throw std::runtime_error("no ego estimate");
    }
    detect_onset(state, chunk, cfg);
    if (!state.vad.onset) return {};
    return drain_full_buffers(state, rhat, cfg);
}

std::vector<AudioClip> finish(StreamState& state, const Mat& rhat,
                              const PipelineConfig& cfg) {
    validate_config(cfg);
    if (rhat.rows == 0) {
        throw std::runtime_error("no ego estimate");
    }
    if (!state.vad.onset) return {};
    std::vector<AudioClip> out = drain_full_buffers(state, rhat, cfg);
    if (!cfg.flush_tail || state.buffer.empty()) return out;

    const long cap = buffer_capacity(cfg);
    const long real = static_cast<long>(state.buffer.size());
    state.buffer.resize(cap, 0.0);
    AudioClip seg = process_buffer(state, rhat, cfg, real);
    state.buffer.clear();
    if (!seg.samples.empty()) out.push_back(std::move(seg));
    return out;
}

AudioClip run_offline_entire(const AudioClip& mixture,
                             const AudioClip& robot_clip,
                             const EgoNetWeights& weights,
                             const PipelineConfig& cfg) {
    validate_config(cfg);
    require_16k(mixture, "run_offline_entire");
    require_16k(robot_clip, "run_offline_entire");

    StreamState vad_only;
    detect_onset(vad_only, mixture.samples, cfg);
    if (!vad_only.vad.onset) {
        throw std::runtime_error("robot speech onset not detected");
    }
    const long onset = *vad_only.vad.onset;

    AudioClip post;
    post.sample_rate = kSampleRate;
    post.samples.assign(mixture.samples.begin() + onset, mixture.samples.end());

    const Spectrogram spm = stft(post, cfg.frame_len, cfg.hop);
    const EgoEstimate est = prepare_ego_estimate(robot_clip, weights);
    const Mat slice = rhat_slice(est.rhat, 0, static_cast<int>(spm.bins()),
                                 static_cast<int>(spm.frames()));
    const Mat shat = subtract(spm.magnitude, slice, cfg.subtraction);
    const AudioClip rec =
        reconstruct(shat, spm.phase, cfg.frame_len, cfg.hop, kSampleRate);
    return peak_normalize(rec);
}

AudioClip run_offline_blocks(const AudioClip& mixture,
                             const AudioClip& robot_clip,
                             const EgoNetWeights& weights,
                             const PipelineConfig& cfg) {
    validate_config(cfg);
    require_16k(mixture, "run_offline_blocks");
    require_16k(robot_clip, "run_offline_blocks");

    const EgoEstimate est = prepare_ego_estimate(robot_clip, weights);
    StreamState state;
    std::vector<AudioClip> segments =
        push_samples(state, mixture.samples, est.rhat, cfg);
    std::vector<AudioClip> tail = finish(state, est.rhat, cfg);
    segments.insert(segments.end(), tail.begin(), tail.end());
    if (!state.vad.onset) {
        throw std::runtime_error("robot speech onset not detected");
    }

    AudioClip out;
    out.sample_rate = kSampleRate;
    for (const AudioClip& seg : segments) {
        out.samples.insert(out.samples.end(), seg.samples.begin(),
                           seg.samples.end());
    }
    return out;
}

}  // namespace egofilter
