#include "egofilter/datagen.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "egofilter/rng.hpp"
#include "egofilter/wav.hpp"

namespace egofilter {

namespace {

constexpr int kSampleRate = 16000;
// -60 dB of amplitude at t = rt60: envelope 10^(-3 t / rt60).
const double kDecay = 3.0 * std::log(10.0);

void require_16k(const AudioClip& clip, const char* what) {
    if (clip.sample_rate != kSampleRate) {
        throw std::invalid_argument(std::string(what) + ": expected 16 kHz audio");
    }
}

std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
    const size_t out_len = a.size() + b.size() - 1;
    size_t nfft = 1;
    while (nfft < out_len) nfft <<= 1;

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> pa(a);
    pa.resize(nfft, 0.0);
    std::vector<double> pb(b);
    pb.resize(nfft, 0.0);
    std::vector<std::complex<double>> fa, fb;
    fft.fwd(fa, pa);
    fft.fwd(fb, pb);
    for (size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    std::vector<double> out;
    fft.inv(out, fa, static_cast<int>(nfft));
    out.resize(out_len);
    return out;
}

// First-order high shelf, +3 dB above 2 kHz (bilinear transform of
// (G s + w)/(s + w); unity at DC, G at Nyquist).
void high_shelf_inplace(std::vector<double>& x) {
    constexpr double kPi = 3.14159265358979323846;
    const double g = std::pow(10.0, 3.0 / 20.0);
    const double w = std::tan(kPi * 2000.0 / kSampleRate);
    const double b0 = (g + w) / (1.0 + w);
    const double b1 = (w - g) / (1.0 + w);
    const double a1 = (w - 1.0) / (1.0 + w);
    double x1 = 0.0, y1 = 0.0;
    for (double& v : x) {
        const double y = b0 * v + b1 * x1 - a1 * y1;
        x1 = v;
        y1 = y;
        v = y;
    }
}

// Identity below 0.9, then a tanh knee bounded by 1.
double soft_clip(double x) {
    const double ax = std::fabs(x);
    if (ax <= 0.9) return x;
    return std::copysign(0.9 + 0.1 * std::tanh((ax - 0.9) / 0.1), x);
}

double rms_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double power_in(const std::vector<double>& v, SampleRange r) {
    double acc = 0.0;
    for (size_t i = r.begin; i < r.end; ++i) acc += v[i] * v[i];
    return acc;
}

}  // namespace

double rir_envelope(double rt60_seconds, double t_seconds) {
    if (rt60_seconds < 0.0) {
        throw std::invalid_argument("rir_envelope: negative rt60");
    }
    if (rt60_seconds == 0.0) return t_seconds == 0.0 ? 1.0 : 0.0;
    return std::exp(-kDecay * t_seconds / rt60_seconds);
}

std::vector<double> synth_rir(double rt60_seconds, double length_seconds,
                              uint64_t seed) {
    if (rt60_seconds < 0.0) {
        throw std::invalid_argument("synth_rir: negative rt60");
    }
    if (rt60_seconds == 0.0) return {1.0};

    const long n =
        std::max<long>(1, std::lround(length_seconds * kSampleRate));
    std::vector<double> rir(static_cast<size_t>(n), 0.0);
    rir[0] = 1.0;

    // Tail gain calibrated once: expected tail energy integrates to
    // rt60 * fs / (2 * kDecay), set equal to the direct path's at 0.5 s.
    const double gain = std::sqrt(2.0 * kDecay / (0.5 * kSampleRate));
    Rng rng(seed);
    for (long i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) / kSampleRate;
        rir[static_cast<size_t>(i)] =
            gain * rng.normal() * rir_envelope(rt60_seconds, t);
    }
    return rir;
}

AudioClip apply_playback(const AudioClip& robot_clip,
                         const std::vector<double>& rir) {
    require_16k(robot_clip, "apply_playback");
    if (robot_clip.samples.empty() || rir.empty()) {
        throw std::invalid_argument("apply_playback: empty input");
    }
    AudioClip out;
    out.sample_rate = kSampleRate;
    out.samples = fft_convolve(robot_clip.samples, rir);
    high_shelf_inplace(out.samples);
    for (double& v : out.samples) v = soft_clip(v);
    return out;
}

std::vector<double> pink_noise(size_t n, uint64_t seed) {
    if (n == 0) return {};
    constexpr int kRows = 16;
    Rng rng(seed);
    double rows[kRows];
    double row_sum = 0.0;
    for (double& r : rows) {
        r = rng.normal();
        row_sum += r;
    }
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        const int k = std::countr_zero(i + 1);
        if (k < kRows) {
            row_sum -= rows[k];
            rows[k] = rng.normal();
            row_sum += rows[k];
        }
        out[i] = row_sum + rng.normal();  // white row refreshes every sample
    }
    const double scale = rms_of(out);
    if (scale > 0.0) {
        for (double& v : out) v /= scale;
    }
    return out;
}

MixOutput mix_clips(const AudioClip& robot_clip, const AudioClip& target_clip,
                    const MixtureSpec& spec) {
    require_16k(robot_clip, "mix");
    require_16k(target_clip, "mix");
    require_finite(robot_clip, "mix: robot");
    require_finite(target_clip, "mix: target");

    // The RIR is truncated at rt60, where the envelope has fallen to -60 dB.
    const double rir_seconds = spec.rt60_seconds;
    const std::vector<double> rir =
        synth_rir(spec.rt60_seconds, rir_seconds,
                  substream(spec.seed, 1).next_u64());
    const AudioClip wet = apply_playback(robot_clip, rir);

    const long off = std::lround(spec.overlap_offset_seconds * kSampleRate);
    const size_t ego_at = static_cast<size_t>(std::max<long>(0, -off));
    const size_t tgt_at = static_cast<size_t>(std::max<long>(0, off));
    const size_t len = std::max(ego_at + wet.samples.size(),
                                tgt_at + target_clip.samples.size());

    std::vector<double> ego_track(len, 0.0), tgt_track(len, 0.0);
    std::copy(wet.samples.begin(), wet.samples.end(),
              ego_track.begin() + ego_at);
    std::copy(target_clip.samples.begin(), target_clip.samples.end(),
              tgt_track.begin() + tgt_at);

    MixOutput out;
    out.ego_range = {ego_at, ego_at + wet.samples.size()};
    out.target_range = {tgt_at, tgt_at + target_clip.samples.size()};
    out.overlap = {std::max(out.ego_range.begin, out.target_range.begin),
                   std::min(out.ego_range.end, out.target_range.end)};
    if (out.overlap.length() == 0) {
        throw std::runtime_error("no overlap region");
    }
    if (power_in(tgt_track, out.overlap) == 0.0) {
        throw std::runtime_error("mix: target silent in overlap region");
    }
    if (power_in(ego_track, out.overlap) == 0.0) {
        throw std::runtime_error("mix: ego silent in overlap region");
    }

    AudioClip tgt_clip{tgt_track, kSampleRate};
    AudioClip ego_clip{ego_track, kSampleRate};
    const double measured = overlap_snr_db(tgt_clip, ego_clip, out.overlap);
    const double gain = std::pow(10.0, (spec.snr_db - measured) / 20.0);
    for (double& v : tgt_track) v *= gain;

    std::vector<double> mixture(len);
    for (size_t i = 0; i < len; ++i) mixture[i] = ego_track[i] + tgt_track[i];
    if (std::isfinite(spec.fan_noise_db)) {
        const double noise_rms =
            rms_of(wet.samples) * std::pow(10.0, spec.fan_noise_db / 20.0);
        const std::vector<double> noise =
            pink_noise(len, substream(spec.seed, 2).next_u64());
        for (size_t i = 0; i < len; ++i) mixture[i] += noise_rms * noise[i];
    }

    double peak = 0.0;
    for (double v : mixture) peak = std::max(peak, std::fabs(v));
    if (peak > 1.0) {
        out.peak_scale = 1.0 / peak;
        for (double& v : mixture) v *= out.peak_scale;
        for (double& v : ego_track) v *= out.peak_scale;
        for (double& v : tgt_track) v *= out.peak_scale;
    }

    out.mixture = {std::move(mixture), kSampleRate};
    out.recorded_ego = {std::move(ego_track), kSampleRate};
    out.scaled_target = {std::move(tgt_track), kSampleRate};
    return out;
}

MixOutput mix(const MixtureSpec& spec) {
    return mix_clips(read_wav(spec.robot_path), read_wav(spec.target_path),
                     spec);
}

std::vector<MixtureSpec> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open " + path);
    std::vector<MixtureSpec> specs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("manifest: line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        MixtureSpec s;
        s.target_path = j.value("target_path", std::string());
        s.robot_path = j.value("robot_path", std::string());
        s.snr_db = j.value("snr_db", s.snr_db);
        s.rt60_seconds = j.value("rt60_seconds", s.rt60_seconds);
        s.fan_noise_db = j.value("fan_noise_db", s.fan_noise_db);
        s.overlap_offset_seconds =
            j.value("overlap_offset_seconds", s.overlap_offset_seconds);
        s.seed = j.value("seed", s.seed);
        s.words = j.value("words", s.words);
        if (s.robot_path.empty()) {
            throw std::runtime_error("manifest: line " +
                                     std::to_string(line_no) +
                                     ": robot_path is required");
        }
        specs.push_back(std::move(s));
    }
    return specs;
}

void save_manifest(const std::vector<MixtureSpec>& specs,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("manifest: cannot write " + path);
    for (const MixtureSpec& s : specs) {
        nlohmann::json j;
        j["target_path"] = s.target_path;
        j["robot_path"] = s.robot_path;
        j["snr_db"] = s.snr_db;
        j["rt60_seconds"] = s.rt60_seconds;
        j["fan_noise_db"] = s.fan_noise_db;
        j["overlap_offset_seconds"] = s.overlap_offset_seconds;
        j["seed"] = s.seed;
        j["words"] = s.words;
        out << j.dump() << "\n";
    }
}

}  // namespace egofilter
