#include "egofilter/stft.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace egofilter {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kWindowPowerFloor = 1e-8;
constexpr double kLogFloor = 1e-10;
}  // namespace

std::vector<double> hann_periodic(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(kTwoPi * i / n));
    }
    return w;
}

Spectrogram stft(const AudioClip& clip, int frame_len, int hop) {
    if (frame_len <= 0 || frame_len % 2 != 0) {
        throw std::invalid_argument("stft: frame_len must be positive even");
    }
    if (hop <= 0 || hop > frame_len) {
        throw std::invalid_argument("stft: hop must be in (0, frame_len]");
    }
    if (clip.size() < static_cast<size_t>(frame_len)) {
        throw std::invalid_argument("stft: insufficient samples");
    }
    require_finite(clip, "stft");

    const size_t T = (clip.size() - frame_len) / hop + 1;
    const size_t F = static_cast<size_t>(frame_len) / 2 + 1;
    const std::vector<double> win = hann_periodic(frame_len);

    Spectrogram spec;
    spec.magnitude = Mat(F, T);
    spec.phase = Mat(F, T);
    spec.frame_len = frame_len;
    spec.hop = hop;
    spec.sample_rate = clip.sample_rate;

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> frame(frame_len);
    std::vector<std::complex<double>> bins;
    for (size_t t = 0; t < T; ++t) {
        const double* src = clip.samples.data() + t * hop;
        for (int i = 0; i < frame_len; ++i) frame[i] = src[i] * win[i];
        fft.fwd(bins, frame);
        for (size_t f = 0; f < F; ++f) {
            spec.magnitude(f, t) = std::abs(bins[f]);
            spec.phase(f, t) = std::arg(bins[f]);
        }
    }
    return spec;
}

IstftResult istft(const Spectrogram& spec) {
    const int frame_len = spec.frame_len;
    const int hop = spec.hop;
    const size_t F = spec.bins();
    const size_t T = spec.frames();
    if (T == 0 || F != static_cast<size_t>(frame_len) / 2 + 1) {
        throw std::invalid_argument("istft: malformed spectrogram");
    }
    require_same_shape(spec.magnitude, spec.phase, "istft");

    const std::vector<double> win = hann_periodic(frame_len);
    const size_t out_len = frame_len + (T - 1) * hop;

    IstftResult res;
    res.clip.sample_rate = spec.sample_rate;
    res.clip.samples.assign(out_len, 0.0);
    std::vector<double> norm(out_len, 0.0);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<std::complex<double>> bins(F);
    std::vector<double> frame;
    for (size_t t = 0; t < T; ++t) {
        for (size_t f = 0; f < F; ++f) {
            bins[f] = std::polar(spec.magnitude(f, t), spec.phase(f, t));
        }
        fft.inv(frame, bins, frame_len);
        double* dst = res.clip.samples.data() + t * hop;
        double* nrm = norm.data() + t * hop;
        for (int i = 0; i < frame_len; ++i) {
            dst[i] += frame[i] * win[i];
            nrm[i] += win[i] * win[i];
        }
    }
    for (size_t n = 0; n < out_len; ++n) {
        if (norm[n] > kWindowPowerFloor) {
            res.clip.samples[n] /= norm[n];
        } else {
            res.clip.samples[n] = 0.0;
            res.zeroed_samples.push_back(n);
        }
    }
    return res;
}

double alpha_ratio(const Spectrogram& spec) {
    double num = 0.0;
    double den = 0.0;
    for (size_t f = 0; f < spec.bins(); ++f) {
        const bool high = spec.bin_hz(f) > 1000.0;
        const double* row = spec.magnitude.row(f);
        double s = 0.0;
        for (size_t t = 0; t < spec.frames(); ++t) {
            s += 20.0 * std::log10(std::max(row[t], kLogFloor));
        }
        (high ? num : den) += s;
    }
    if (den == 0.0) {
        throw std::invalid_argument("alpha_ratio: degenerate low-band energy");
    }
    return num / den;
}

}  // namespace egofilter
