#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egofilter/audio.hpp"
#include "egofilter/stft.hpp"

namespace egofilter {

// Scale-invariant signal-to-distortion ratio in dB, capped at +100.
// Lengths must match and the reference must be non-zero.
double si_sdr(const AudioClip& estimate, const AudioClip& reference);

// RMS over cells of 20*log10((|a|+eps)/(|b|+eps)), eps = 1e-10.
double log_spectral_distance(const Spectrogram& a, const Spectrogram& b);

struct EvalRecord {
    std::string id;
    double si_sdr_db = 0.0;
    double lsd_db = 0.0;
    double ar_target = 0.0;
    double snr_db = 0.0;
    int words_target = 0;
    std::optional<double> wer_percent;
    std::optional<int> gender_code;
};

// Bottom-up Ward-linkage clustering over z-scored feature columns
// (words, snr_db, ar_target, plus wer when every record carries one).
// Constant columns are dropped with a warning. Labels are 0..k-1, ordered
// by each cluster's smallest record index.
struct ClusterResult {
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    // Per-cluster mean of each (unstandardized) feature column, then the
    // cluster's mean si_sdr_db appended as the last column.
    std::vector<std::vector<double>> cluster_means;
    std::vector<int> cluster_sizes;
    std::vector<std::string> warnings;
};

ClusterResult agglomerative_cluster(const std::vector<EvalRecord>& records,
                                    int k);

struct EvalInput {
    std::string id;
    AudioClip extracted;
    AudioClip reference;
    double ar_target = 0.0;
    double snr_db = 0.0;
    int words_target = 0;
    std::optional<double> wer_percent;
};

struct MetricStats {
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
};

struct EvalSummary {
    int count = 0;
    int error_count = 0;
    std::vector<std::string> errors;
    MetricStats si_sdr;
    MetricStats lsd;
    // Percentage of evaluated files whose SI-SDR clears each threshold.
    double pct_si_sdr_above_10 = 0.0;
    double pct_si_sdr_above_0 = 0.0;
};

struct EvalReport {
    std::vector<EvalRecord> records;
    EvalSummary summary;
};

// Per-file SI-SDR and log-spectral distance plus summary statistics.
// Pairs whose clips cannot be compared produce an error entry and are
// excluded from the summary.
EvalReport evaluate_corpus(const std::vector<EvalInput>& inputs);

}  // namespace egofilter
