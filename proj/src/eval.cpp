#include "egofilter/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace egofilter {

double si_sdr(const AudioClip& estimate, const AudioClip& reference) {
    if (estimate.samples.size() != reference.samples.size()) {
        throw std::invalid_argument("si_sdr: length mismatch");
    }
    if (estimate.samples.empty()) {
        throw std::invalid_argument("si_sdr: empty clips");
    }
    double dot = 0.0, ref_energy = 0.0;
    for (size_t i = 0; i < reference.samples.size(); ++i) {
        dot += estimate.samples[i] * reference.samples[i];
        ref_energy += reference.samples[i] * reference.samples[i];
    }
    if (ref_energy == 0.0) {
        throw std::invalid_argument("si_sdr: zero reference");
    }
    const double scale = dot / ref_energy;
    double target_energy = 0.0, error_energy = 0.0;
    for (size_t i = 0; i < reference.samples.size(); ++i) {
        const double t = scale * reference.samples[i];
        const double e = estimate.samples[i] - t;
        target_energy += t * t;
        error_energy += e * e;
    }
    if (error_energy == 0.0 || target_energy >= 1e10 * error_energy) {
        return 100.0;
    }
    return std::min(100.0, 10.0 * std::log10(target_energy / error_energy));
}

double log_spectral_distance(const Spectrogram& a, const Spectrogram& b) {
    require_same_shape(a.magnitude, b.magnitude, "log_spectral_distance");
    constexpr double kEps = 1e-10;
    double acc = 0.0;
    for (size_t n = 0; n < a.magnitude.v.size(); ++n) {
        const double d = 20.0 * std::log10((a.magnitude.v[n] + kEps) /
                                           (b.magnitude.v[n] + kEps));
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.magnitude.v.size()));
}

namespace {

struct FeatureTable {
    std::vector<std::string> names;
    // column-major: columns[c][row]
    std::vector<std::vector<double>> columns;
};

FeatureTable build_features(const std::vector<EvalRecord>& records) {
    FeatureTable t;
    const size_t n = records.size();
    t.names = {"words", "snr_db", "ar_target"};
    t.columns.resize(3, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i) {
        t.columns[0][i] = static_cast<double>(records[i].words_target);
        t.columns[1][i] = records[i].snr_db;
        t.columns[2][i] = records[i].ar_target;
    }
    const bool all_wer = std::all_of(
        records.begin(), records.end(),
        [](const EvalRecord& r) { return r.wer_percent.has_value(); });
    if (all_wer && n > 0) {
        t.names.push_back("wer_percent");
        std::vector<double> col(n);
        for (size_t i = 0; i < n; ++i) col[i] = *records[i].wer_percent;
        t.columns.push_back(std::move(col));
    }
    return t;
}

}  // namespace

ClusterResult agglomerative_cluster(const std::vector<EvalRecord>& records,
                                    int k) {
    const int n = static_cast<int>(records.size());
    if (k < 1) throw std::invalid_argument("agglomerative_cluster: k must be >= 1");
    if (k > n) {
        throw std::invalid_argument(
            "agglomerative_cluster: k exceeds record count");
    }

    ClusterResult result;
    FeatureTable raw = build_features(records);

    // z-score each column; constant columns carry no distance information.
    std::vector<std::vector<double>> z;
    for (size_t c = 0; c < raw.columns.size(); ++c) {
        const auto& col = raw.columns[c];
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / n);
        if (sd < 1e-12) {
            result.warnings.push_back("constant feature dropped: " +
                                      raw.names[c]);
            continue;
        }
        std::vector<double> zc(n);
        for (int i = 0; i < n; ++i) zc[i] = (col[i] - mean) / sd;
        z.push_back(std::move(zc));
    }
    const size_t dims = z.size();

    // Active clusters: centroid in z-space, member count, smallest member
    // index as the deterministic identity.
    struct Cluster {
        std::vector<double> centroid;
        int size = 0;
        int min_index = 0;
        std::vector<int> members;
    };
    std::vector<Cluster> active;
    active.reserve(n);
    for (int i = 0; i < n; ++i) {
        Cluster c;
        c.centroid.resize(dims);
        for (size_t d = 0; d < dims; ++d) c.centroid[d] = z[d][i];
        c.size = 1;
        c.min_index = i;
        c.members = {i};
        active.push_back(std::move(c));
    }

    // Ward merge cost between clusters a and b. Ties resolve to the pair
    // with the lexicographically smallest (min_index_a, min_index_b).
    const auto ward_cost = [&](const Cluster& a, const Cluster& b) {
        double d2 = 0.0;
        for (size_t d = 0; d < dims; ++d) {
            const double diff = a.centroid[d] - b.centroid[d];
            d2 += diff * diff;
        }
        return (static_cast<double>(a.size) * b.size / (a.size + b.size)) * d2;
    };

    while (static_cast<int>(active.size()) > k) {
        double best = std::numeric_limits<double>::infinity();
        size_t bi = 0, bj = 1;
        int best_lo = -1, best_hi = -1;
        for (size_t i = 0; i < active.size(); ++i) {
            for (size_t j = i + 1; j < active.size(); ++j) {
                const double cost = ward_cost(active[i], active[j]);
                const int lo = std::min(active[i].min_index, active[j].min_index);
                const int hi = std::max(active[i].min_index, active[j].min_index);
                const bool better =
                    cost < best ||
                    (cost == best &&
                     (lo < best_lo || (lo == best_lo && hi < best_hi)));
                if (better) {
                    best = cost;
                    bi = i;
                    bj = j;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        }
        Cluster merged;
        Cluster& a = active[bi];
        Cluster& b = active[bj];
        merged.size = a.size + b.size;
        merged.centroid.resize(dims);
        for (size_t d = 0; d < dims; ++d) {
            merged.centroid[d] =
                (a.centroid[d] * a.size + b.centroid[d] * b.size) / merged.size;
        }
        merged.min_index = std::min(a.min_index, b.min_index);
        merged.members = a.members;
        merged.members.insert(merged.members.end(), b.members.begin(),
                              b.members.end());
        active.erase(active.begin() + bj);
        active[bi] = std::move(merged);
    }

    std::sort(active.begin(), active.end(),
              [](const Cluster& a, const Cluster& b) {
                  return a.min_index < b.min_index;
              });

    result.labels.assign(n, -1);
    for (size_t c = 0; c < active.size(); ++c) {
        for (int m : active[c].members) {
            result.labels[m] = static_cast<int>(c);
        }
    }

    for (const Cluster& c : active) {
        std::vector<double> means;
        for (size_t col = 0; col < raw.columns.size(); ++col) {
            // report every raw column, including any dropped from distances
            double m = 0.0;
            for (int i : c.members) m += raw.columns[col][i];
            means.push_back(m / c.size);
        }
        double sdr = 0.0;
        for (int i : c.members) sdr += records[i].si_sdr_db;
        means.push_back(sdr / c.size);
        result.cluster_means.push_back(std::move(means));
        result.cluster_sizes.push_back(c.size);
    }
    // cluster_means columns follow the raw feature order plus si_sdr; a
    // column dropped from the distance space still appears in the table.
    result.feature_names = raw.names;
    result.feature_names.push_back("si_sdr_db");
    return result;
}

namespace {

MetricStats stats_of(std::vector<double> values) {
    MetricStats s;
    const size_t n = values.size();
    if (n == 0) return s;
    for (double v : values) s.mean += v;
    s.mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(var / n);
    std::sort(values.begin(), values.end());
    s.median = (n % 2 == 1) ? values[n / 2]
                            : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    return s;
}

}  // namespace

EvalReport evaluate_corpus(const std::vector<EvalInput>& inputs) {
    if (inputs.empty()) {
        throw std::invalid_argument("evaluate_corpus: no inputs");
    }
    EvalReport report;
    std::vector<double> sdrs, lsds;
    for (const EvalInput& in : inputs) {
        try {
            EvalRecord rec;
            rec.id = in.id;
            rec.si_sdr_db = si_sdr(in.extracted, in.reference);
            rec.lsd_db = log_spectral_distance(stft(in.extracted),
                                               stft(in.reference));
            rec.ar_target = in.ar_target;
            rec.snr_db = in.snr_db;
            rec.words_target = in.words_target;
            rec.wer_percent = in.wer_percent;
            sdrs.push_back(rec.si_sdr_db);
            lsds.push_back(rec.lsd_db);
            report.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            ++report.summary.error_count;
            report.summary.errors.push_back(in.id + ": " + e.what());
        }
    }
    report.summary.count = static_cast<int>(report.records.size());
    report.summary.si_sdr = stats_of(sdrs);
    report.summary.lsd = stats_of(lsds);
    if (!sdrs.empty()) {
        int above10 = 0, above0 = 0;
        for (double v : sdrs) {
            if (v > 10.0) ++above10;
            if (v > 0.0) ++above0;
        }
        report.summary.pct_si_sdr_above_10 = 100.0 * above10 / sdrs.size();
        report.summary.pct_si_sdr_above_0 = 100.0 * above0 / sdrs.size();
    }
    return report;
}

}  // namespace egofilter
