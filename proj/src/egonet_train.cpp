#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "egofilter/egonet.hpp"
#include "egofilter/rng.hpp"

namespace egofilter {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
}  // namespace

void adam_step(EgoNetWeights& weights, const std::vector<Tensor>& grads,
               AdamState& state, double lr) {
    if (!(lr > 0.0)) throw std::invalid_argument("adam_step: lr must be > 0");
    if (grads.size() != weights.tensors.size()) {
        throw std::invalid_argument("adam_step: gradient tensor count mismatch");
    }
    for (size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].data.size() != weights.tensors[i].data.size()) {
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        }
        for (float g : grads[i].data) {
            if (!std::isfinite(g)) {
                throw std::invalid_argument("adam_step: non-finite gradient");
            }
        }
    }
    if (state.m.empty()) {
        state.m.resize(weights.tensors.size());
        state.v.resize(weights.tensors.size());
        for (size_t i = 0; i < weights.tensors.size(); ++i) {
            state.m[i].assign(weights.tensors[i].data.size(), 0.0f);
            state.v[i].assign(weights.tensors[i].data.size(), 0.0f);
        }
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    for (size_t i = 0; i < weights.tensors.size(); ++i) {
        auto& w = weights.tensors[i].data;
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto& g = grads[i].data;
        for (size_t n = 0; n < w.size(); ++n) {
            const double gn = g[n];
            const double mn = kBeta1 * m[n] + (1.0 - kBeta1) * gn;
            const double vn = kBeta2 * v[n] + (1.0 - kBeta2) * gn * gn;
            m[n] = static_cast<float>(mn);
            v[n] = static_cast<float>(vn);
            const double mhat = mn / bc1;
            const double vhat = vn / bc2;
            w[n] = static_cast<float>(w[n] - lr * mhat / (std::sqrt(vhat) + kEps));
        }
    }
}

TrainResult train(const std::vector<TrainPair>& pairs,
                  const EgoNetConfig& config, const TrainOptions& opts) {
    if (pairs.empty()) throw std::invalid_argument("train: empty dataset");
    if (opts.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (opts.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    for (const auto& pr : pairs) {
        require_same_shape(pr.r_mag, pr.ego_mag, "train pair");
    }

    // Fix the compressed-domain scale from the targets before any step.
    EgoNetConfig cfg = config;
    double ms = 0.0;
    for (const auto& pr : pairs) {
        for (double m : pr.ego_mag.v) {
            ms = std::max(ms, std::pow(m, cfg.compression_exponent));
        }
    }
    cfg.magnitude_scale = ms > 0.0 ? ms : 1.0;

    TrainResult res;
    res.weights = init_weights(cfg, opts.seed);
    AdamState state;
    Rng shuffle_rng = substream(opts.seed, 1);

    std::vector<size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(shuffle_rng.uniform(0.0, static_cast<double>(i)));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(opts.batch_size)) {
            const size_t end = std::min(order.size(),
                                        start + static_cast<size_t>(opts.batch_size));
            std::vector<Tensor> grads = zero_grads(res.weights);
            double batch_loss = 0.0;
            for (size_t n = start; n < end; ++n) {
                const auto& pr = pairs[order[n]];
                batch_loss += gradient_accumulate(res.weights, pr.r_mag,
                                                  pr.ego_mag, grads);
            }
            const float inv = 1.0f / static_cast<float>(end - start);
            for (auto& t : grads) {
                for (auto& g : t.data) g *= inv;
            }
            batch_loss /= static_cast<double>(end - start);
            res.loss_curve.push_back(batch_loss);
            adam_step(res.weights, grads, state, opts.lr);
        }
    }
    return res;
}

}  // namespace egofilter
