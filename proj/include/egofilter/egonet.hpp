#ifndef EGOFILTER_EGONET_HPP
#define EGOFILTER_EGONET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "egofilter/mat.hpp"

namespace egofilter {

struct EgoNetConfig {
    int channels = 128;
    int kernel = 5;
    std::vector<int> dilations = {2, 4, 8, 16};
    bool convs_share_weights_across_blocks = true;
    double compression_exponent = 0.3;
    // Max compressed magnitude seen over the training targets; fixed by
    // train() before the first step and persisted with the weights.
    double magnitude_scale = 1.0;
};

// Throws std::invalid_argument on a broken invariant.
void validate(const EgoNetConfig& config);

struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;

    size_t size() const { return data.size(); }
};

// All learnable tensors in a fixed order: enc_w, enc_b, dil0_w, dil0_b,
// [dil1_w, dil1_b when blocks do not share,] skip_w, skip_b, dec_w, dec_b.
// Conv tensor shapes are [out, in, kh, kw]; dec_w holds the transposed-conv
// tensor as [in, out, kh, kw].
struct EgoNetWeights {
    EgoNetConfig config;
    std::vector<Tensor> tensors;

    Tensor& find(const std::string& name);
    const Tensor& find(const std::string& name) const;
};

// Kernels uniform in +-sqrt(1/fan_in), biases zero, deterministic in seed.
EgoNetWeights init_weights(const EgoNetConfig& config, uint64_t seed);

size_t param_count(const EgoNetWeights& weights);

// Predicted recorded-ego magnitude from the played-signal magnitude, same
// F x T shape. Requires F >= kernel and T >= kernel * max(dilations).
Mat forward(const EgoNetWeights& weights, const Mat& r_mag);

// mean((pred^p - target^p)^2) over all cells.
double power_law_loss(const Mat& pred_mag, const Mat& target_mag,
                      double p = 0.3);

// Analytic gradient of power_law_loss(forward(weights, r_mag), target_mag)
// with respect to every weight tensor. gradient_accumulate adds into grads
// (zero-initialized tensors with the weight layout) and returns the loss.
std::vector<Tensor> gradient(const EgoNetWeights& weights, const Mat& r_mag,
                             const Mat& target_mag, double* loss = nullptr);
double gradient_accumulate(const EgoNetWeights& weights, const Mat& r_mag,
                           const Mat& target_mag, std::vector<Tensor>& grads);
std::vector<Tensor> zero_grads(const EgoNetWeights& weights);

// Float64 twins of forward/gradient for numerical verification. The flat
// index space concatenates tensors in their stored order; loss_perturbed_ref
// evaluates the loss with a single coordinate offset by delta, applied after
// the upcast so the perturbation is exact.
Mat forward_ref(const EgoNetWeights& weights, const Mat& r_mag);
std::vector<double> gradient_flat_ref(const EgoNetWeights& weights,
                                      const Mat& r_mag, const Mat& target_mag);
double loss_perturbed_ref(const EgoNetWeights& weights, size_t flat_index,
                          double delta, const Mat& r_mag,
                          const Mat& target_mag);

struct AdamState {
    uint64_t step = 0;
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
};

// Standard Adam, beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected. Throws on
// non-finite gradients without touching the weights.
void adam_step(EgoNetWeights& weights, const std::vector<Tensor>& grads,
               AdamState& state, double lr);

struct TrainPair {
    Mat r_mag;
    Mat ego_mag;
};

struct TrainOptions {
    int epochs = 50;
    double lr = 0.001;
    int batch_size = 4;
    uint64_t seed = 1;
};

struct TrainResult {
    EgoNetWeights weights;
    // Batch loss before each optimizer step.
    std::vector<double> loss_curve;
};

// Minibatch Adam over shuffled pairs. Before the first step the config's
// magnitude_scale is fixed to the max compressed target.
TrainResult train(const std::vector<TrainPair>& pairs,
                  const EgoNetConfig& config, const TrainOptions& opts);

// EGOF weights file, see README for the layout.
void save_weights(const EgoNetWeights& weights, const std::string& path);
EgoNetWeights load_weights(const std::string& path);

}  // namespace egofilter

#endif
