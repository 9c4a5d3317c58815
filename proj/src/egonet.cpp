#include "egofilter/egonet.hpp"

#include <cmath>
#include <stdexcept>

#include "egofilter/rng.hpp"
#include "egonet_engine.hpp"

namespace egofilter {

namespace {

struct TensorSpec {
    const char* name;
    std::vector<int> shape;
};

std::vector<TensorSpec> tensor_specs(const EgoNetConfig& c) {
    const int C = c.channels, k = c.kernel;
    std::vector<TensorSpec> specs;
    specs.push_back({"enc_w", {C, 1, k, k}});
    specs.push_back({"enc_b", {C}});
    specs.push_back({"dil0_w", {C, C, k, k}});
    specs.push_back({"dil0_b", {C}});
    if (!c.convs_share_weights_across_blocks) {
        specs.push_back({"dil1_w", {C, C, k, k}});
        specs.push_back({"dil1_b", {C}});
    }
    specs.push_back({"skip_w", {C, C, 1, 1}});
    specs.push_back({"skip_b", {C}});
    specs.push_back({"dec_w", {C, 1, k, k}});
    specs.push_back({"dec_b", {1}});
    return specs;
}

size_t spec_size(const TensorSpec& s) {
    size_t n = 1;
    for (int d : s.shape) n *= static_cast<size_t>(d);
    return n;
}

double fan_in_of(const EgoNetConfig& c, const std::string& name) {
    const double kk = static_cast<double>(c.kernel) * c.kernel;
    if (name == "enc_w") return kk;
    if (name == "skip_w") return c.channels;
    if (name == "enc_b" || name == "dil0_b" || name == "dil1_b" ||
        name == "skip_b" || name == "dec_b") {
        return 0.0;  // biases are zero-initialized
    }
    return kk * c.channels;  // dil*_w, dec_w
}

void check_forward_input(const EgoNetWeights& w, const Mat& r_mag) {
    validate(w.config);
    const int k = w.config.kernel;
    int max_d = 0;
    for (int d : w.config.dilations) max_d = std::max(max_d, d);
    const int min_t = k * max_d;
    if (r_mag.rows < k) {
        throw std::invalid_argument("egonet forward: needs at least " +
                                    std::to_string(k) + " frequency rows, got " +
                                    std::to_string(r_mag.rows));
    }
    if (r_mag.cols < min_t) {
        throw std::invalid_argument(
            "egonet forward: needs at least " + std::to_string(min_t) +
            " frames (kernel x max dilation), got " +
            std::to_string(r_mag.cols));
    }
    for (double m : r_mag.v) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw std::invalid_argument(
                "egonet forward: magnitudes must be finite and non-negative");
        }
    }
}

// Engine gradients in public tensor order, merging shared dilation blocks and
// unflipping the decoder kernel.
template <typename Real>
std::vector<std::vector<Real>> public_grads(const EgoNetConfig& cfg,
                                            const engine::NetGrads<Real>& g) {
    const int C = cfg.channels, k = cfg.kernel;
    std::vector<std::vector<Real>> out;
    out.push_back(g.enc_w);
    out.push_back(g.enc_b);
    if (cfg.convs_share_weights_across_blocks) {
        std::vector<Real> dw = g.dil_w0;
        for (size_t n = 0; n < dw.size(); ++n) dw[n] += g.dil_w1[n];
        std::vector<Real> db = g.dil_b0;
        for (size_t n = 0; n < db.size(); ++n) db[n] += g.dil_b1[n];
        out.push_back(std::move(dw));
        out.push_back(std::move(db));
    } else {
        out.push_back(g.dil_w0);
        out.push_back(g.dil_b0);
        out.push_back(g.dil_w1);
        out.push_back(g.dil_b1);
    }
    out.push_back(g.skip_w);
    out.push_back(g.skip_b);
    std::vector<Real> dec(g.dec_w.size());
    for (int ci = 0; ci < C; ++ci) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                dec[(static_cast<size_t>(ci) * k + i) * k + j] =
                    g.dec_w[(static_cast<size_t>(ci) * k + (k - 1 - i)) * k +
                            (k - 1 - j)];
            }
        }
    }
    out.push_back(std::move(dec));
    out.push_back(g.dec_b);
    return out;
}

// Applies a delta to the engine-layout coordinate(s) backing one public
// flat-index coordinate.
void perturb_net(engine::NetWeights<double>& net, const EgoNetConfig& cfg,
                 size_t flat_index, double delta) {
    const auto specs = tensor_specs(cfg);
    size_t ti = 0, off = flat_index;
    while (ti < specs.size() && off >= spec_size(specs[ti])) {
        off -= spec_size(specs[ti]);
        ++ti;
    }
    if (ti >= specs.size()) {
        throw std::invalid_argument("egonet: flat index out of range");
    }
    const std::string name = specs[ti].name;
    const int k = cfg.kernel;
    if (name == "enc_w") {
        net.enc_w[off] += delta;
    } else if (name == "enc_b") {
        net.enc_b[off] += delta;
    } else if (name == "dil0_w") {
        net.dil_w0[off] += delta;
        if (net.share) net.dil_w1[off] += delta;
    } else if (name == "dil0_b") {
        net.dil_b0[off] += delta;
        if (net.share) net.dil_b1[off] += delta;
    } else if (name == "dil1_w") {
        net.dil_w1[off] += delta;
    } else if (name == "dil1_b") {
        net.dil_b1[off] += delta;
    } else if (name == "skip_w") {
        net.skip_w[off] += delta;
    } else if (name == "skip_b") {
        net.skip_b[off] += delta;
    } else if (name == "dec_w") {
        const size_t kk = static_cast<size_t>(k) * k;
        const size_t ci = off / kk;
        const int i = static_cast<int>((off % kk) / k);
        const int j = static_cast<int>(off % k);
        net.dec_w[(ci * k + (k - 1 - i)) * k + (k - 1 - j)] += delta;
    } else {
        net.dec_b[off] += delta;
    }
}

}  // namespace

void validate(const EgoNetConfig& c) {
    if (c.channels < 1) throw std::invalid_argument("egonet config: channels must be >= 1");
    if (c.kernel < 1 || c.kernel % 2 == 0) {
        throw std::invalid_argument("egonet config: kernel must be odd");
    }
    if (c.dilations.empty()) {
        throw std::invalid_argument("egonet config: dilations must be non-empty");
    }
    int prev = 0;
    for (int d : c.dilations) {
        if (d <= prev) {
            throw std::invalid_argument(
                "egonet config: dilations must be strictly increasing and positive");
        }
        prev = d;
    }
    if (!(c.compression_exponent > 0.0)) {
        throw std::invalid_argument("egonet config: compression_exponent must be > 0");
    }
    if (!(c.magnitude_scale > 0.0)) {
        throw std::invalid_argument("egonet config: magnitude_scale must be > 0");
    }
}

Tensor& EgoNetWeights::find(const std::string& name) {
    for (auto& t : tensors) {
        if (t.name == name) return t;
    }
    throw std::invalid_argument("egonet weights: no tensor named " + name);
}

const Tensor& EgoNetWeights::find(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return t;
    }
    throw std::invalid_argument("egonet weights: no tensor named " + name);
}

EgoNetWeights init_weights(const EgoNetConfig& config, uint64_t seed) {
    validate(config);
    EgoNetWeights w;
    w.config = config;
    Rng rng(seed);
    for (const auto& spec : tensor_specs(config)) {
        Tensor t;
        t.name = spec.name;
        t.shape = spec.shape;
        t.data.resize(spec_size(spec));
        const double fan_in = fan_in_of(config, t.name);
        if (fan_in > 0.0) {
            const double bound = std::sqrt(1.0 / fan_in);
            for (auto& x : t.data) {
                x = static_cast<float>(rng.uniform(-bound, bound));
            }
        }
        w.tensors.push_back(std::move(t));
    }
    return w;
}

size_t param_count(const EgoNetWeights& weights) {
    size_t n = 0;
    for (const auto& t : weights.tensors) n += t.size();
    return n;
}

Mat forward(const EgoNetWeights& weights, const Mat& r_mag) {
    check_forward_input(weights, r_mag);
    auto net = engine::make_net<float>(weights);
    engine::NetTrace<float> tr;
    engine::net_forward(net, r_mag, tr);
    return engine::net_output(net, tr);
}

Mat forward_ref(const EgoNetWeights& weights, const Mat& r_mag) {
    check_forward_input(weights, r_mag);
    auto net = engine::make_net<double>(weights);
    engine::NetTrace<double> tr;
    engine::net_forward(net, r_mag, tr);
    return engine::net_output(net, tr);
}

double power_law_loss(const Mat& pred_mag, const Mat& target_mag, double p) {
    require_same_shape(pred_mag, target_mag, "power_law_loss");
    if (pred_mag.v.empty()) {
        throw std::invalid_argument("power_law_loss: empty matrices");
    }
    double acc = 0.0;
    for (size_t n = 0; n < pred_mag.v.size(); ++n) {
        if (!(pred_mag.v[n] >= 0.0) || !(target_mag.v[n] >= 0.0)) {
            throw std::invalid_argument("power_law_loss: negative magnitude");
        }
        const double d = std::pow(pred_mag.v[n], p) - std::pow(target_mag.v[n], p);
        acc += d * d;
    }
    return acc / static_cast<double>(pred_mag.v.size());
}

std::vector<Tensor> zero_grads(const EgoNetWeights& weights) {
    std::vector<Tensor> grads;
    for (const auto& t : weights.tensors) {
        Tensor g;
        g.name = t.name;
        g.shape = t.shape;
        g.data.assign(t.data.size(), 0.0f);
        grads.push_back(std::move(g));
    }
    return grads;
}

double gradient_accumulate(const EgoNetWeights& weights, const Mat& r_mag,
                           const Mat& target_mag, std::vector<Tensor>& grads) {
    check_forward_input(weights, r_mag);
    require_same_shape(r_mag, target_mag, "egonet gradient");
    auto net = engine::make_net<float>(weights);
    engine::NetTrace<float> tr;
    engine::net_forward(net, r_mag, tr);
    engine::NetGrads<float> ng;
    ng.resize_like(net);
    const double loss = engine::net_backward(net, tr, target_mag, ng);
    const auto pub = public_grads(weights.config, ng);
    for (size_t i = 0; i < grads.size(); ++i) {
        for (size_t n = 0; n < pub[i].size(); ++n) grads[i].data[n] += pub[i][n];
    }
    return loss;
}

std::vector<Tensor> gradient(const EgoNetWeights& weights, const Mat& r_mag,
                             const Mat& target_mag, double* loss) {
    std::vector<Tensor> grads = zero_grads(weights);
    const double l = gradient_accumulate(weights, r_mag, target_mag, grads);
    if (loss) *loss = l;
    return grads;
}

std::vector<double> gradient_flat_ref(const EgoNetWeights& weights,
                                      const Mat& r_mag,
                                      const Mat& target_mag) {
    check_forward_input(weights, r_mag);
    require_same_shape(r_mag, target_mag, "egonet gradient");
    auto net = engine::make_net<double>(weights);
    engine::NetTrace<double> tr;
    engine::net_forward(net, r_mag, tr);
    engine::NetGrads<double> ng;
    ng.resize_like(net);
    engine::net_backward(net, tr, target_mag, ng);
    const auto pub = public_grads(weights.config, ng);
    std::vector<double> flat;
    flat.reserve(param_count(weights));
    for (const auto& t : pub) flat.insert(flat.end(), t.begin(), t.end());
    return flat;
}

double loss_perturbed_ref(const EgoNetWeights& weights, size_t flat_index,
                          double delta, const Mat& r_mag,
                          const Mat& target_mag) {
    check_forward_input(weights, r_mag);
    auto net = engine::make_net<double>(weights);
    perturb_net(net, weights.config, flat_index, delta);
    engine::NetTrace<double> tr;
    engine::net_forward(net, r_mag, tr);
    const Mat pred = engine::net_output(net, tr);
    return power_law_loss(pred, target_mag, weights.config.compression_exponent);
}

}  // namespace egofilter
