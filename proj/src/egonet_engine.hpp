#ifndef EGOFILTER_EGONET_ENGINE_HPP
#define EGOFILTER_EGONET_ENGINE_HPP

// Internal compute engine behind egonet.hpp. Everything is templated on the
// scalar type: float is the production instantiation, double backs the
// finite-difference verification path. The hot 5x5 convolution has an AVX2
// micro-kernel; every op also has a plain reference loop that serves double
// and any non-x86 build.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define EGOFILTER_HAVE_AVX2 1
#endif

#include "egofilter/egonet.hpp"
#include "egofilter/mat.hpp"

namespace egofilter::engine {

template <typename Real>
struct Planes {
    int C = 0, H = 0, W = 0;
    std::vector<Real> v;

    void resize(int c, int h, int w) {
        C = c;
        H = h;
        W = w;
        v.assign(static_cast<size_t>(c) * h * w, Real(0));
    }
    Real* ch(int c) { return v.data() + static_cast<size_t>(c) * H * W; }
    const Real* ch(int c) const {
        return v.data() + static_cast<size_t>(c) * H * W;
    }
};

// Zero-padded copy with margins df*(k-1)/2 rows and dt*(k-1)/2 cols per side,
// so conv taps never leave the buffer.
template <typename Real>
struct Padded {
    int C = 0, H = 0, W = 0, Hp = 0, Wp = 0;
    std::vector<Real> v;

    Real* ch(int c) { return v.data() + static_cast<size_t>(c) * Hp * Wp; }
    const Real* ch(int c) const {
        return v.data() + static_cast<size_t>(c) * Hp * Wp;
    }
};

template <typename Real>
void build_padded(const Planes<Real>& in, int k, int df, int dt,
                  Padded<Real>& out) {
    const int mh = df * (k - 1) / 2;
    const int mw = dt * (k - 1) / 2;
    out.C = in.C;
    out.H = in.H;
    out.W = in.W;
    out.Hp = in.H + 2 * mh;
    out.Wp = in.W + 2 * mw;
    out.v.assign(static_cast<size_t>(out.C) * out.Hp * out.Wp, Real(0));
    for (int c = 0; c < in.C; ++c) {
        const Real* src = in.ch(c);
        Real* dst = out.ch(c) + static_cast<size_t>(mh) * out.Wp + mw;
        for (int x = 0; x < in.H; ++x) {
            for (int y = 0; y < in.W; ++y) dst[y] = src[y];
            src += in.W;
            dst += out.Wp;
        }
    }
}

// out[co][x][y] = b[co] + sum_{ci,i,j} pin[ci][x+df*i][y+dt*j] * w[co][ci][i][j]
// which is the correlation with padding (df*(k-1)/2, dt*(k-1)/2).
template <typename Real>
void conv_fwd_ref(const Padded<Real>& pin, const Real* w, const Real* b,
                  int Co, int k, int df, int dt, Planes<Real>& out) {
    const int Ci = pin.C, H = pin.H, W = pin.W, Wp = pin.Wp;
    out.resize(Co, H, W);
    for (int co = 0; co < Co; ++co) {
        Real* oc = out.ch(co);
        for (size_t n = 0; n < static_cast<size_t>(H) * W; ++n) oc[n] = b[co];
        for (int ci = 0; ci < Ci; ++ci) {
            const Real* pc = pin.ch(ci);
            const Real* wc =
                w + (static_cast<size_t>(co) * Ci + ci) * k * k;
            for (int x = 0; x < H; ++x) {
                Real* orow = oc + static_cast<size_t>(x) * W;
                for (int i = 0; i < k; ++i) {
                    const Real* prow =
                        pc + static_cast<size_t>(x + df * i) * Wp;
                    for (int j = 0; j < k; ++j) {
                        const Real wv = wc[i * k + j];
                        const Real* shifted = prow + dt * j;
                        for (int y = 0; y < W; ++y) orow[y] += wv * shifted[y];
                    }
                }
            }
        }
    }
}

#ifdef EGOFILTER_HAVE_AVX2

// 4-output-channel x 16-column micro-kernel for k=5. Tail columns rerun the
// kernel overlapped (stores are idempotent); tail channels use a 1-channel
// variant.
inline void conv5_f32_rows(const float* pin, int Ci, size_t plane_stride,
                           int Wp, const float* w, const float* b, int Co,
                           int df, int dt, float* out, int H, int W) {
    const int co4 = Co - (Co % 4);
    for (int co = 0; co < co4; co += 4) {
        for (int x = 0; x < H; ++x) {
            float* orow = out + (static_cast<size_t>(co) * H + x) * W;
            int y = 0;
            while (y < W) {
                if (y + 16 > W) {
                    if (W >= 16) {
                        y = W - 16;
                    } else {
                        break;
                    }
                }
                __m256 a00 = _mm256_set1_ps(b[co + 0]);
                __m256 a01 = a00;
                __m256 a10 = _mm256_set1_ps(b[co + 1]);
                __m256 a11 = a10;
                __m256 a20 = _mm256_set1_ps(b[co + 2]);
                __m256 a21 = a20;
                __m256 a30 = _mm256_set1_ps(b[co + 3]);
                __m256 a31 = a30;
                for (int ci = 0; ci < Ci; ++ci) {
                    const float* p =
                        pin + ci * plane_stride + static_cast<size_t>(x) * Wp + y;
                    const float* w0 = w + (static_cast<size_t>(co + 0) * Ci + ci) * 25;
                    const float* w1 = w + (static_cast<size_t>(co + 1) * Ci + ci) * 25;
                    const float* w2 = w + (static_cast<size_t>(co + 2) * Ci + ci) * 25;
                    const float* w3 = w + (static_cast<size_t>(co + 3) * Ci + ci) * 25;
                    for (int i = 0; i < 5; ++i) {
                        const float* r = p + static_cast<size_t>(i) * df * Wp;
                        for (int j = 0; j < 5; ++j) {
                            const __m256 v0 = _mm256_loadu_ps(r + j * dt);
                            const __m256 v1 = _mm256_loadu_ps(r + j * dt + 8);
                            const int wi = i * 5 + j;
                            __m256 wv = _mm256_broadcast_ss(w0 + wi);
                            a00 = _mm256_fmadd_ps(wv, v0, a00);
                            a01 = _mm256_fmadd_ps(wv, v1, a01);
                            wv = _mm256_broadcast_ss(w1 + wi);
                            a10 = _mm256_fmadd_ps(wv, v0, a10);
                            a11 = _mm256_fmadd_ps(wv, v1, a11);
                            wv = _mm256_broadcast_ss(w2 + wi);
                            a20 = _mm256_fmadd_ps(wv, v0, a20);
                            a21 = _mm256_fmadd_ps(wv, v1, a21);
                            wv = _mm256_broadcast_ss(w3 + wi);
                            a30 = _mm256_fmadd_ps(wv, v0, a30);
                            a31 = _mm256_fmadd_ps(wv, v1, a31);
                        }
                    }
                }
                const size_t hw = static_cast<size_t>(H) * W;
                _mm256_storeu_ps(orow + y, a00);
                _mm256_storeu_ps(orow + y + 8, a01);
                _mm256_storeu_ps(orow + hw + y, a10);
                _mm256_storeu_ps(orow + hw + y + 8, a11);
                _mm256_storeu_ps(orow + 2 * hw + y, a20);
                _mm256_storeu_ps(orow + 2 * hw + y + 8, a21);
                _mm256_storeu_ps(orow + 3 * hw + y, a30);
                _mm256_storeu_ps(orow + 3 * hw + y + 8, a31);
                y += 16;
            }
        }
    }
    for (int co = co4; co < Co; ++co) {
        for (int x = 0; x < H; ++x) {
            float* orow = out + (static_cast<size_t>(co) * H + x) * W;
            int y = 0;
            while (y < W) {
                if (y + 16 > W) {
                    if (W >= 16) {
                        y = W - 16;
                    } else {
                        break;
                    }
                }
                __m256 a0 = _mm256_set1_ps(b[co]);
                __m256 a1 = a0;
                for (int ci = 0; ci < Ci; ++ci) {
                    const float* p =
                        pin + ci * plane_stride + static_cast<size_t>(x) * Wp + y;
                    const float* wc = w + (static_cast<size_t>(co) * Ci + ci) * 25;
                    for (int i = 0; i < 5; ++i) {
                        const float* r = p + static_cast<size_t>(i) * df * Wp;
                        for (int j = 0; j < 5; ++j) {
                            const __m256 wv = _mm256_broadcast_ss(wc + i * 5 + j);
                            a0 = _mm256_fmadd_ps(wv, _mm256_loadu_ps(r + j * dt), a0);
                            a1 = _mm256_fmadd_ps(wv, _mm256_loadu_ps(r + j * dt + 8), a1);
                        }
                    }
                }
                _mm256_storeu_ps(orow + y, a0);
                _mm256_storeu_ps(orow + y + 8, a1);
                y += 16;
            }
        }
    }
}

#endif  // EGOFILTER_HAVE_AVX2

template <typename Real>
void conv_fwd(const Padded<Real>& pin, const Real* w, const Real* b, int Co,
              int k, int df, int dt, Planes<Real>& out) {
#ifdef EGOFILTER_HAVE_AVX2
    if constexpr (std::is_same_v<Real, float>) {
        if (k == 5 && pin.W >= 16) {
            out.resize(Co, pin.H, pin.W);
            conv5_f32_rows(pin.v.data(), pin.C,
                           static_cast<size_t>(pin.Hp) * pin.Wp, pin.Wp, w, b,
                           Co, df, dt, out.v.data(), pin.H, pin.W);
            return;
        }
    }
#endif
    conv_fwd_ref(pin, w, b, Co, k, df, dt, out);
}

// gw[co][ci][i][j] += sum_{x,y} g[co][x][y] * pin[ci][x+df*i][y+dt*j];
// gb[co] += sum_{x,y} g[co][x][y].
template <typename Real>
void conv_wgrad_ref(const Padded<Real>& pin, const Planes<Real>& g, int k,
                    int df, int dt, Real* gw, Real* gb) {
    const int Ci = pin.C, Co = g.C, H = g.H, W = g.W, Wp = pin.Wp;
    for (int co = 0; co < Co; ++co) {
        const Real* gc = g.ch(co);
        Real bs = 0;
        for (size_t n = 0; n < static_cast<size_t>(H) * W; ++n) bs += gc[n];
        gb[co] += bs;
        for (int ci = 0; ci < Ci; ++ci) {
            const Real* pc = pin.ch(ci);
            Real* wc = gw + (static_cast<size_t>(co) * Ci + ci) * k * k;
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    Real acc = 0;
                    for (int x = 0; x < H; ++x) {
                        const Real* grow = gc + static_cast<size_t>(x) * W;
                        const Real* prow =
                            pc + static_cast<size_t>(x + df * i) * Wp + dt * j;
                        for (int y = 0; y < W; ++y) acc += grow[y] * prow[y];
                    }
                    wc[i * k + j] += acc;
                }
            }
        }
    }
}

#ifdef EGOFILTER_HAVE_AVX2

inline float hsum256(__m256 a) {
    __m128 lo = _mm256_castps256_ps128(a);
    __m128 hi = _mm256_extractf128_ps(a, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    return _mm_cvtss_f32(lo);
}

inline void conv5_f32_wgrad(const Padded<float>& pin, const Planes<float>& g,
                            int df, int dt, float* gw, float* gb) {
    const int Ci = pin.C, Co = g.C, H = g.H, W = g.W, Wp = pin.Wp;
    const int w8 = W - (W % 8);
    for (int co = 0; co < Co; ++co) {
        const float* gc = g.ch(co);
        float bs = 0;
        for (size_t n = 0; n < static_cast<size_t>(H) * W; ++n) bs += gc[n];
        gb[co] += bs;
        for (int ci = 0; ci < Ci; ++ci) {
            const float* pc = pin.ch(ci);
            float* wc = gw + (static_cast<size_t>(co) * Ci + ci) * 25;
            for (int i = 0; i < 5; ++i) {
                __m256 acc[5];
                for (auto& a : acc) a = _mm256_setzero_ps();
                float tail[5] = {0, 0, 0, 0, 0};
                for (int x = 0; x < H; ++x) {
                    const float* grow = gc + static_cast<size_t>(x) * W;
                    const float* prow =
                        pc + static_cast<size_t>(x + df * i) * Wp;
                    int y = 0;
                    for (; y < w8; y += 8) {
                        const __m256 gv = _mm256_loadu_ps(grow + y);
                        acc[0] = _mm256_fmadd_ps(gv, _mm256_loadu_ps(prow + y), acc[0]);
                        acc[1] = _mm256_fmadd_ps(gv, _mm256_loadu_ps(prow + y + dt), acc[1]);
                        acc[2] = _mm256_fmadd_ps(gv, _mm256_loadu_ps(prow + y + 2 * dt), acc[2]);
                        acc[3] = _mm256_fmadd_ps(gv, _mm256_loadu_ps(prow + y + 3 * dt), acc[3]);
                        acc[4] = _mm256_fmadd_ps(gv, _mm256_loadu_ps(prow + y + 4 * dt), acc[4]);
                    }
                    for (; y < W; ++y) {
                        const float gv = grow[y];
                        for (int j = 0; j < 5; ++j) tail[j] += gv * prow[y + j * dt];
                    }
                }
                for (int j = 0; j < 5; ++j) wc[i * 5 + j] += hsum256(acc[j]) + tail[j];
            }
        }
    }
}

#endif  // EGOFILTER_HAVE_AVX2

template <typename Real>
void conv_wgrad(const Padded<Real>& pin, const Planes<Real>& g, int k, int df,
                int dt, Real* gw, Real* gb) {
#ifdef EGOFILTER_HAVE_AVX2
    if constexpr (std::is_same_v<Real, float>) {
        if (k == 5) {
            conv5_f32_wgrad(pin, g, df, dt, gw, gb);
            return;
        }
    }
#endif
    conv_wgrad_ref(pin, g, k, df, dt, gw, gb);
}

// wt[ci][co][i][j] = w[co][ci][k-1-i][k-1-j]; correlating the padded output
// gradient with wt yields the input gradient of conv_fwd.
template <typename Real>
void flip_transpose_weights(const Real* w, int Co, int Ci, int k,
                            std::vector<Real>& wt) {
    wt.assign(static_cast<size_t>(Co) * Ci * k * k, Real(0));
    for (int co = 0; co < Co; ++co) {
        for (int ci = 0; ci < Ci; ++ci) {
            const Real* src = w + (static_cast<size_t>(co) * Ci + ci) * k * k;
            Real* dst = wt.data() + (static_cast<size_t>(ci) * Co + co) * k * k;
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    dst[i * k + j] = src[(k - 1 - i) * k + (k - 1 - j)];
                }
            }
        }
    }
}

template <typename Real>
void conv_ingrad(const Planes<Real>& g, const Real* w, int Ci, int k, int df,
                 int dt, Planes<Real>& gin, Padded<Real>& scratch,
                 std::vector<Real>& wt_scratch) {
    flip_transpose_weights(w, g.C, Ci, k, wt_scratch);
    build_padded(g, k, df, dt, scratch);
    const std::vector<Real> zero_bias(Ci, Real(0));
    conv_fwd(scratch, wt_scratch.data(), zero_bias.data(), Ci, k, df, dt, gin);
}

template <typename Real>
void relu_inplace(Planes<Real>& p) {
    for (auto& x : p.v) x = x > Real(0) ? x : Real(0);
}

// g *= (act > 0), the ReLU subgradient with 0 at the kink.
template <typename Real>
void relu_bwd_inplace(const Planes<Real>& act, Planes<Real>& g) {
    for (size_t n = 0; n < g.v.size(); ++n) {
        if (!(act.v[n] > Real(0))) g.v[n] = Real(0);
    }
}

template <typename Real>
void transpose_hw(const Planes<Real>& in, Planes<Real>& out) {
    out.resize(in.C, in.W, in.H);
    constexpr int B = 32;
    for (int c = 0; c < in.C; ++c) {
        const Real* src = in.ch(c);
        Real* dst = out.ch(c);
        for (int x0 = 0; x0 < in.H; x0 += B) {
            for (int y0 = 0; y0 < in.W; y0 += B) {
                const int x1 = std::min(x0 + B, in.H);
                const int y1 = std::min(y0 + B, in.W);
                for (int x = x0; x < x1; ++x) {
                    for (int y = y0; y < y1; ++y) {
                        dst[static_cast<size_t>(y) * in.H + x] =
                            src[static_cast<size_t>(x) * in.W + y];
                    }
                }
            }
        }
    }
}

template <typename Real>
void add_inplace(Planes<Real>& a, const Planes<Real>& b) {
    for (size_t n = 0; n < a.v.size(); ++n) a.v[n] += b.v[n];
}

// Weights in engine layout. dec_w is kept in correlation form (the public
// transposed-conv tensor flipped on both kernel axes and re-indexed co-major).
template <typename Real>
struct NetWeights {
    int C = 0, k = 5;
    std::vector<int> dils;
    bool share = true;
    double p = 0.3, ms = 1.0;
    std::vector<Real> enc_w, enc_b, dil_w0, dil_b0, dil_w1, dil_b1, skip_w,
        skip_b, dec_w, dec_b;
};

template <typename Real>
std::vector<Real> to_real(const std::vector<float>& src) {
    return std::vector<Real>(src.begin(), src.end());
}

template <typename Real>
NetWeights<Real> make_net(const EgoNetWeights& w) {
    NetWeights<Real> net;
    net.C = w.config.channels;
    net.k = w.config.kernel;
    net.dils = w.config.dilations;
    net.share = w.config.convs_share_weights_across_blocks;
    net.p = w.config.compression_exponent;
    net.ms = w.config.magnitude_scale;
    net.enc_w = to_real<Real>(w.find("enc_w").data);
    net.enc_b = to_real<Real>(w.find("enc_b").data);
    net.dil_w0 = to_real<Real>(w.find("dil0_w").data);
    net.dil_b0 = to_real<Real>(w.find("dil0_b").data);
    if (net.share) {
        net.dil_w1 = net.dil_w0;
        net.dil_b1 = net.dil_b0;
    } else {
        net.dil_w1 = to_real<Real>(w.find("dil1_w").data);
        net.dil_b1 = to_real<Real>(w.find("dil1_b").data);
    }
    net.skip_w = to_real<Real>(w.find("skip_w").data);
    net.skip_b = to_real<Real>(w.find("skip_b").data);
    net.dec_b = to_real<Real>(w.find("dec_b").data);
    // Public dec_w is [C][1][k][k]; correlation form flips both kernel axes.
    const int k = net.k;
    const std::vector<Real> dec = to_real<Real>(w.find("dec_w").data);
    net.dec_w.assign(dec.size(), Real(0));
    for (int ci = 0; ci < net.C; ++ci) {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                net.dec_w[(static_cast<size_t>(ci) * k + i) * k + j] =
                    dec[(static_cast<size_t>(ci) * k + (k - 1 - i)) * k +
                        (k - 1 - j)];
            }
        }
    }
    return net;
}

// Forward activations retained for backward.
template <typename Real>
struct NetTrace {
    Planes<Real> in, enc, skip, z, y;
    std::vector<Planes<Real>> a0, a1;  // per-dilation outputs of each block
    Planes<Real> t0, t1;               // post-block transposes
};

template <typename Real>
void net_forward(const NetWeights<Real>& net, const Mat& r_mag,
                 NetTrace<Real>& tr) {
    const int F = r_mag.rows, T = r_mag.cols;
    const int k = net.k, C = net.C;
    const double inv_ms = 1.0 / net.ms;

    tr.in.resize(1, F, T);
    for (size_t n = 0; n < r_mag.v.size(); ++n) {
        tr.in.v[n] = static_cast<Real>(std::pow(r_mag.v[n], net.p) * inv_ms);
    }

    Padded<Real> pad;
    build_padded(tr.in, k, 1, 1, pad);
    conv_fwd(pad, net.enc_w.data(), net.enc_b.data(), C, k, 1, 1, tr.enc);
    relu_inplace(tr.enc);

    build_padded(tr.enc, 1, 1, 1, pad);
    conv_fwd(pad, net.skip_w.data(), net.skip_b.data(), C, 1, 1, 1, tr.skip);
    relu_inplace(tr.skip);

    const size_t nd = net.dils.size();
    tr.a0.resize(nd);
    tr.a1.resize(nd);
    const Planes<Real>* cur = &tr.enc;
    for (size_t s = 0; s < nd; ++s) {
        const int d = net.dils[s];
        build_padded(*cur, k, 1, d, pad);
        conv_fwd(pad, net.dil_w0.data(), net.dil_b0.data(), C, k, 1, d, tr.a0[s]);
        relu_inplace(tr.a0[s]);
        cur = &tr.a0[s];
    }
    transpose_hw(*cur, tr.t0);
    cur = &tr.t0;
    for (size_t s = 0; s < nd; ++s) {
        const int d = net.dils[s];
        build_padded(*cur, k, 1, d, pad);
        conv_fwd(pad, net.dil_w1.data(), net.dil_b1.data(), C, k, 1, d, tr.a1[s]);
        relu_inplace(tr.a1[s]);
        cur = &tr.a1[s];
    }
    transpose_hw(*cur, tr.t1);

    tr.z = tr.t1;
    add_inplace(tr.z, tr.skip);

    build_padded(tr.z, k, 1, 1, pad);
    conv_fwd(pad, net.dec_w.data(), net.dec_b.data(), 1, k, 1, 1, tr.y);
    for (auto& x : tr.y.v) {
        x = Real(1) / (Real(1) + std::exp(-x));
    }
}

// Uncompressed output magnitude: (y * ms)^(1/p).
template <typename Real>
Mat net_output(const NetWeights<Real>& net, const NetTrace<Real>& tr) {
    Mat out(tr.y.H, tr.y.W);
    const double inv_p = 1.0 / net.p;
    for (size_t n = 0; n < out.v.size(); ++n) {
        out.v[n] = std::pow(static_cast<double>(tr.y.v[n]) * net.ms, inv_p);
    }
    return out;
}

template <typename Real>
struct NetGrads {
    std::vector<Real> enc_w, enc_b, dil_w0, dil_b0, dil_w1, dil_b1, skip_w,
        skip_b, dec_w, dec_b;  // dec_w in correlation form

    void resize_like(const NetWeights<Real>& net) {
        enc_w.assign(net.enc_w.size(), Real(0));
        enc_b.assign(net.enc_b.size(), Real(0));
        dil_w0.assign(net.dil_w0.size(), Real(0));
        dil_b0.assign(net.dil_b0.size(), Real(0));
        dil_w1.assign(net.dil_w1.size(), Real(0));
        dil_b1.assign(net.dil_b1.size(), Real(0));
        skip_w.assign(net.skip_w.size(), Real(0));
        skip_b.assign(net.skip_b.size(), Real(0));
        dec_w.assign(net.dec_w.size(), Real(0));
        dec_b.assign(net.dec_b.size(), Real(0));
    }
};

// Backprop of power_law_loss(forward(...), target) using the identity
// forward(...)^p = y * ms, so the loss reads mean((y*ms - target^p)^2).
// Adds into grads; returns the loss.
template <typename Real>
double net_backward(const NetWeights<Real>& net, const NetTrace<Real>& tr,
                    const Mat& target_mag, NetGrads<Real>& grads) {
    const int F = tr.y.H, T = tr.y.W;
    const int k = net.k, C = net.C;
    const size_t N = static_cast<size_t>(F) * T;

    Planes<Real> g;
    g.resize(1, F, T);
    double loss = 0.0;
    const double scale = 2.0 * net.ms / static_cast<double>(N);
    for (size_t n = 0; n < N; ++n) {
        const double tp = std::pow(target_mag.v[n], net.p);
        const double r = static_cast<double>(tr.y.v[n]) * net.ms - tp;
        loss += r * r;
        const double y = tr.y.v[n];
        g.v[n] = static_cast<Real>(scale * r * y * (1.0 - y));
    }
    loss /= static_cast<double>(N);

    Padded<Real> pad;
    std::vector<Real> wt;

    // Decoder.
    build_padded(tr.z, k, 1, 1, pad);
    conv_wgrad(pad, g, k, 1, 1, grads.dec_w.data(), grads.dec_b.data());
    Planes<Real> gz;
    conv_ingrad(g, net.dec_w.data(), C, k, 1, 1, gz, pad, wt);

    // Skip branch: gz feeds both the skip output and the dilation path.
    Planes<Real> gk = gz;
    relu_bwd_inplace(tr.skip, gk);
    build_padded(tr.enc, 1, 1, 1, pad);
    conv_wgrad(pad, gk, 1, 1, 1, grads.skip_w.data(), grads.skip_b.data());
    Planes<Real> g_enc;
    conv_ingrad(gk, net.skip_w.data(), C, 1, 1, 1, g_enc, pad, wt);

    // Dilation path, block 1 then block 0, reversing the transposes.
    const size_t nd = net.dils.size();
    Planes<Real> gcur;
    transpose_hw(gz, gcur);
    for (size_t s = nd; s-- > 0;) {
        const int d = net.dils[s];
        relu_bwd_inplace(tr.a1[s], gcur);
        const Planes<Real>& input = s > 0 ? tr.a1[s - 1] : tr.t0;
        build_padded(input, k, 1, d, pad);
        conv_wgrad(pad, gcur, k, 1, d, grads.dil_w1.data(), grads.dil_b1.data());
        Planes<Real> gin;
        conv_ingrad(gcur, net.dil_w1.data(), C, k, 1, d, gin, pad, wt);
        gcur = std::move(gin);
    }
    Planes<Real> gtmp;
    transpose_hw(gcur, gtmp);
    gcur = std::move(gtmp);
    for (size_t s = nd; s-- > 0;) {
        const int d = net.dils[s];
        relu_bwd_inplace(tr.a0[s], gcur);
        const Planes<Real>& input = s > 0 ? tr.a0[s - 1] : tr.enc;
        build_padded(input, k, 1, d, pad);
        conv_wgrad(pad, gcur, k, 1, d, grads.dil_w0.data(), grads.dil_b0.data());
        Planes<Real> gin;
        conv_ingrad(gcur, net.dil_w0.data(), C, k, 1, d, gin, pad, wt);
        gcur = std::move(gin);
    }
    add_inplace(g_enc, gcur);

    // Encoder.
    relu_bwd_inplace(tr.enc, g_enc);
    build_padded(tr.in, k, 1, 1, pad);
    conv_wgrad(pad, g_enc, k, 1, 1, grads.enc_w.data(), grads.enc_b.data());
    return loss;
}

}  // namespace egofilter::engine

#endif
