#ifndef EGOFILTER_RNG_HPP
#define EGOFILTER_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace egofilter {

// Seeded RNG with hand-rolled uniform/normal draws. std::mt19937_64 is
// bit-exact across platforms; the distributions in <random> are not, so we
// derive doubles from the raw stream ourselves.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, cosine branch only so each draw consumes exactly two
    // uniforms regardless of caller pairing.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 gen_;
};

// Deterministic substream for a (seed, purpose) pair, for deriving e.g. the
// impulse-response stream and the fan-noise stream from one mixture seed.
inline Rng substream(uint64_t seed, uint64_t purpose) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (purpose + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
}

}  // namespace egofilter

#endif
