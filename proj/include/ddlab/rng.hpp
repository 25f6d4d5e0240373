#pragma once

#include <cmath>
#include <cstdint>

namespace ddlab {

/// Deterministic, splittable random stream.
///
/// The generator is SplitMix64 (Steele/Lea/Flood finalizer over a Weyl
/// sequence). Substreams are derived by hashing (seed, key), so any
/// (seed, index...) pair names the same stream on every platform and in
/// every evaluation order. Gaussian variates use the Box-Muller transform
/// on uniforms in (0, 1]; the second variate of each pair is cached.
/// Integer output is bit-exact everywhere; Gaussians match across
/// platforms up to libm rounding in log/cos/sin.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

    /// Independent stream addressed by (this stream's seed, key).
    RngStream substream(std::uint64_t key) const {
        return RngStream(mix(seed_ + 0x9E3779B97F4A7C15ull * (key + 1)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform in (0, 1]: 53-bit mantissa, never exactly 0.
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stable seed derivation for (base, a, b) work items, e.g. (grid point,
/// replicate). Same hash as RngStream::substream chaining.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return RngStream(base).substream(a).substream(b).seed();
}

} // namespace ddlab
