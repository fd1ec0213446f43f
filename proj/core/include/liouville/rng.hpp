#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace liouville {

/// splitmix64 finalizer; good avalanche, used for key derivation only.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and two counters
/// (typically replica index and layer index or purpose tag). Streams are
/// decorrelated by construction; the same triple always yields the same
/// stream.
constexpr std::uint64_t derive_stream(std::uint64_t master, std::uint64_t a,
                                      std::uint64_t b) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ (a * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (b * 0xa0761d6478bd642fULL));
    return h;
}

/// Purpose tags keep unrelated consumers of the same (master, replica) pair
/// on disjoint streams.
enum class StreamPurpose : std::uint64_t {
    field_layer_base = 0,  // + layer index
    path = 1u << 24,
    sde_driver = 1u << 25,
    scratch = 1u << 26,
};

/// Gaussian stream with a fully specified bit-level sequence: mt19937_64
/// uniforms plus the Marsaglia polar transform. Avoids
/// std::normal_distribution, whose algorithm is implementation defined.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in [0, 1).
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        have_spare_ = true;
        return u * scale;
    }

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace liouville
