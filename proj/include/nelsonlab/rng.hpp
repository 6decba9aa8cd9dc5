#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace nelsonlab {

/// Philox-4x32-10 counter-based generator. A draw is addressed by
/// (seed, stream, step, block); identical addresses give identical bits on
/// every platform and for every scheduling of the walkers, which is what the
/// reproducibility contract needs.
class Philox {
public:
    using Counter = std::array<std::uint32_t, 4>;

    static Counter block(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t step, std::uint32_t blk) {
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                               static_cast<std::uint32_t>(seed >> 32)};
        Counter ctr{static_cast<std::uint32_t>(step),
                    static_cast<std::uint32_t>(step >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32) ^ blk};
        return rounds(ctr, key);
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    static Counter rounds(Counter ctr, std::array<std::uint32_t, 2> key) {
        for (int r = 0; r < 10; ++r) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(kM0, ctr[0], hi0, lo0);
            mulhilo(kM1, ctr[2], hi1, lo1);
            ctr = Counter{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }
};

/// Uniform double in (0,1]: never 0, so log() below is safe.
inline double u32_to_unit_double(std::uint32_t x) {
    return (static_cast<double>(x) + 1.0) * (1.0 / 4294967296.0);
}

/// Four uniforms -> two standard normals (Box-Muller).
inline std::array<double, 2> normals_from_block(const Philox::Counter& c) {
    const double u1 = u32_to_unit_double(c[0]);
    const double u2 = u32_to_unit_double(c[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

/// Addressable stream of standard normals / uniforms for one (seed, purpose)
/// pair. `stream` is typically a walker id, `step` a time-step index.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t purpose = 0)
        : seed_(seed ^ (purpose * 0x9E3779B97F4A7C15ull)) {}

    /// k-th standard normal for (stream, step); any k >= 0.
    double normal(std::uint64_t stream, std::uint64_t step, std::uint32_t k) const {
        const auto blk = Philox::block(seed_, stream, step, k / 2);
        const auto z = normals_from_block(blk);
        return z[k % 2];
    }

    /// k-th uniform in (0,1] for (stream, step).
    double uniform(std::uint64_t stream, std::uint64_t step, std::uint32_t k) const {
        const auto blk = Philox::block(seed_, stream, step, 0x80000000u ^ (k / 4));
        return u32_to_unit_double(blk[k % 4]);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace nelsonlab
