#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spdeito {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (key, counter); there is no state to advance,
/// so any draw can be reproduced independently of evaluation order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Standard normal draws addressed by (seed, stream, mode, step).
///
/// One Philox block yields two normals via Box-Muller; modes 2j and 2j+1 of the
/// same step share a block.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    /// The pair of normals for modes (2 pair, 2 pair + 1) at `step`.
    std::array<double, 2> pair(std::uint32_t pair_index, std::uint32_t step) const {
        const auto out =
            Philox4x32::generate({step, pair_index, stream_lo_, stream_hi_}, key_);
        const double u1 = to_open_unit(out[0], out[1]);
        const double u2 = to_open_unit(out[2], out[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    /// Normal for zero-based `mode` at `step`.
    double normal(std::uint32_t mode, std::uint32_t step) const {
        return pair(mode / 2, step)[mode % 2];
    }

private:
    // 53-bit uniform in (0, 1].
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    Philox4x32::Key key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

}  // namespace spdeito
