#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stokolmo {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A pure function of (counter, key): no state, so any stream position can be
/// produced independently of execution order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Standard normal variates indexed by (seed, stream, index). Two variates are
/// produced per Philox block via Box-Muller; the last block is cached so
/// sequential access costs one block per two draws.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    double operator()(std::uint64_t index) noexcept {
        const std::uint64_t block = index >> 1;
        if (block != cached_block_) {
            fill(block);
            cached_block_ = block;
        }
        return cache_[index & 1u];
    }

private:
    void fill(std::uint64_t block) noexcept {
        const auto r = Philox4x32::generate(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), stream_lo_, stream_hi_}, key_);
        constexpr double two_m53 = 1.0 / 9007199254740992.0;
        const std::uint64_t a = (std::uint64_t{r[0]} << 21) ^ (r[1] >> 11);
        const std::uint64_t b = (std::uint64_t{r[2]} << 21) ^ (r[3] >> 11);
        const double u1 = 1.0 - static_cast<double>(a) * two_m53;  // (0, 1]
        const double u2 = static_cast<double>(b) * two_m53;        // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cache_[0] = radius * std::cos(angle);
        cache_[1] = radius * std::sin(angle);
    }

    Philox4x32::Key key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    double cache_[2] = {0.0, 0.0};
};

}  // namespace stokolmo
