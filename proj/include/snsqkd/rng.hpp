#ifndef SNSQKD_RNG_HPP
#define SNSQKD_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace snsqkd {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11).
//
// A block is addressed by a 128-bit counter (c0..c3) and a 64-bit key and
// yields four 32-bit words. We address blocks as (block_index, stream):
//   c0,c1 = block index (lo,hi), c2,c3 = stream id (lo,hi), key = seed.
// Any (seed, stream, block) triple is reproducible in any language from
// the constants below, which is what makes simulation runs portable.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t seed,
                                              std::uint64_t stream,
                                              std::uint64_t block_index) {
        std::uint32_t x0 = static_cast<std::uint32_t>(block_index);
        std::uint32_t x1 = static_cast<std::uint32_t>(block_index >> 32);
        std::uint32_t x2 = static_cast<std::uint32_t>(stream);
        std::uint32_t x3 = static_cast<std::uint32_t>(stream >> 32);
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t y0 = hi1 ^ x1 ^ k0;
            const std::uint32_t y1 = lo1;
            const std::uint32_t y2 = hi0 ^ x3 ^ k1;
            const std::uint32_t y3 = lo0;
            x0 = y0; x1 = y1; x2 = y2; x3 = y3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {x0, x1, x2, x3};
    }
};

// Sequential view over one Philox stream: hands out uniform doubles built
// from 53 bits (two 32-bit words each), so probabilities far below 2^-32
// (e.g. dark counts at 1e-11) are resolvable.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t first_block = 0)
        : seed_(seed), stream_(stream), next_block_(first_block) {}

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform() {
        const std::uint64_t w = next_word64();
        return static_cast<double>(w >> 11) * 0x1.0p-53;
    }

    // Uniform double in [0, 2*pi).
    double uniform_angle() { return uniform() * 6.283185307179586476925286766559; }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t next_word64() {
        if (word_pos_ == 0) {
            buffer_ = Philox4x32::block(seed_, stream_, next_block_++);
        }
        const std::uint32_t lo = buffer_[word_pos_];
        const std::uint32_t hi = buffer_[word_pos_ + 1];
        word_pos_ = (word_pos_ + 2) % 4;
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t next_block_;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned word_pos_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Fixed per-window draw layout for the simulator. Window i owns counter
// blocks [4i, 4i+4); the blocks actually generated depend on the phase
// mode, so results are identical for any sharding of the window range.
struct WindowDraws {
    double alice_send;
    double bob_send;
    double outcome;
    double subset;
    double gamma_a;   // post-selection mode only
    double gamma_b;   // post-selection mode only
    double jitter_a;  // intensity-jitter option only
    double jitter_b;

    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t w = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return static_cast<double>(w >> 11) * 0x1.0p-53;
    }

    static WindowDraws at(std::uint64_t seed, std::uint64_t stream, std::uint64_t window,
                          bool with_phases, bool with_jitter) {
        WindowDraws d{};
        const std::uint64_t base = 4 * window;
        const auto b0 = Philox4x32::block(seed, stream, base);
        const auto b1 = Philox4x32::block(seed, stream, base + 1);
        d.alice_send = to_unit(b0[1], b0[0]);
        d.bob_send = to_unit(b0[3], b0[2]);
        d.outcome = to_unit(b1[1], b1[0]);
        d.subset = to_unit(b1[3], b1[2]);
        if (with_phases) {
            const auto b2 = Philox4x32::block(seed, stream, base + 2);
            d.gamma_a = to_unit(b2[1], b2[0]);
            d.gamma_b = to_unit(b2[3], b2[2]);
        }
        if (with_jitter) {
            const auto b3 = Philox4x32::block(seed, stream, base + 3);
            d.jitter_a = to_unit(b3[1], b3[0]);
            d.jitter_b = to_unit(b3[3], b3[2]);
        }
        return d;
    }
};

}  // namespace snsqkd

#endif  // SNSQKD_RNG_HPP
