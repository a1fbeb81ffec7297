#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "snsqkd/rng.hpp"

using namespace snsqkd;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 distribution (kat_vectors).
    {
        const auto out = Philox4x32::block(0, 0, 0);
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const auto out = Philox4x32::block(0xffffffffffffffffull, 0xffffffffffffffffull,
                                           0xffffffffffffffffull);
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        // counter = (243f6a88, 85a308d3, 13198a2e, 03707344), key = (a4093822, 299f31d0)
        const std::uint64_t block_index = (0x85a308d3ull << 32) | 0x243f6a88ull;
        const std::uint64_t stream = (0x03707344ull << 32) | 0x13198a2eull;
        const std::uint64_t seed = (0x299f31d0ull << 32) | 0xa4093822ull;
        const auto out = Philox4x32::block(seed, stream, block_index);
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("streams are reproducible and independent of consumption order") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

    // Different streams differ.
    RngStream c(42, 8);
    int same = 0;
    RngStream a2(42, 7);
    for (int i = 0; i < 100; ++i) {
        if (a2.uniform() == c.uniform()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("uniforms live in [0,1) with sane moments") {
    RngStream r(123, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("gaussian moments") {
    RngStream r(99, 3);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = r.gaussian();
        sum += g;
        sum2 += g * g;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("window draw layout is stable under mode flags") {
    // The first two blocks never move, so compensation-mode draws are a
    // prefix of post-selection draws for the same window.
    const auto base = WindowDraws::at(5, 0, 1234, false, false);
    const auto ps = WindowDraws::at(5, 0, 1234, true, true);
    CHECK(base.alice_send == ps.alice_send);
    CHECK(base.bob_send == ps.bob_send);
    CHECK(base.outcome == ps.outcome);
    CHECK(base.subset == ps.subset);
    CHECK(ps.gamma_a != 0.0);
    CHECK(ps.jitter_a != 0.0);
}
