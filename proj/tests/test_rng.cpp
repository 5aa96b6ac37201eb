#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rng = exitlab::rng;

TEST_CASE("philox4x32-10 reproduces the published known-answer vectors") {
    CHECK(rng::philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u}) ==
          rng::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(rng::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          rng::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(rng::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          rng::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform conversions stay inside the open unit interval") {
    CHECK(rng::uniform32(0u) > 0.0);
    CHECK(rng::uniform32(0xffffffffu) < 1.0);
    CHECK(rng::uniform52(0u, 0u) > 0.0);
    CHECK(rng::uniform52(0xffffffffu, 0xffffffffu) < 1.0);
}

TEST_CASE("replica streams are reproducible and distinct") {
    rng::ReplicaStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
        CHECK(x != d.next());
    }
    CHECK(a.draws() == 100);
}

TEST_CASE("ziggurat normals have standard moments") {
    const int n = 500000;
    rng::ReplicaStream s(2024, 0);
    std::vector<double> z;
    z.reserve(2 * n);
    double cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto g = rng::gaussian_step(s);
        z.push_back(g.z1);
        z.push_back(g.z2);
        cross += g.z1 * g.z2;
    }
    const double m = static_cast<double>(z.size());
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0, tail = 0.0;
    for (double v : z) {
        m1 += v;
        m2 += v * v;
        m3 += v * v * v;
        m4 += v * v * v * v;
        tail += std::abs(v) > 3.442619855899;
    }
    m1 /= m, m2 /= m, m3 /= m, m4 /= m, tail /= m;
    // Each bound is at least 4 standard errors of the estimator.
    CHECK(std::abs(m1) < 4.0 / std::sqrt(m));
    CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / m));
    CHECK(std::abs(m3) < 4.0 * std::sqrt(15.0 / m));
    CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / m));
    CHECK(std::abs(cross / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    const double p_tail = std::erfc(3.442619855899 / std::sqrt(2.0));
    CHECK(std::abs(tail - p_tail) < 4.0 * std::sqrt(p_tail / m));
}

TEST_CASE("ziggurat normals pass a Kolmogorov-Smirnov test") {
    const int n = 200000;
    rng::ReplicaStream s(99, 3);
    std::vector<double> z;
    for (int i = 0; i < n / 2; ++i) {
        const auto g = rng::gaussian_step(s);
        z.push_back(g.z1);
        z.push_back(g.z2);
    }
    std::sort(z.begin(), z.end());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    // 1% critical value.
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("spare uniforms are uniform") {
    const int n = 200000, bins = 20;
    rng::ReplicaStream s(5, 5);
    std::vector<int> count(bins, 0);
    for (int i = 0; i < n; ++i) ++count[static_cast<int>(rng::gaussian_step(s).uniform * bins)];
    double chi2 = 0.0;
    const double e = static_cast<double>(n) / bins;
    for (int c : count) chi2 += (c - e) * (c - e) / e;
    // 99.9% quantile of chi-square with 19 degrees of freedom.
    CHECK(chi2 < 43.82);
}
