#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace exitlab::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 counter-based generator with 10 rounds.
inline Counter philox4x32_10(Counter ctr, Key key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// Uniform on the open interval (0, 1) from 52 random bits; the largest
/// value is 1 - 2^-53.
inline double uniform52(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) | (lo >> 12);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Uniform on (0, 1) from 32 random bits.
inline double uniform32(std::uint32_t w) { return (static_cast<double>(w) + 0.5) * 0x1.0p-32; }

/// Draws of one replica: the key is the run seed, the counter carries the
/// replica index and a per-replica draw index. Streams of distinct
/// replicas never overlap.
class ReplicaStream {
public:
    ReplicaStream(std::uint64_t seed, std::uint64_t replica)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          replica_lo_(static_cast<std::uint32_t>(replica)),
          replica_hi_(static_cast<std::uint32_t>(replica >> 32)) {}

    Counter next() {
        const Counter ctr{static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32),
                          replica_lo_, replica_hi_};
        ++draw_;
        return philox4x32_10(ctr, key_);
    }

    std::uint64_t draws() const { return draw_; }

private:
    Key key_;
    std::uint32_t replica_lo_;
    std::uint32_t replica_hi_;
    std::uint64_t draw_ = 0;
};

/// Standard normal by the ziggurat method with 128 layers. The layer
/// index and the value come from independent bits. Rejections draw
/// further blocks from `stream`.
double ziggurat_normal(std::uint32_t value_bits, std::uint32_t layer, ReplicaStream& stream);

struct GaussianStep {
    double z1;
    double z2;
    double uniform;  // spare U(0,1) for accept/reject decisions
};

/// Two independent standard normals plus one uniform; consumes one block
/// from `stream` except on (rare) ziggurat rejections.
inline GaussianStep gaussian_step(ReplicaStream& stream) {
    const Counter block = stream.next();
    const double z1 = ziggurat_normal(block[0], block[3] & 0x7Fu, stream);
    const double z2 = ziggurat_normal(block[1], (block[3] >> 7) & 0x7Fu, stream);
    return {z1, z2, uniform32(block[2])};
}

}  // namespace exitlab::rng
