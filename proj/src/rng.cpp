#include "exitlab/rng.hpp"

namespace exitlab::rng {

namespace {

constexpr int kLayers = 128;
constexpr double kTail = 3.442619855899;       // start of the tail layer
constexpr double kVolume = 9.91256303526217e-3;  // area of each layer

struct ZigguratTables {
    double x[kLayers + 1];
    double ratio[kLayers];

    ZigguratTables() {
        double f = std::exp(-0.5 * kTail * kTail);
        x[0] = kVolume / f;
        x[1] = kTail;
        x[kLayers] = 0.0;
        for (int i = 2; i < kLayers; ++i) {
            x[i] = std::sqrt(-2.0 * std::log(kVolume / x[i - 1] + f));
            f = std::exp(-0.5 * x[i] * x[i]);
        }
        for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
    }
};

const ZigguratTables& tables() {
    static const ZigguratTables t;
    return t;
}

double signed_unit(std::uint32_t w) { return 2.0 * uniform32(w) - 1.0; }

double tail_sample(bool negative, ReplicaStream& stream) {
    double x = 0.0;
    double y = 0.0;
    do {
        const Counter b = stream.next();
        x = std::log(uniform52(b[0], b[1])) / kTail;
        y = std::log(uniform52(b[2], b[3]));
    } while (-2.0 * y < x * x);
    return negative ? x - kTail : kTail - x;
}

}  // namespace

double ziggurat_normal(std::uint32_t value_bits, std::uint32_t layer, ReplicaStream& stream) {
    const auto& t = tables();
    double u = signed_unit(value_bits);
    auto i = static_cast<int>(layer & 0x7Fu);
    for (;;) {
        if (std::abs(u) < t.ratio[i]) return u * t.x[i];
        if (i == 0) return tail_sample(u < 0.0, stream);
        const double x = u * t.x[i];
        const double f0 = std::exp(-0.5 * (t.x[i] * t.x[i] - x * x));
        const double f1 = std::exp(-0.5 * (t.x[i + 1] * t.x[i + 1] - x * x));
        const Counter b = stream.next();
        if (f1 + uniform32(b[0]) * (f0 - f1) < 1.0) return x;
        u = signed_unit(b[1]);
        i = static_cast<int>(b[2] & 0x7Fu);
    }
}

}  // namespace exitlab::rng
