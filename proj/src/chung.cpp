#include "exitlab/chung.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace exitlab::chung {

namespace {

constexpr double kPi = std::numbers::pi;

void check_time(double t) {
    if (!(t >= 0.0) || std::isinf(t)) throw std::domain_error("survival: horizon must be finite and >= 0");
}

// Method of images: P(exit by t) = sum_n (-1)^n [erfc((2n+1-x)/sqrt(2t)) + erfc((2n+1+x)/sqrt(2t))].
SeriesValue interval_images(double x, double t, const SeriesParams& params) {
    const double scale = 1.0 / std::sqrt(2.0 * t);
    double exit = 0.0;
    int n = 0;
    for (; n < params.max_terms; ++n) {
        const double odd = 2.0 * n + 1.0;
        const double term = std::erfc((odd - x) * scale) + std::erfc((odd + x) * scale);
        exit += (n % 2 == 0) ? term : -term;
        if (term < params.tolerance) {
            ++n;
            break;
        }
    }
    return {std::clamp(1.0 - exit, 0.0, 1.0), n};
}

}  // namespace

double interval_partial_sum(double x, double t, int terms) {
    double sum = 0.0;
    for (int k = 0; k < terms; ++k) {
        const double half = k + 0.5;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        sum += sign / (2.0 * k + 1.0) * std::cos(kPi * half * x) *
               std::exp(-half * half * kPi * kPi * t / 2.0);
    }
    return 4.0 / kPi * sum;
}

SeriesValue interval_survival(double x, double t, const SeriesParams& params) {
    if (!(std::abs(x) <= 1.0)) throw std::domain_error("interval_survival: |x| must be <= 1");
    check_time(t);
    if (params.max_terms < 1 || !(params.tolerance > 0.0)) {
        throw std::invalid_argument("interval_survival: invalid series parameters");
    }
    if (std::abs(x) == 1.0) return {0.0, 0};
    if (t == 0.0) return {1.0, 0};
    if (t < params.small_time) return interval_images(x, t, params);

    double sum = 0.0;
    int k = 0;
    while (k < params.max_terms) {
        const double half = k + 0.5;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        sum += sign / (2.0 * k + 1.0) * std::cos(kPi * half * x) *
               std::exp(-half * half * kPi * kPi * t / 2.0);
        ++k;
        const double next = k + 0.5;
        if (4.0 / kPi * std::exp(-next * next * kPi * kPi * t / 2.0) < params.tolerance) break;
    }
    return {std::clamp(4.0 / kPi * sum, 0.0, 1.0), k};
}

double interval_leading_term(double x, double t) {
    return 4.0 / kPi * std::cos(kPi * x / 2.0) * std::exp(-kPi * kPi * t / 8.0);
}

double interval_decay_rate() { return kPi * kPi / 8.0; }

double halfline_survival(double x, double t) {
    if (!(x > 0.0)) throw std::domain_error("halfline_survival: start must be > 0");
    check_time(t);
    if (t == 0.0) return 1.0;
    return std::erf(x / std::sqrt(2.0 * t));
}

SeriesValue semistrip_survival(double x1, double x2, double t, const SeriesParams& params) {
    const double along = halfline_survival(x1, t);
    const auto across = interval_survival(x2, t, params);
    return {along * across.value, across.terms};
}

SeriesValue rectangle_survival(geometry::Point x, double a, double b, double t,
                               const SeriesParams& params) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("rectangle_survival: half sides must be > 0");
    if (std::abs(x.x1) > a || std::abs(x.x2) > b) {
        throw std::domain_error("rectangle_survival: start outside the rectangle");
    }
    const auto u1 = interval_survival(x.x1 / a, t / (a * a), params);
    const auto u2 = interval_survival(x.x2 / b, t / (b * b), params);
    return {u1.value * u2.value, u1.terms + u2.terms};
}

SeriesValue tilted_square_survival(geometry::Point x, double half_diagonal, double t,
                                   const SeriesParams& params) {
    const double r = 1.0 / std::sqrt(2.0);
    const geometry::Point rotated{r * (x.x1 + x.x2), r * (x.x1 - x.x2)};
    const double half_side = half_diagonal * r;
    // Rounding in the rotation can push boundary points a hair outside.
    const geometry::Point clamped{std::clamp(rotated.x1, -half_side, half_side),
                                  std::clamp(rotated.x2, -half_side, half_side)};
    if (std::abs(x.x1) + std::abs(x.x2) > half_diagonal) {
        throw std::domain_error("tilted_square_survival: start outside the square");
    }
    return rectangle_survival(clamped, half_side, half_side, t, params);
}

bool has_exact_survival(const geometry::Domain& domain) {
    using K = geometry::DomainKind;
    switch (domain.kind()) {
        case K::Strip:
        case K::SemiStrip:
        case K::HalfPlane:
        case K::TiltedSquare: return true;
        case K::UnionOfRects: return domain.rects().size() == 1;
        default: return false;
    }
}

SeriesValue exact_survival(const geometry::Domain& domain, geometry::Point x, double t,
                           const SeriesParams& params) {
    using K = geometry::DomainKind;
    if (domain.truncation()) throw std::invalid_argument("exact_survival: truncated domains unsupported");
    const double a = domain.half_width();
    switch (domain.kind()) {
        case K::Strip: return interval_survival(x.x2 / a, t / (a * a), params);
        case K::SemiStrip: {
            const auto across = interval_survival(x.x2 / a, t / (a * a), params);
            return {halfline_survival(x.x1, t) * across.value, across.terms};
        }
        case K::HalfPlane: return {halfline_survival(x.x1, t), 0};
        case K::TiltedSquare: return tilted_square_survival(x, domain.compact_radius(), t, params);
        case K::UnionOfRects:
            if (domain.rects().size() == 1) {
                const auto& r = domain.rects().front();
                const geometry::Point centre{0.5 * (r.xmin + r.xmax), 0.5 * (r.ymin + r.ymax)};
                return rectangle_survival(x - centre, 0.5 * (r.xmax - r.xmin), 0.5 * (r.ymax - r.ymin),
                                          t, params);
            }
            break;
        default: break;
    }
    throw std::invalid_argument("exact_survival: no closed form for domain '" + domain.name() + "'");
}

}  // namespace exitlab::chung
