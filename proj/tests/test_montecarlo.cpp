#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitlab/chung.hpp"
#include "exitlab/montecarlo.hpp"
#include "exitlab/parallel.hpp"

#include <cmath>
#include <vector>

namespace mc = exitlab::montecarlo;
namespace chung = exitlab::chung;
using exitlab::geometry::Domain;
using exitlab::geometry::Point;
using exitlab::geometry::Rect;

namespace {

const std::vector<double> kOracleTimes{0.5, 1.0, 2.0, 4.0};

void check_against_oracle(const Domain& d, Point x, std::uint64_t n, std::uint64_t seed) {
    const auto curve = mc::survival_curve(d, x, kOracleTimes, n, seed);
    for (std::size_t i = 0; i < kOracleTimes.size(); ++i) {
        const double exact = chung::exact_survival(d, x, kOracleTimes[i]).value;
        const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n));
        CAPTURE(d.name());
        CAPTURE(kOracleTimes[i]);
        CAPTURE(curve.estimates[i]);
        CAPTURE(exact);
        CHECK(std::abs(curve.estimates[i] - exact) < 3.0 * se);
    }
}

}  // namespace

TEST_CASE("bridge crossing probability") {
    CHECK(mc::bridge_crossing_probability(1.0, 1.0, 1.0) == doctest::Approx(0.13534).epsilon(1e-4));
    CHECK(mc::bridge_crossing_probability(0.0, 0.3, 0.1) == 1.0);
    CHECK(mc::bridge_crossing_probability(0.3, 0.0, 0.1) == 1.0);
    CHECK(mc::bridge_crossing_probability(5.0, 5.0, 1e-2) < 1e-300);
    CHECK_THROWS_AS((void)mc::bridge_crossing_probability(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("a zero horizon is censored immediately") {
    exitlab::rng::ReplicaStream s(1, 0);
    const auto e = mc::sample_exit_time(Domain::strip(), {0.0, 0.0}, 0.0, {}, s);
    CHECK(e.censored);
    CHECK(e.time == 0.0);
    const auto curve = mc::survival_curve(Domain::strip(), {0.0, 0.0}, {0.0, 1.0}, 1000, 3);
    CHECK(curve.estimates[0] == 1.0);
}

TEST_CASE("exit times are positive and below the horizon") {
    exitlab::rng::ReplicaStream s(8, 0);
    int exits = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto e = mc::sample_exit_time(Domain::cross(), {0.2, 0.1}, 3.0, {}, s);
        CHECK(e.time > 0.0);
        CHECK(e.time <= 3.0);
        if (!e.censored) {
            ++exits;
            CHECK(e.time < 3.0);
        }
    }
    CHECK(exits > 0);
}

TEST_CASE("invalid inputs are rejected") {
    const auto d = Domain::cross();
    CHECK_THROWS_AS((void)mc::survival_curve(d, {3.0, 3.0}, {1.0}, 10, 1), std::domain_error);
    CHECK_THROWS_AS((void)mc::survival_curve(d, {0.0, 0.0}, {2.0, 1.0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)mc::survival_curve(d, {0.0, 0.0}, {1.0, 1.0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)mc::survival_curve(d, {0.0, 0.0}, {-1.0}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)mc::survival_curve(d, {0.0, 0.0}, {}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)mc::survival_curve(d, {0.0, 0.0}, {1.0}, 0, 1), std::invalid_argument);
    mc::StepPolicy bad;
    bad.adapt = 1.5;
    CHECK_THROWS_AS((void)mc::survival_curve(d, {0.0, 0.0}, {1.0}, 10, 1, bad), std::invalid_argument);
    bad = {};
    bad.dt_max = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("curves are nested and carry binomial standard errors") {
    const auto c = mc::survival_curve(Domain::corner(), {0.0, 0.0}, {0.5, 1.0, 2.0, 3.0, 5.0}, 20000, 17);
    for (std::size_t i = 0; i < c.estimates.size(); ++i) {
        if (i > 0) CHECK(c.survivors[i] <= c.survivors[i - 1]);
        const double u = c.estimates[i];
        CHECK(c.std_errors[i] == doctest::Approx(std::sqrt(u * (1.0 - u) / 20000.0)));
    }
    CHECK(c.replicas == 20000);
    CHECK(c.seed == 17);
    CHECK(c.domain_id == "corner");
    CHECK_FALSE(c.policy.empty());
}

TEST_CASE("serial and OpenMP kernels give identical counts for any worker count") {
    const auto d = Domain::cross();
    const std::vector<double> hz{0.5, 1.0, 2.0, 4.0};
    const auto serial = mc::kernels::survivor_counts_serial(d, {0.3, 0.0}, hz, 0, 20000, 5, {});
    const int before = exitlab::parallel::worker_count();
    for (int workers : {1, 4}) {
        exitlab::parallel::set_worker_count(workers);
        CAPTURE(workers);
        CHECK(mc::kernels::survivor_counts_openmp(d, {0.3, 0.0}, hz, 0, 20000, 5, {}) == serial);
    }
    exitlab::parallel::set_worker_count(before);
    // Splitting the replica range does not change the merged counts.
    auto a = mc::kernels::survivor_counts_serial(d, {0.3, 0.0}, hz, 0, 7000, 5, {});
    const auto b = mc::kernels::survivor_counts_openmp(d, {0.3, 0.0}, hz, 7000, 13000, 5, {});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    CHECK(a == serial);
}

TEST_CASE("a fixed seed reproduces the curve and a new seed changes it") {
    const auto d = Domain::strip();
    const auto a = mc::survival_curve(d, {0.0, 0.0}, {1.0, 2.0}, 30000, 9);
    const auto b = mc::survival_curve(d, {0.0, 0.0}, {1.0, 2.0}, 30000, 9, {}, mc::Execution::Serial);
    const auto c = mc::survival_curve(d, {0.0, 0.0}, {1.0, 2.0}, 30000, 10);
    CHECK(a.survivors == b.survivors);
    CHECK(a.survivors != c.survivors);
}

TEST_CASE("rectangle survival agrees with the product formula at n = 1e6") {
    check_against_oracle(Domain::union_of_rects({Rect{-1.0, 1.0, -1.0, 1.0}}), {0.25, -0.4}, 1000000, 101);
}

TEST_CASE("strip, half-plane and semi-strip survival agree with the closed forms at n = 2e5") {
    check_against_oracle(Domain::strip(), {4.0, 0.0}, 200000, 102);
    check_against_oracle(Domain::half_plane(), {1.0, 0.0}, 200000, 103);
    check_against_oracle(Domain::semi_strip(), {1.0, 0.0}, 200000, 104);
    check_against_oracle(Domain::tilted_square(2.0), {0.5, 0.5}, 200000, 105);
}

TEST_CASE("without the bridge test the strip survival is biased upward") {
    const auto d = Domain::strip();
    const std::uint64_t n = 400000;
    mc::StepPolicy plain;
    plain.bridge = false;
    const auto with_bridge = mc::survival_curve(d, {0.0, 0.0}, {1.0, 2.0}, n, 21);
    const auto without = mc::survival_curve(d, {0.0, 0.0}, {1.0, 2.0}, n, 21, plain);
    for (std::size_t i = 0; i < 2; ++i) {
        const double exact = chung::interval_survival(0.0, with_bridge.horizons[i]).value;
        CAPTURE(with_bridge.horizons[i]);
        CAPTURE(with_bridge.estimates[i]);
        CAPTURE(without.estimates[i]);
        CHECK(without.estimates[i] > exact + 3.0 * without.std_errors[i]);
        CHECK(std::abs(with_bridge.estimates[i] - exact) < std::abs(without.estimates[i] - exact));
    }
}

TEST_CASE("halving the step cap moves the estimates by less than the sampling noise") {
    // Independent estimates differ by sqrt(2) standard errors on average, so
    // the comparison is made at three standard deviations of the difference.
    const std::uint64_t n = 1000000;
    mc::StepPolicy half;
    half.dt_max = 0.5e-2;
    for (const auto& [d, x] : {std::pair{Domain::strip(), Point{0.0, 0.3}}, std::pair{Domain::cross(), Point{0.0, 0.0}}}) {
        const auto a = mc::survival_curve(d, x, {0.5, 1.0, 2.0}, n, 31);
        const auto b = mc::survival_curve(d, x, {0.5, 1.0, 2.0}, n, 32, half);
        for (std::size_t i = 0; i < a.estimates.size(); ++i) {
            CAPTURE(d.name());
            CAPTURE(a.horizons[i]);
            const double sd = std::hypot(a.std_errors[i], b.std_errors[i]);
            CHECK(std::abs(a.estimates[i] - b.estimates[i]) < 3.0 * sd);
        }
    }
}
