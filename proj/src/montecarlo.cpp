#include "exitlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace exitlab::montecarlo {

namespace {

// Beyond this exponent the bridge probability is below 1e-17.
constexpr double kBridgeCutoff = 40.0;

void check_horizons(std::span<const double> horizons) {
    if (horizons.empty()) throw std::invalid_argument("survival: horizon list is empty");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (!(horizons[i] >= 0.0) || !std::isfinite(horizons[i])) {
            throw std::invalid_argument("survival: horizons must be finite and >= 0");
        }
        if (i > 0 && !(horizons[i] > horizons[i - 1])) {
            throw std::invalid_argument("survival: horizons must be strictly ascending");
        }
    }
}

// Number of horizons h with h <= tau, i.e. the bin of the exit time.
std::size_t survived_stops(std::span<const double> horizons, double tau) {
    return static_cast<std::size_t>(std::upper_bound(horizons.begin(), horizons.end(), tau) -
                                    horizons.begin());
}

std::vector<std::uint64_t> cumulate(std::span<const std::uint64_t> bins, std::size_t m) {
    // bins[k] = replicas that survived exactly k stops.
    std::vector<std::uint64_t> survivors(m, 0);
    std::uint64_t running = 0;
    for (std::size_t k = m; k >= 1; --k) {
        running += bins[k];
        survivors[k - 1] = running;
    }
    return survivors;
}

}  // namespace

void StepPolicy::validate() const {
    if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw std::invalid_argument("dt_max must be > 0");
    if (!(adapt > 0.0) || adapt > 1.0) throw std::invalid_argument("adapt must lie in (0, 1]");
    if (!(dt_min > 0.0) || dt_min > dt_max) {
        throw std::invalid_argument("dt_min must lie in (0, dt_max]");
    }
}

std::string StepPolicy::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "dt_max=" << dt_max << ";adapt=" << adapt << ";dt_min=" << dt_min
       << ";bridge=" << (bridge ? "on" : "off");
    return os.str();
}

double bridge_crossing_probability(double d, double d_next, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("bridge_crossing_probability: dt must be > 0");
    if (d <= 0.0 || d_next <= 0.0) return 1.0;
    return std::exp(-2.0 * d * d_next / dt);
}

ExitSample simulate_path(const geometry::Domain& domain, geometry::Point x,
                         std::span<const double> stops, const StepPolicy& policy,
                         rng::ReplicaStream& stream) {
    double d = domain.clearance(x);
    if (!(d > 0.0)) throw std::domain_error("simulate_path: start point is not interior");
    if (stops.empty() || stops.back() <= 0.0) return {0.0, true};

    double t = 0.0;
    std::size_t next = 0;
    while (stops[next] <= 0.0) ++next;
    geometry::Point p = x;
    for (;;) {
        double dt = std::clamp(policy.adapt * d * d, policy.dt_min, policy.dt_max);
        bool at_stop = false;
        if (t + dt >= stops[next]) {
            dt = stops[next] - t;
            at_stop = true;
        }
        const auto draw = rng::gaussian_step(stream);
        const double s = std::sqrt(dt);
        const geometry::Point q{p.x1 + s * draw.z1, p.x2 + s * draw.z2};
        const double end = at_stop ? stops[next] : t + dt;
        const double d_next = domain.clearance(q);
        if (d_next <= 0.0) {
            const double outside = domain.exterior_distance(q);
            const double frac = outside > 0.0 ? d / (d + outside) : 1.0;
            return {std::min(t + frac * dt, std::nextafter(end, t)), false};
        }
        if (policy.bridge) {
            const double exponent = 2.0 * d * d_next / dt;
            if (exponent < kBridgeCutoff && draw.uniform < std::exp(-exponent)) {
                return {std::min(t + dt * d / (d + d_next), std::nextafter(end, t)), false};
            }
        }
        t = end;
        p = q;
        d = d_next;
        if (at_stop) {
            if (++next == stops.size()) return {t, true};
        }
    }
}

ExitSample sample_exit_time(const geometry::Domain& domain, geometry::Point x, double t_max,
                            const StepPolicy& policy, rng::ReplicaStream& stream) {
    policy.validate();
    if (!(t_max >= 0.0)) throw std::invalid_argument("sample_exit_time: t_max must be >= 0");
    if (!domain.contains(x)) throw std::domain_error("sample_exit_time: start point is not interior");
    const double stops[] = {t_max};
    return simulate_path(domain, x, stops, policy, stream);
}

namespace kernels {

std::vector<std::uint64_t> survivor_counts_serial(const geometry::Domain& domain, geometry::Point x,
                                                  std::span<const double> horizons,
                                                  std::uint64_t first, std::uint64_t count,
                                                  std::uint64_t seed, const StepPolicy& policy) {
    const std::size_t m = horizons.size();
    std::vector<std::uint64_t> bins(m + 1, 0);
    for (std::uint64_t r = first; r < first + count; ++r) {
        rng::ReplicaStream stream(seed, r);
        const auto sample = simulate_path(domain, x, horizons, policy, stream);
        ++bins[sample.censored ? m : survived_stops(horizons, sample.time)];
    }
    return cumulate(bins, m);
}

std::vector<std::uint64_t> survivor_counts_openmp(const geometry::Domain& domain, geometry::Point x,
                                                  std::span<const double> horizons,
                                                  std::uint64_t first, std::uint64_t count,
                                                  std::uint64_t seed, const StepPolicy& policy) {
    const std::size_t m = horizons.size();
    std::vector<std::uint64_t> bins(m + 1, 0);
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(m + 1, 0);
#pragma omp for schedule(dynamic, 1024) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            rng::ReplicaStream stream(seed, first + static_cast<std::uint64_t>(i));
            const auto sample = simulate_path(domain, x, horizons, policy, stream);
            ++local[sample.censored ? m : survived_stops(horizons, sample.time)];
        }
#pragma omp critical(exitlab_survivor_merge)
        for (std::size_t k = 0; k <= m; ++k) bins[k] += local[k];
    }
    return cumulate(bins, m);
}

}  // namespace kernels

SurvivalCurve survival_curve(const geometry::Domain& domain, geometry::Point x,
                             std::vector<double> horizons, std::uint64_t n, std::uint64_t seed,
                             const StepPolicy& policy, Execution execution) {
    policy.validate();
    check_horizons(horizons);
    if (n < 1) throw std::invalid_argument("survival_curve: replica count must be >= 1");
    if (!domain.contains(x)) throw std::domain_error("survival_curve: start point is not interior");

    SurvivalCurve curve;
    curve.start = x;
    curve.replicas = n;
    curve.seed = seed;
    curve.domain_id = domain.name();
    curve.policy = policy.describe();
    curve.survivors = execution == Execution::Serial
                          ? kernels::survivor_counts_serial(domain, x, horizons, 0, n, seed, policy)
                          : kernels::survivor_counts_openmp(domain, x, horizons, 0, n, seed, policy);
    const double nn = static_cast<double>(n);
    for (auto c : curve.survivors) {
        const double u = static_cast<double>(c) / nn;
        curve.estimates.push_back(u);
        curve.std_errors.push_back(std::sqrt(u * (1.0 - u) / nn));
    }
    curve.horizons = std::move(horizons);
    return curve;
}

}  // namespace exitlab::montecarlo
