#pragma once

#include "exitlab/geometry.hpp"
#include "exitlab/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace exitlab::montecarlo {

/// Time-step rule: dt = clamp(adapt * d^2, dt_min, dt_max) with d the
/// distance to the boundary, optionally with the Brownian-bridge
/// wall-crossing test after each step that stays inside.
struct StepPolicy {
    double dt_max = 1e-2;
    double adapt = 0.25;
    double dt_min = 1e-5;
    bool bridge = true;

    void validate() const;
    std::string describe() const;
};

struct ExitSample {
    double time = 0.0;
    bool censored = false;
};

/// exp(-2 d d_next / dt): probability that a Brownian bridge between two
/// points at distances d and d_next from a flat wall touches the wall.
double bridge_crossing_probability(double d, double d_next, double dt);

/// Simulates one path from `x` until it exits or reaches the last stop.
/// Steps never straddle a stop, so exit times are resolved relative to
/// every stop. Returns a censored sample at the last stop on survival.
ExitSample simulate_path(const geometry::Domain& domain, geometry::Point x,
                         std::span<const double> stops, const StepPolicy& policy,
                         rng::ReplicaStream& stream);

/// First exit time from `domain`, censored at t_max.
/// Throws std::domain_error when x is not interior.
ExitSample sample_exit_time(const geometry::Domain& domain, geometry::Point x, double t_max,
                            const StepPolicy& policy, rng::ReplicaStream& stream);

struct SurvivalCurve {
    geometry::Point start;
    std::vector<double> horizons;
    std::vector<double> estimates;
    std::vector<double> std_errors;
    std::vector<std::uint64_t> survivors;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    std::string domain_id;
    std::string policy;
};

enum class Execution { Serial, Parallel };

namespace kernels {

/// Reference implementation: replicas [first, first + count) in order.
/// survivors[i] = #{replicas with exit time >= horizons[i]}.
std::vector<std::uint64_t> survivor_counts_serial(const geometry::Domain& domain, geometry::Point x,
                                                  std::span<const double> horizons,
                                                  std::uint64_t first, std::uint64_t count,
                                                  std::uint64_t seed, const StepPolicy& policy);

/// OpenMP work-sharing over replicas; integer counts merge order-independently,
/// so results equal the serial kernel for any worker count.
std::vector<std::uint64_t> survivor_counts_openmp(const geometry::Domain& domain, geometry::Point x,
                                                  std::span<const double> horizons,
                                                  std::uint64_t first, std::uint64_t count,
                                                  std::uint64_t seed, const StepPolicy& policy);

}  // namespace kernels

/// Survival estimates at ascending horizons from one batch of n replicas.
SurvivalCurve survival_curve(const geometry::Domain& domain, geometry::Point x,
                             std::vector<double> horizons, std::uint64_t n, std::uint64_t seed,
                             const StepPolicy& policy = {},
                             Execution execution = Execution::Parallel);

}  // namespace exitlab::montecarlo
