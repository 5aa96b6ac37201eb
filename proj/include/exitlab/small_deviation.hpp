#pragma once

#include "exitlab/geometry.hpp"
#include "exitlab/montecarlo.hpp"
#include "exitlab/spectral.hpp"

#include <cstdint>
#include <string>

namespace exitlab {

enum class SurvivalSource { MonteCarlo, Asymptotic };

std::string to_string(SurvivalSource source);
SurvivalSource parse_survival_source(const std::string& name);

struct SmallDeviation {
    double r = 0.0;
    double horizon = 0.0;  // r^-2
    double probability = 0.0;
    /// Monte Carlo standard error; 0 for the asymptotic source.
    double std_error = 0.0;
    SurvivalSource source = SurvivalSource::MonteCarlo;
};

/// P(max over [0,1] of min_j |W_j(s)| <= r) = P(tau >= r^-2) for the cross
/// (and the corner analogue), started at the origin.
/// Throws std::invalid_argument unless 0 < r <= 1 and the domain is a cross or corner.
SmallDeviation small_deviation_mc(const geometry::Domain& domain, double r, std::uint64_t n,
                                  std::uint64_t seed, const montecarlo::StepPolicy& policy = {},
                                  montecarlo::Execution execution = montecarlo::Execution::Parallel);

/// A v0(0) exp(-lambda0 / (2 r^2)).
SmallDeviation small_deviation_asymptotic(const geometry::Domain& domain, double r,
                                          const spectral::SpectralResult& spectrum);

}  // namespace exitlab
