#include "exitlab/small_deviation.hpp"

#include "exitlab/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace exitlab {

namespace {

double horizon_of(const geometry::Domain& domain, double r) {
    const auto kind = domain.kind();
    if (kind != geometry::DomainKind::Cross && kind != geometry::DomainKind::Corner) {
        throw std::invalid_argument("small deviation is defined for the cross and the corner only");
    }
    if (!(r > 0.0) || r > 1.0) throw std::invalid_argument("small deviation radius must lie in (0, 1]");
    return 1.0 / r / r;
}

}  // namespace

std::string to_string(SurvivalSource source) {
    return source == SurvivalSource::MonteCarlo ? "mc" : "asymptotic";
}

SurvivalSource parse_survival_source(const std::string& name) {
    if (name == "mc") return SurvivalSource::MonteCarlo;
    if (name == "asymptotic") return SurvivalSource::Asymptotic;
    throw std::invalid_argument("unknown survival source '" + name + "'");
}

SmallDeviation small_deviation_mc(const geometry::Domain& domain, double r, std::uint64_t n,
                                  std::uint64_t seed, const montecarlo::StepPolicy& policy,
                                  montecarlo::Execution execution) {
    const double t = horizon_of(domain, r);
    const auto curve = montecarlo::survival_curve(domain, {0.0, 0.0}, {t}, n, seed, policy, execution);
    return {r, t, curve.estimates.front(), curve.std_errors.front(), SurvivalSource::MonteCarlo};
}

SmallDeviation small_deviation_asymptotic(const geometry::Domain& domain, double r,
                                          const spectral::SpectralResult& spectrum) {
    const double t = horizon_of(domain, r);
    if (spectrum.domain_id != domain.name()) {
        throw MismatchedDomain("spectrum on '" + spectrum.domain_id + "' but domain is '" + domain.name() + "'");
    }
    const double a = spectrum.amplitude * spectrum.v0_at({0.0, 0.0});
    return {r, t, a * std::exp(-spectrum.lambda0() * t / 2.0), 0.0, SurvivalSource::Asymptotic};
}

}  // namespace exitlab
