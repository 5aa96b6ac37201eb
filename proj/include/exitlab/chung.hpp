#pragma once

#include "exitlab/geometry.hpp"

namespace exitlab::chung {

/// Truncation control for the eigenfunction series of the interval.
struct SeriesParams {
    int max_terms = 100000;
    double tolerance = 1e-14;
    /// Below this horizon the method-of-images sum replaces the series.
    double small_time = 1e-3;
};

struct SeriesValue {
    double value = 0.0;
    int terms = 0;  // number of summed terms
};

/// P{tau >= t} for Brownian motion started at x in (-1, 1).
/// Throws std::domain_error for |x| > 1 or t < 0.
SeriesValue interval_survival(double x, double t, const SeriesParams& params = {});

/// Partial sum of the eigenfunction series with exactly `terms` terms.
double interval_partial_sum(double x, double t, int terms);

/// The k = 0 term (4/pi) cos(pi x / 2) exp(-pi^2 t / 8).
double interval_leading_term(double x, double t);

/// Decay rate of the leading term, pi^2 / 8.
double interval_decay_rate();

/// P{min_{s<=t} (x + W_s) > 0} = erf(x / sqrt(2t)). Throws for x <= 0.
double halfline_survival(double x, double t);

/// Semi-strip {x1 > 0, |x2| < 1}: product of the half-line and interval factors.
SeriesValue semistrip_survival(double x1, double x2, double t, const SeriesParams& params = {});

/// Rectangle (-a, a) x (-b, b) by scaling and coordinate independence.
SeriesValue rectangle_survival(geometry::Point x, double a, double b, double t,
                               const SeriesParams& params = {});

/// Tilted square {|x1| + |x2| < c}: a rotated square of half side c / sqrt(2).
SeriesValue tilted_square_survival(geometry::Point x, double half_diagonal, double t,
                                   const SeriesParams& params = {});

/// Closed-form survival for the domains that have one (strip, semi-strip,
/// half-plane, single rectangle, tilted square). Throws std::invalid_argument otherwise.
SeriesValue exact_survival(const geometry::Domain& domain, geometry::Point x, double t,
                           const SeriesParams& params = {});

bool has_exact_survival(const geometry::Domain& domain);

}  // namespace exitlab::chung
