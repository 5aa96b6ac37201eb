#pragma once

#include "exitlab/geometry.hpp"
#include "exitlab/montecarlo.hpp"
#include "exitlab/spectral.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace exitlab::tailfit {

struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// u(t) ~ exp(log_amplitude - rate * t) over a window.
struct TailFit {
    double rate = 0.0;
    double log_amplitude = 0.0;
    FitWindow window;
    std::vector<double> times;
    std::vector<double> residuals;  // log u - fitted
    /// Covariance of (log_amplitude, rate).
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();

    double amplitude() const;
    double rate_stderr() const;
    double log_amplitude_stderr() const;
    /// Fitted log u at t and its standard error.
    double log_level(double t) const { return log_amplitude - rate * t; }
    double log_level_stderr(double t) const;
};

/// Weighted least squares of y = log a - b t. `covariance` is the
/// covariance of y used for the sandwich estimate of Cov(log a, b);
/// when empty the weights are taken as inverse variances.
TailFit fit_log_linear(std::span<const double> times, std::span<const double> log_values,
                       std::span<const double> weights, const Eigen::MatrixXd& covariance = {});

/// Weighted LS of log u on t inside the window with weights n u / (1 - u).
/// Standard errors account for the nesting of survival counts
/// (Cov(log u_i, log u_j) = (1 - u_i) / (n u_i) for t_i <= t_j).
/// Throws InsufficientData (< 4 horizons) or NonPositiveEstimates.
TailFit fit_exponential_tail(const montecarlo::SurvivalCurve& curve, FitWindow window);

struct TheoremOptions {
    FitWindow window{4.0, 12.0};
    /// Horizons below this are not used for the remainder-rate fit.
    double residual_from = 1.0;
    double rate_tolerance = 0.05;       // relative
    double amplitude_tolerance = 0.10;  // relative
    /// The remainder rate must exceed lambda0 / 2 by this many standard errors.
    double gap_sigmas = 2.0;
};

struct RemainderReport {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double predicted_amplitude = 0.0;  // A v0(x)
    double rate_fit = 0.0;
    double rate_fit_stderr = 0.0;
    double rate_predicted = 0.0;  // lambda0 / 2
    double amplitude_fit = 0.0;
    double amplitude_ratio = 0.0;
    std::vector<double> times;
    std::vector<double> residuals;  // u_obs - A v0(x) exp(-lambda0 t / 2)
    std::vector<bool> noise_floor;  // |residual| < 2 stderr
    double residual_rate = 0.0;
    double residual_rate_stderr = 0.0;
    /// Rate of |residual| / (t + 1); compared with lambda1 / 2 for information only.
    double residual_rate_linear_factor = 0.0;
    double lambda1_over_2 = 0.0;
    bool rate_ok = false;
    bool amplitude_ok = false;
    bool remainder_ok = false;
    bool pass = false;
};

/// Checks u(x,t) = A v0(x) exp(-lambda0 t / 2) + remainder on a survival curve.
/// Throws NoDiscreteSpectrum without discrete spectrum and MismatchedDomain
/// when the curve and spectrum belong to different domains.
RemainderReport verify_theorem1(const montecarlo::SurvivalCurve& curve,
                                const spectral::SpectralResult& spectrum, geometry::Point x,
                                const TheoremOptions& options = {});

/// Ratio of main-term amplitudes when the start moves `delta` deeper into
/// `arm`: exp(-sqrt(threshold - lambda0) * delta). Throws OutOfWindow unless
/// x lies in the arm with R + 1 <= y1 and y1 + delta <= L - 2.
double eigen_decay_prediction(geometry::Point x, const spectral::SpectralResult& spectrum,
                              const geometry::ArmFrame& arm, double compact_radius, double delta);

struct StartShiftReport {
    double shift = 0.0;  // log u_near - log u_far, common to the window
    double shift_stderr = 0.0;
    double common_rate = 0.0;
    double predicted = 0.0;  // sqrt(threshold - lambda0) * delta
    double z = 0.0;
    bool within = false;
    /// Separate fits of each curve; their difference checks that the shift is constant in t.
    double rate_near = 0.0;
    double rate_far = 0.0;
};

/// Vertical log-survival shift between two independent curves started
/// `delta` apart along an arm, from a joint fit with separate amplitudes
/// and a common rate; `within` if |shift - predicted| <= z_crit * stderr.
StartShiftReport compare_start_points(const montecarlo::SurvivalCurve& near,
                                      const montecarlo::SurvivalCurve& far,
                                      const spectral::SpectralResult& spectrum, double delta,
                                      FitWindow window, double z_crit = 1.96);

}  // namespace exitlab::tailfit
