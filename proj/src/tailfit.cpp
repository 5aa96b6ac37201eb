#include "exitlab/tailfit.hpp"

#include "exitlab/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace exitlab::tailfit {

namespace {

constexpr double kWindowSlack = 1e-9;

void check_window(FitWindow w) {
    if (!(w.lo < w.hi) || !std::isfinite(w.lo) || !std::isfinite(w.hi)) {
        throw std::invalid_argument("fit window must satisfy lo < hi");
    }
}

std::vector<std::size_t> window_indices(std::span<const double> horizons, FitWindow w) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] >= w.lo - kWindowSlack && horizons[i] <= w.hi + kWindowSlack) idx.push_back(i);
    }
    return idx;
}

// Var(log u) of a binomial proportion by the delta method.
double log_variance(double u, double n) {
    return std::max(1.0 - u, 1.0 / n) / (n * u);
}

}  // namespace

double TailFit::amplitude() const { return std::exp(log_amplitude); }
double TailFit::rate_stderr() const { return std::sqrt(std::max(covariance(1, 1), 0.0)); }
double TailFit::log_amplitude_stderr() const { return std::sqrt(std::max(covariance(0, 0), 0.0)); }

double TailFit::log_level_stderr(double t) const {
    const Eigen::Vector2d g(1.0, -t);
    return std::sqrt(std::max(g.dot(covariance * g), 0.0));
}

TailFit fit_log_linear(std::span<const double> times, std::span<const double> log_values,
                       std::span<const double> weights, const Eigen::MatrixXd& covariance) {
    const auto m = static_cast<Eigen::Index>(times.size());
    if (log_values.size() != times.size() || weights.size() != times.size()) {
        throw std::invalid_argument("fit_log_linear: size mismatch");
    }
    if (m < 2) throw InsufficientData("fit_log_linear: need at least 2 points");
    if (covariance.size() != 0 && (covariance.rows() != m || covariance.cols() != m)) {
        throw std::invalid_argument("fit_log_linear: covariance has the wrong shape");
    }

    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y(m), w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw std::invalid_argument("fit_log_linear: weights must be positive and finite");
        }
        X(i, 0) = 1.0;
        X(i, 1) = -times[i];
        y(i) = log_values[i];
        w(i) = weights[i];
    }
    const Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
    const Eigen::Matrix2d normal = XtW * X;
    const Eigen::LDLT<Eigen::Matrix2d> solver(normal);
    if (solver.info() != Eigen::Success || !(std::abs(normal.determinant()) > 0.0)) {
        throw InsufficientData("fit_log_linear: times do not determine a slope");
    }
    const Eigen::Vector2d beta = solver.solve(XtW * y);
    const Eigen::Matrix2d bread = solver.solve(Eigen::Matrix2d::Identity());

    TailFit fit;
    fit.log_amplitude = beta(0);
    fit.rate = beta(1);
    fit.window = {times.front(), times.back()};
    fit.times.assign(times.begin(), times.end());
    const Eigen::VectorXd r = y - X * beta;
    fit.residuals.assign(r.data(), r.data() + m);
    if (covariance.size() == 0) {
        fit.covariance = bread;
    } else {
        fit.covariance = bread * (XtW * covariance * XtW.transpose()) * bread;
    }
    return fit;
}

TailFit fit_exponential_tail(const montecarlo::SurvivalCurve& curve, FitWindow window) {
    check_window(window);
    const auto idx = window_indices(curve.horizons, window);
    if (idx.size() < 4) {
        throw InsufficientData("fit window holds " + std::to_string(idx.size()) +
                               " horizons, need at least 4");
    }
    const double n = static_cast<double>(curve.replicas);
    std::vector<double> t, y, w;
    for (auto i : idx) {
        const double u = curve.estimates[i];
        if (!(u > 0.0)) {
            throw NonPositiveEstimates("zero survival estimate at t = " + std::to_string(curve.horizons[i]));
        }
        t.push_back(curve.horizons[i]);
        y.push_back(std::log(u));
        w.push_back(1.0 / log_variance(u, n));
    }
    const auto m = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) cov(i, j) = 1.0 / w[std::min(i, j)];
    }
    auto fit = fit_log_linear(t, y, w, cov);
    fit.window = window;
    return fit;
}

RemainderReport verify_theorem1(const montecarlo::SurvivalCurve& curve,
                                const spectral::SpectralResult& spectrum, geometry::Point x,
                                const TheoremOptions& options) {
    if (curve.domain_id != spectrum.domain_id) {
        throw MismatchedDomain("survival curve on '" + curve.domain_id + "' but spectrum on '" +
                               spectrum.domain_id + "'");
    }
    if (!spectrum.has_discrete_spectrum()) {
        throw NoDiscreteSpectrum("no eigenvalue below the threshold on '" + spectrum.domain_id + "'");
    }
    RemainderReport rep;
    rep.lambda0 = spectrum.lambda0();
    rep.lambda1 = spectrum.lambda1;
    rep.lambda1_over_2 = rep.lambda1 / 2.0;
    rep.rate_predicted = rep.lambda0 / 2.0;
    rep.predicted_amplitude = spectrum.amplitude * spectrum.v0_at(x);
    if (!(rep.predicted_amplitude > 0.0)) {
        throw OutOfWindow("start point lies outside the resolved ground mode");
    }

    const auto fit = fit_exponential_tail(curve, options.window);
    rep.rate_fit = fit.rate;
    rep.rate_fit_stderr = fit.rate_stderr();
    rep.amplitude_fit = fit.amplitude();
    rep.amplitude_ratio = rep.amplitude_fit / rep.predicted_amplitude;

    const double n = static_cast<double>(curve.replicas);
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < curve.horizons.size(); ++i) {
        const double t = curve.horizons[i];
        const double r = curve.estimates[i] - rep.predicted_amplitude * std::exp(-rep.rate_predicted * t);
        const bool noise = curve.survivors[i] == 0 || std::abs(r) < 2.0 * curve.std_errors[i];
        rep.times.push_back(t);
        rep.residuals.push_back(r);
        rep.noise_floor.push_back(noise);
        if (!noise && t >= options.residual_from && curve.std_errors[i] > 0.0) used.push_back(i);
    }

    rep.residual_rate = std::nan("");
    rep.residual_rate_stderr = std::nan("");
    rep.residual_rate_linear_factor = std::nan("");
    if (used.size() >= 3) {
        const auto m = static_cast<Eigen::Index>(used.size());
        std::vector<double> t(used.size()), y(used.size()), y_lin(used.size()), w(used.size());
        Eigen::MatrixXd cov(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto i = used[a];
            const double r = rep.residuals[i];
            t[a] = curve.horizons[i];
            y[a] = std::log(std::abs(r));
            y_lin[a] = y[a] - std::log(t[a] + 1.0);
            w[a] = r * r / (curve.std_errors[i] * curve.std_errors[i]);
            for (Eigen::Index b = 0; b < m; ++b) {
                const auto j = used[b];
                const auto lo = std::min(i, j), hi = std::max(i, j);
                const double c = curve.estimates[hi] * (1.0 - curve.estimates[lo]) / n;
                cov(a, b) = c / (rep.residuals[i] * rep.residuals[j]);
            }
        }
        const auto res = fit_log_linear(t, y, w, cov);
        rep.residual_rate = res.rate;
        rep.residual_rate_stderr = res.rate_stderr();
        rep.residual_rate_linear_factor = fit_log_linear(t, y_lin, w, cov).rate;
    }

    rep.rate_ok = std::abs(rep.rate_fit - rep.rate_predicted) <= options.rate_tolerance * rep.rate_predicted;
    rep.amplitude_ok = std::abs(rep.amplitude_ratio - 1.0) <= options.amplitude_tolerance;
    rep.remainder_ok = std::isfinite(rep.residual_rate) &&
                       rep.residual_rate > rep.rate_predicted + options.gap_sigmas * rep.residual_rate_stderr;
    rep.pass = rep.rate_ok && rep.amplitude_ok && rep.remainder_ok;
    return rep;
}

double eigen_decay_prediction(geometry::Point x, const spectral::SpectralResult& spectrum,
                              const geometry::ArmFrame& arm, double compact_radius, double delta) {
    if (!spectrum.has_discrete_spectrum()) {
        throw NoDiscreteSpectrum("no eigenvalue below the threshold on '" + spectrum.domain_id + "'");
    }
    if (!arm.contains(x)) throw OutOfWindow("start point is not in the arm");
    const double y1 = arm.to_local(x).x1;
    const double lo = compact_radius + 1.0;
    const double hi = spectrum.arm_length - 2.0;
    const double y_end = y1 + delta;
    if (y1 < lo || y1 > hi || y_end < lo || y_end > hi) {
        throw OutOfWindow("arm coordinates " + std::to_string(y1) + " and " + std::to_string(y_end) +
                          " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return std::exp(-std::sqrt(spectrum.threshold - spectrum.lambda0()) * delta);
}

StartShiftReport compare_start_points(const montecarlo::SurvivalCurve& near,
                                      const montecarlo::SurvivalCurve& far,
                                      const spectral::SpectralResult& spectrum, double delta,
                                      FitWindow window, double z_crit) {
    if (near.domain_id != spectrum.domain_id || far.domain_id != spectrum.domain_id) {
        throw MismatchedDomain("start-point curves and spectrum belong to different domains");
    }
    if (near.seed == far.seed) {
        throw std::invalid_argument("start-point curves must use independent seeds");
    }
    const auto fit_near = fit_exponential_tail(near, window);
    const auto fit_far = fit_exponential_tail(far, window);

    // Rows (1, 0, -t) for the near curve and (0, 1, -t) for the far one; the
    // curves are independent, so the covariance of y is block diagonal.
    const auto in = window_indices(near.horizons, window);
    const auto jf = window_indices(far.horizons, window);
    const auto m = static_cast<Eigen::Index>(in.size() + jf.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m, 3), cov = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd y(m), w(m);
    Eigen::Index row = 0;
    for (int block = 0; block < 2; ++block) {
        const auto& c = block == 0 ? near : far;
        const auto& idx = block == 0 ? in : jf;
        const double n = static_cast<double>(c.replicas);
        const Eigen::Index first = row;
        for (auto i : idx) {
            X(row, block) = 1.0;
            X(row, 2) = -c.horizons[i];
            y(row) = std::log(c.estimates[i]);
            w(row) = 1.0 / log_variance(c.estimates[i], n);
            ++row;
        }
        for (Eigen::Index a = first; a < row; ++a) {
            for (Eigen::Index b = first; b < row; ++b) cov(a, b) = 1.0 / w(std::min(a, b));
        }
    }
    const Eigen::MatrixXd XtW = X.transpose() * w.asDiagonal();
    const Eigen::Matrix3d bread = (XtW * X).inverse();
    const Eigen::Vector3d beta = bread * (XtW * y);
    const Eigen::Matrix3d V = bread * (XtW * cov * XtW.transpose()) * bread;

    StartShiftReport rep;
    rep.shift = beta(0) - beta(1);
    rep.shift_stderr = std::sqrt(std::max(V(0, 0) + V(1, 1) - 2.0 * V(0, 1), 0.0));
    rep.common_rate = beta(2);
    rep.predicted = std::sqrt(spectrum.threshold - spectrum.lambda0()) * delta;
    rep.z = (rep.shift - rep.predicted) / rep.shift_stderr;
    rep.within = std::abs(rep.z) <= z_crit;
    rep.rate_near = fit_near.rate;
    rep.rate_far = fit_far.rate;
    return rep;
}

}  // namespace exitlab::tailfit
