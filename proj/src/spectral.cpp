#include "exitlab/spectral.hpp"

#include "exitlab/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace exitlab::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

long long snap(double coordinate, double h, const char* what) {
    const double steps = coordinate / h;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps))) {
        throw std::invalid_argument(std::string("assemble_laplacian: spacing does not divide the box (") +
                                    what + ")");
    }
    return static_cast<long long>(rounded);
}

// Deterministic start vector with components in every symmetry class.
Eigen::VectorXd start_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    std::uint64_t state = 0x9E3779B97F4A7C15ull;
    for (Eigen::Index i = 0; i < n; ++i) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        const double jitter = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        v[i] = 1.0 + 0.5 * jitter;
    }
    return v.normalized();
}

}  // namespace

Grid::Grid(const geometry::Domain& truncated, double h) : h_(h) {
    if (!(h > 0.0)) throw std::invalid_argument("assemble_laplacian: spacing must be > 0");
    const auto box = truncated.bounding_box();
    i0_ = snap(box.xmin, h, "xmin");
    j0_ = snap(box.ymin, h, "ymin");
    nx_ = static_cast<int>(snap(box.xmax, h, "xmax") - i0_);
    ny_ = static_cast<int>(snap(box.ymax, h, "ymax") - j0_);
    index_.assign(static_cast<std::size_t>(nx_ + 1) * static_cast<std::size_t>(ny_ + 1), -1);
    for (int j = 0; j <= ny_; ++j) {
        for (int i = 0; i <= nx_; ++i) {
            if (truncated.contains(lattice_point(i, j))) {
                index_[static_cast<std::size_t>(j) * (nx_ + 1) + i] = static_cast<int>(nodes_.size());
                nodes_.push_back({i, j});
            }
        }
    }
}

int Grid::node_at(int i, int j) const {
    if (i < 0 || j < 0 || i > nx_ || j > ny_) return -1;
    return index_[static_cast<std::size_t>(j) * (nx_ + 1) + i];
}

geometry::Point Grid::lattice_point(int i, int j) const {
    return {static_cast<double>(i0_ + i) * h_, static_cast<double>(j0_ + j) * h_};
}

geometry::Point Grid::point(std::size_t id) const {
    const auto [i, j] = nodes_[id];
    return lattice_point(i, j);
}

double Grid::interpolate(std::span<const double> values, geometry::Point p) const {
    const double fx = p.x1 / h_ - static_cast<double>(i0_);
    const double fy = p.x2 / h_ - static_cast<double>(j0_);
    const double ix = std::floor(fx);
    const double iy = std::floor(fy);
    const double sx = fx - ix;
    const double sy = fy - iy;
    auto value = [&](double a, double b) {
        const int id = node_at(static_cast<int>(a), static_cast<int>(b));
        return id < 0 ? 0.0 : values[static_cast<std::size_t>(id)];
    };
    if (ix < -1.0 || iy < -1.0 || ix > nx_ || iy > ny_) return 0.0;
    return (1.0 - sx) * (1.0 - sy) * value(ix, iy) + sx * (1.0 - sy) * value(ix + 1, iy) +
           (1.0 - sx) * sy * value(ix, iy + 1) + sx * sy * value(ix + 1, iy + 1);
}

double Grid::integrate(std::span<const double> values) const {
    double sum = 0.0;
    double carry = 0.0;  // Kahan
    for (double v : values) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return h_ * h_ * sum;
}

DirichletLaplacian assemble_laplacian(const geometry::Domain& domain, double arm_length, double h) {
    geometry::Domain truncated = domain.arms().empty() ? domain : domain.truncate(arm_length);
    if (domain.arms().empty() && !domain.bounded()) {
        throw std::invalid_argument("assemble_laplacian: domain is unbounded and has no arms");
    }
    Grid grid(truncated, h);
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (n == 0) throw std::invalid_argument("assemble_laplacian: no interior grid nodes");

    const double inv_h2 = 1.0 / (h * h);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 5);
    constexpr int kOffsets[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto [i, j] = grid.lattice_of(static_cast<std::size_t>(k));
        triplets.emplace_back(k, k, 4.0 * inv_h2);
        for (const auto& o : kOffsets) {
            const int nb = grid.node_at(i + o[0], j + o[1]);
            if (nb >= 0) triplets.emplace_back(k, nb, -inv_h2);
        }
    }

    // Connectivity over the stencil graph.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop_front();
        const auto [i, j] = grid.lattice_of(static_cast<std::size_t>(k));
        for (const auto& o : kOffsets) {
            const int nb = grid.node_at(i + o[0], j + o[1]);
            if (nb >= 0 && !seen[static_cast<std::size_t>(nb)]) {
                seen[static_cast<std::size_t>(nb)] = 1;
                ++reached;
                queue.push_back(nb);
            }
        }
    }
    if (reached != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("assemble_laplacian: interior node set is disconnected");
    }

    SparseMatrix matrix(n, n);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    matrix.makeCompressed();
    return {std::move(matrix), std::move(grid), std::move(truncated)};
}

SparseMatrix assemble_interval_laplacian(double half_width, double h) {
    if (!(half_width > 0.0) || !(h > 0.0)) throw std::invalid_argument("interval laplacian: bad parameters");
    const auto cells = static_cast<Eigen::Index>(std::llround(2.0 * half_width / h));
    if (cells < 2 || std::abs(static_cast<double>(cells) * h - 2.0 * half_width) > 1e-9 * half_width) {
        throw std::invalid_argument("interval laplacian: spacing does not divide the interval");
    }
    const Eigen::Index n = cells - 1;
    std::vector<Eigen::Triplet<double>> triplets;
    const double inv_h2 = 1.0 / (h * h);
    for (Eigen::Index k = 0; k < n; ++k) {
        triplets.emplace_back(k, k, 2.0 * inv_h2);
        if (k > 0) triplets.emplace_back(k, k - 1, -inv_h2);
        if (k + 1 < n) triplets.emplace_back(k, k + 1, -inv_h2);
    }
    SparseMatrix matrix(n, n);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    return matrix;
}

double threshold(const geometry::Domain& domain) {
    const auto arms = domain.arms();
    if (arms.empty()) throw std::invalid_argument("threshold: domain has no arms");
    const double a = arms.front().half_width;
    for (const auto& arm : arms) {
        if (arm.half_width != a) throw std::invalid_argument("threshold: arms of unequal width are unsupported");
    }
    return kPi * kPi / (4.0 * a * a);
}

EigenPairs lowest_eigenpairs(const SparseMatrix& matrix, int count, double tol, int max_restarts) {
    const Eigen::Index n = matrix.rows();
    if (count < 1 || count > n) throw std::invalid_argument("lowest_eigenpairs: bad eigenpair count");
    if (!(tol > 0.0)) throw std::invalid_argument("lowest_eigenpairs: tolerance must be > 0");

    Eigen::SimplicialLDLT<SparseMatrix> factor(matrix);
    if (factor.info() != Eigen::Success) throw NonConvergence("lowest_eigenpairs: factorisation failed");

    Eigen::Index krylov = std::min<Eigen::Index>(n, std::max<Eigen::Index>(3 * count + 20, 40));
    Eigen::VectorXd start = start_vector(n);
    EigenPairs out;
    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        Eigen::MatrixXd basis(n, krylov + 1);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(krylov);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(krylov);
        basis.col(0) = start.normalized();
        Eigen::Index steps = krylov;
        for (Eigen::Index j = 0; j < krylov; ++j) {
            Eigen::VectorXd w = factor.solve(basis.col(j));
            if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
            alpha[j] = basis.col(j).dot(w);
            w -= alpha[j] * basis.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd overlap = basis.leftCols(j + 1).transpose() * w;
                w -= basis.leftCols(j + 1) * overlap;
            }
            beta[j] = w.norm();
            if (beta[j] < 1e-12 * std::abs(alpha[j])) {
                steps = j + 1;
                break;
            }
            basis.col(j + 1) = w / beta[j];
        }

        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(steps, steps);
        for (Eigen::Index j = 0; j < steps; ++j) {
            tri(j, j) = alpha[j];
            if (j + 1 < steps) tri(j, j + 1) = tri(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
        const Eigen::Index wanted = std::min<Eigen::Index>(count, steps);

        out.values.clear();
        out.residuals.clear();
        out.vectors.resize(n, wanted);
        out.krylov_dimension = static_cast<int>(steps);
        bool converged = wanted == count;
        for (Eigen::Index k = 0; k < wanted; ++k) {
            // Largest Ritz values of the inverse are the smallest eigenvalues.
            const Eigen::Index col = steps - 1 - k;
            const double lambda = 1.0 / small.eigenvalues()[col];
            Eigen::VectorXd x = basis.leftCols(steps) * small.eigenvectors().col(col);
            x.normalize();
            const double residual = (matrix * x - lambda * x).norm() / std::abs(lambda);
            out.values.push_back(lambda);
            out.residuals.push_back(residual);
            out.vectors.col(k) = x;
            converged = converged && residual <= tol;
        }
        if (converged) return out;
        if (steps < krylov && steps == n) return out;  // exhausted the space

        start = out.vectors.rowwise().sum();
        krylov = std::min<Eigen::Index>(n, krylov * 2);
    }
    throw NonConvergence("lowest_eigenpairs: residual tolerance not reached");
}

void SpectrumOptions::validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("spectral.h must be > 0");
    if (!(arm_length > 0.0)) throw std::invalid_argument("spectral.L must be > 0");
    if (!(length_step > 0.0)) throw std::invalid_argument("spectral.length_step must be > 0");
    if (!(stability > 0.0)) throw std::invalid_argument("spectral.stability must be > 0");
    if (!(margin >= 0.0 && margin < 1.0)) throw std::invalid_argument("spectral.margin must lie in [0, 1)");
    if (k_max < 1) throw std::invalid_argument("spectral.k_max must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("spectral.tol must be > 0");
}

double SpectralResult::lambda0() const {
    if (eigenvalues.empty()) throw NoDiscreteSpectrum("no truncation-stable eigenvalue below the threshold");
    return eigenvalues.front();
}

SpectralResult solve_below_threshold(const DirichletLaplacian& op, const DirichletLaplacian* extended,
                                     double threshold, const SpectrumOptions& options) {
    options.validate();
    const int count = std::min<int>(options.k_max, static_cast<int>(op.matrix.rows()));
    const auto pairs = lowest_eigenpairs(op.matrix, count, options.tol);

    SpectralResult result;
    result.domain_id = op.domain.name();
    result.threshold = threshold;
    result.h = op.grid.spacing();
    result.arm_length = op.domain.truncation().value_or(0.0);
    result.grid = op.grid;
    result.computed = pairs.values;

    const double cutoff = threshold * (1.0 - options.margin);
    std::vector<double> candidates;
    for (double v : pairs.values) {
        if (v < cutoff) candidates.push_back(v);
    }
    if (extended != nullptr) {
        const int ext_count = std::min<int>(count, static_cast<int>(extended->matrix.rows()));
        result.computed_extended = lowest_eigenpairs(extended->matrix, ext_count, options.tol).values;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const bool stable = k < result.computed_extended.size() &&
                                std::abs(candidates[k] - result.computed_extended[k]) <
                                    options.stability * threshold;
            if (!stable) {
                candidates.resize(k);
                break;
            }
        }
    }
    result.eigenvalues = candidates;
    result.grid_eigenvalues = candidates;
    result.lambda1 = candidates.size() > 1 ? candidates[1] : threshold;
    if (!std::isfinite(result.lambda1) && pairs.values.size() > 1) result.lambda1 = pairs.values[1];

    // Sign convention: largest-magnitude entry positive, then unit discrete L2 norm.
    Eigen::VectorXd ground = pairs.vectors.col(0);
    Eigen::Index peak = 0;
    ground.cwiseAbs().maxCoeff(&peak);
    if (ground[peak] < 0.0) ground = -ground;
    ground /= std::sqrt(ground.squaredNorm()) * op.grid.spacing();
    result.v0.assign(ground.begin(), ground.end());
    result.amplitude = amplitude(result);
    return result;
}

SpectralResult compute_spectrum(const geometry::Domain& domain, const SpectrumOptions& options) {
    options.validate();
    if (domain.arms().empty()) {
        const auto op = assemble_laplacian(domain, options.arm_length, options.h);
        return solve_below_threshold(op, nullptr, std::numeric_limits<double>::infinity(), options);
    }
    const double lambda_ess = threshold(domain);
    const auto op = assemble_laplacian(domain, options.arm_length, options.h);
    const auto extended = assemble_laplacian(domain, options.arm_length + options.length_step, options.h);
    return solve_below_threshold(op, &extended, lambda_ess, options);
}

double amplitude(const SpectralResult& result) { return result.grid.integrate(result.v0); }

double richardson(double coarse, double fine, double ratio, double order) {
    const double factor = std::pow(ratio, order);
    return (factor * fine - coarse) / (factor - 1.0);
}

ExtrapolatedSpectrum compute_extrapolated(const geometry::Domain& domain, std::vector<double> spacings,
                                          SpectrumOptions options) {
    if (spacings.empty()) throw std::invalid_argument("compute_extrapolated: no spacings");
    std::sort(spacings.begin(), spacings.end(), std::greater<>());
    ExtrapolatedSpectrum out;
    out.spacings = spacings;
    for (double h : spacings) {
        options.h = h;
        out.levels.push_back(compute_spectrum(domain, options));
    }
    out.result = out.levels.back();
    if (out.levels.size() < 2) return out;

    const auto& coarse = out.levels[out.levels.size() - 2];
    const auto& fine = out.levels.back();
    const double ratio = coarse.h / fine.h;
    const std::size_t common = std::min(coarse.eigenvalues.size(), fine.eigenvalues.size());
    std::vector<double> extrapolated;
    for (std::size_t k = 0; k < common; ++k) {
        extrapolated.push_back(richardson(coarse.eigenvalues[k], fine.eigenvalues[k], ratio));
    }
    out.result.eigenvalues = extrapolated;
    out.result.extrapolated = true;
    out.result.lambda1 = extrapolated.size() > 1 ? extrapolated[1] : fine.threshold;
    return out;
}

DecayFit fit_arm_decay(const SpectralResult& result, const geometry::Domain& domain, DecayModel model,
                       std::optional<std::array<double, 2>> window) {
    const double lambda0 = result.grid_eigenvalues.empty() ? result.lambda0() : result.grid_eigenvalues.front();
    const double lambda_ess = result.threshold;
    const double L = result.arm_length;
    const std::array<double, 2> span =
        window.value_or(std::array<double, 2>{domain.compact_radius() + 2.0, L - 2.0});
    if (span[0] < domain.compact_radius() || (L > 0.0 && span[1] > L)) {
        throw std::invalid_argument("fit_arm_decay: window leaves the arm");
    }
    const double h = result.grid.spacing();
    const double wave = std::sqrt(lambda_ess);

    DecayFit fit;
    for (std::size_t a = 0; a < domain.arms().size(); ++a) {
        const auto& arm = domain.arms()[a];
        const auto lo = static_cast<long long>(std::ceil(span[0] / h - 1e-9));
        const auto hi = static_cast<long long>(std::floor(span[1] / h + 1e-9));
        const auto across = static_cast<long long>(std::llround(arm.half_width / h));

        std::vector<double> ys;
        std::vector<double> logs;
        double transverse_sum = 0.0;
        double worst_corr = 1.0;
        for (long long k = lo; k <= hi; ++k) {
            const double y1 = static_cast<double>(k) * h;
            std::vector<double> column;
            std::vector<double> profile;
            for (long long m = -across + 1; m <= across - 1; ++m) {
                const double y2 = static_cast<double>(m) * h;
                const geometry::Point p = arm.to_global(y1, y2);
                column.push_back(result.grid.interpolate(result.v0, p));
                profile.push_back(std::cos(wave * y2));
            }
            double mass = 0.0;
            for (double v : column) mass += std::abs(v);
            mass *= h;
            if (!(mass > 0.0)) continue;
            if (transverse_sum == 0.0) {
                for (double c : profile) transverse_sum += c;
                transverse_sum *= h;
            }
            // Pearson correlation of the column with the transverse mode.
            const double n = static_cast<double>(column.size());
            const double mv = std::accumulate(column.begin(), column.end(), 0.0) / n;
            const double mc = std::accumulate(profile.begin(), profile.end(), 0.0) / n;
            double sxy = 0.0;
            double sxx = 0.0;
            double syy = 0.0;
            for (std::size_t i = 0; i < column.size(); ++i) {
                sxy += (column[i] - mv) * (profile[i] - mc);
                sxx += (column[i] - mv) * (column[i] - mv);
                syy += (profile[i] - mc) * (profile[i] - mc);
            }
            worst_corr = std::min(worst_corr, sxy / std::sqrt(sxx * syy));
            ys.push_back(y1);
            logs.push_back(std::log(mass));
        }
        if (ys.size() < 10) throw WindowTooShort("fit_arm_decay: fewer than 10 samples in the window");

        const double n = static_cast<double>(ys.size());
        // For a fixed rate the best offset is the mean of log P - log shape.
        auto offset_and_sse = [&](double rate) {
            double mean = 0.0;
            std::vector<double> r(ys.size());
            for (std::size_t i = 0; i < ys.size(); ++i) {
                const double shape = model == DecayModel::Exponential
                                         ? -rate * ys[i]
                                         : std::log(std::sinh(rate * (L - ys[i])));
                r[i] = logs[i] - shape;
                mean += r[i];
            }
            mean /= n;
            double sse = 0.0;
            for (double v : r) sse += (v - mean) * (v - mean);
            return std::pair{mean, sse};
        };

        ArmDecay decay;
        decay.arm = a;
        if (model == DecayModel::Exponential) {
            const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
            const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
            double sxy = 0.0;
            double sxx = 0.0;
            for (std::size_t i = 0; i < ys.size(); ++i) {
                sxy += (ys[i] - my) * (logs[i] - ml);
                sxx += (ys[i] - my) * (ys[i] - my);
            }
            decay.rate = -sxy / sxx;
            decay.coefficient = std::exp(ml + decay.rate * my) / transverse_sum;
        } else {
            if (!(L > span[1])) throw std::invalid_argument("fit_arm_decay: cap model needs L beyond the window");
            const auto best = boost::math::tools::brent_find_minima(
                [&](double rate) { return offset_and_sse(rate).second; }, 1e-6, 20.0, 52);
            decay.rate = best.first;
            const double offset = offset_and_sse(decay.rate).first;
            // sinh(k (L - y)) = exp(kL) exp(-k y) / 2 (1 - exp(-2k(L - y)))
            decay.coefficient = std::exp(offset + decay.rate * L) / 2.0 / transverse_sum;
        }
        decay.predicted_rate = std::sqrt(std::max(0.0, lambda_ess - lambda0));
        decay.transverse_correlation = worst_corr;
        decay.window_lo = ys.front();
        decay.window_hi = ys.back();
        decay.samples = static_cast<int>(ys.size());
        fit.arms.push_back(decay);
    }
    return fit;
}

}  // namespace exitlab::spectral
