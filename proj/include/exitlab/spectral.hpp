#pragma once

#include "exitlab/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace exitlab::spectral {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform lattice over a bounding box; lattice node (i, j) sits at
/// (origin_i + i) * h, (origin_j + j) * h. Interior nodes are numbered 0..N-1.
class Grid {
public:
    Grid() = default;
    Grid(const geometry::Domain& truncated, double h);

    double spacing() const { return h_; }
    int columns() const { return nx_ + 1; }
    int rows() const { return ny_ + 1; }
    std::size_t size() const { return nodes_.size(); }

    /// Interior node id of lattice node (i, j), or -1.
    int node_at(int i, int j) const;
    std::array<int, 2> lattice_of(std::size_t id) const { return nodes_[id]; }
    geometry::Point point(std::size_t id) const;
    geometry::Point lattice_point(int i, int j) const;

    /// Bilinear interpolation of nodal values; non-interior nodes count as 0.
    double interpolate(std::span<const double> values, geometry::Point p) const;

    /// h^2 * sum(values).
    double integrate(std::span<const double> values) const;

private:
    double h_ = 0.0;
    long long i0_ = 0;
    long long j0_ = 0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<int> index_;
    std::vector<std::array<int, 2>> nodes_;
};

/// Five-point (-Delta)_h with Dirichlet elimination on a truncated domain.
struct DirichletLaplacian {
    SparseMatrix matrix;
    Grid grid;
    geometry::Domain domain;  // truncated
};

/// Throws std::invalid_argument when L <= R, the box is not a multiple of h,
/// or the interior node set is empty or disconnected.
DirichletLaplacian assemble_laplacian(const geometry::Domain& domain, double arm_length, double h);

/// Three-point (-d^2/dx^2)_h on (-a, a) with the interior nodes -a + k h.
SparseMatrix assemble_interval_laplacian(double half_width, double h);

/// Bottom of the essential spectrum, pi^2 / (4 a^2). Throws for domains
/// without arms or with arms of unequal width.
double threshold(const geometry::Domain& domain);

struct EigenPairs {
    std::vector<double> values;  // ascending
    Eigen::MatrixXd vectors;     // unit Euclidean norm columns
    std::vector<double> residuals;  // ||A x - lambda x|| / (lambda ||x||)
    int krylov_dimension = 0;
};

/// `count` smallest eigenpairs of an SPD matrix by shift-invert Lanczos
/// (shift 0, sparse LDL^T) with full reorthogonalisation. The Krylov space
/// is enlarged and restarted until every requested pair meets `tol`.
EigenPairs lowest_eigenpairs(const SparseMatrix& matrix, int count, double tol,
                             int max_restarts = 6);

struct SpectrumOptions {
    double h = 1.0 / 32.0;
    double arm_length = 12.0;
    /// A candidate is genuine if it moves by < stability * threshold between L and L + length_step.
    double length_step = 4.0;
    double stability = 1e-3;
    /// Only eigenvalues below threshold * (1 - margin) are candidates.
    double margin = 1e-3;
    int k_max = 6;
    double tol = 1e-8;

    void validate() const;
};

struct SpectralResult {
    std::string domain_id;
    double threshold = 0.0;
    double h = 0.0;
    double arm_length = 0.0;
    /// Truncation-stable eigenvalues below the threshold, ascending.
    std::vector<double> eigenvalues;
    /// Next stable eigenvalue after lambda0, or the threshold.
    double lambda1 = 0.0;
    /// Ground mode, positive, h^2 sum v0^2 = 1 (ground mode of the box even without discrete spectrum).
    std::vector<double> v0;
    double amplitude = 0.0;
    Grid grid;
    /// All computed eigenvalues of the truncated problem at L and at L + length_step.
    std::vector<double> computed;
    std::vector<double> computed_extended;
    /// Set when eigenvalues/lambda1 hold Richardson-extrapolated values.
    bool extrapolated = false;
    std::vector<double> grid_eigenvalues;

    bool has_discrete_spectrum() const { return !eigenvalues.empty(); }
    /// Throws NoDiscreteSpectrum when empty.
    double lambda0() const;
    double v0_at(geometry::Point p) const { return grid.interpolate(v0, p); }
};

/// Classifies the eigenvalues of `op` against those of `extended` (same
/// domain truncated length_step further out).
SpectralResult solve_below_threshold(const DirichletLaplacian& op, const DirichletLaplacian* extended,
                                     double threshold, const SpectrumOptions& options);

/// Assembles and solves at L (and L + length_step for domains with arms).
SpectralResult compute_spectrum(const geometry::Domain& domain, const SpectrumOptions& options);

/// h^2 * sum(v0).
double amplitude(const SpectralResult& result);

/// (r^p fine - coarse) / (r^p - 1) for spacing ratio r.
double richardson(double coarse, double fine, double ratio, double order = 2.0);

struct ExtrapolatedSpectrum {
    std::vector<double> spacings;        // coarse to fine
    std::vector<SpectralResult> levels;  // one per spacing
    SpectralResult result;               // finest grid with extrapolated eigenvalues
};

/// Solves on every spacing and extrapolates the two finest in h^2.
ExtrapolatedSpectrum compute_extrapolated(const geometry::Domain& domain, std::vector<double> spacings,
                                          SpectrumOptions options);

enum class DecayModel {
    /// log P(y1) = c - rate * y1
    Exponential,
    /// P(y1) = c sinh(rate * (L - y1)), the profile with a Dirichlet cap at y1 = L.
    DirichletCap,
};

struct ArmDecay {
    std::size_t arm = 0;
    double coefficient = 0.0;  // C_j of v0 ~ C_j exp(-rate y1) cos(sqrt(threshold) y2)
    double rate = 0.0;
    double predicted_rate = 0.0;  // sqrt(threshold - lambda0)
    double transverse_correlation = 0.0;  // worst column in the window
    double window_lo = 0.0;
    double window_hi = 0.0;
    int samples = 0;
};

struct DecayFit {
    std::vector<ArmDecay> arms;
};

/// Per arm, fits the transverse-integrated |v0| profile over the window
/// (default [R + 2, L - 2]). Throws WindowTooShort below 10 columns.
DecayFit fit_arm_decay(const SpectralResult& result, const geometry::Domain& domain,
                       DecayModel model = DecayModel::DirichletCap,
                       std::optional<std::array<double, 2>> window = std::nullopt);

}  // namespace exitlab::spectral
