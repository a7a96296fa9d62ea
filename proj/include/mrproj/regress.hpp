#pragma once

#include "mrproj/lattice.hpp"
#include "mrproj/scaling.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <string>

namespace mrproj {

enum class ThresholdVariant {
    theory,           // pi_n = log n
    known_floor,      // pi_n^-1 = min(g*_min/2, 1), given a density floor
    empirical_decile, // pi_n^-1 = first decile of lambda_min across levels
};

struct ThresholdPolicy {
    ThresholdVariant variant = ThresholdVariant::theory;
    double known_gmin = 0.0;     // g*_min under the known-floor variant
    std::optional<double> clamp; // T_M bound, when the sup-norm of eta is known

    // Resolves pi_n^-1 for the variants that do not need fitted tables.
    double pi_inv(std::size_t n) const;
};

enum class Fallback { zero, demote_level, neighbor_average };

struct EstimatorConfig {
    int r = 1;
    int d = 1;
    ThresholdPolicy policy;
    double kappa = 1.0;
    Fallback fallback = Fallback::zero;
};

struct LocalFit {
    CellIndex cell;
    Eigen::VectorXd alpha; // coefficients over active_indices(r, cell), lex order
    double lambda_min = 0.0;
    int n_points = 0;
    bool valid = false;
};

struct GramMoment {
    Eigen::MatrixXd Q;
    Eigen::VectorXd b;
    int n_points = 0; // points that actually fell in the cell
};

// Q = (1/n) sum_i phi_H(X_i) phi_H(X_i)^t 1_H(X_i), b = (1/n) sum_i phi_H(X_i) Y_i 1_H(X_i).
// `rows` lists the sample indices inside the cell (from an OccupancyMap);
// points that fall outside the cell are skipped either way. `n_total`
// overrides the normalization count when `sample` is a pre-filtered subset
// of a larger design (the moving-grid path); 0 means sample.size().
GramMoment gram_and_moment(const CellIndex& cell, const DesignSample& sample,
                           const ScalingBasis& basis, std::span<const std::uint32_t> rows,
                           std::size_t n_total = 0);

// Least-squares fit with spectral thresholding: invalid when
// lambda_min(Q) < pi_inv or Q is numerically rank-deficient.
LocalFit local_fit(const CellIndex& cell, const DesignSample& sample, const ScalingBasis& basis,
                   double pi_inv, std::span<const std::uint32_t> rows, std::size_t n_total = 0);

// <alpha, phi_H(x)> when valid, the zero fallback otherwise; clamped by T_M
// when the policy carries a bound. Throws std::invalid_argument when x is
// not in the fit's cell.
double evaluate_fit(const LocalFit& fit, const ScalingBasis& basis, std::span<const double> x,
                    const EstimatorConfig& config);

struct CellFitTable {
    int j = 0;
    std::map<CellIndex, LocalFit> fits; // ordered for deterministic iteration

    std::size_t regression_count() const { return fits.size(); }
    std::vector<double> lambda_mins() const;
};

// Marks fits with lambda_min below the (raised) threshold invalid and zeroes
// their coefficients. Lowering the threshold does not resurrect fits.
void revalidate(CellFitTable& table, double pi_inv);

// First decile (type-7) of all lambda_min values across cells and levels.
double empirical_pi_n(std::span<const CellFitTable> tables);

// Fixed-level estimator eta_j^@: one regression per occupied cell.
class LevelEstimator {
public:
    LevelEstimator() = default;
    LevelEstimator(const ScalingBasis* basis, EstimatorConfig config, CellFitTable table)
        : basis_(basis), config_(std::move(config)), table_(std::move(table)) {}

    double operator()(std::span<const double> x) const;
    const CellFitTable& table() const { return table_; }
    CellFitTable& table() { return table_; }
    const EstimatorConfig& config() const { return config_; }
    // validity of the fit at x (empty cells count as invalid)
    bool valid_at(std::span<const double> x) const;

private:
    const ScalingBasis* basis_ = nullptr;
    EstimatorConfig config_;
    CellFitTable table_;
};

// Builds the level-j fit table; cells are fitted independently (OpenMP) and
// merged in lattice order. `pi_inv_override` bypasses the policy (used by
// the decile flow, which thresholds after pooling).
LevelEstimator estimate(const DesignSample& sample, int j, const ScalingBasis& basis,
                        const EstimatorConfig& config,
                        std::optional<double> pi_inv_override = std::nullopt);

namespace reference {
// Serial reference: scans the full sample for every cell instead of using an
// occupancy map. Kept for tests and the benchmark.
LevelEstimator estimate(const DesignSample& sample, int j, const ScalingBasis& basis,
                        const EstimatorConfig& config,
                        std::optional<double> pi_inv_override = std::nullopt);
} // namespace reference

// JSON persistence of fitted models
std::string to_json(const CellFitTable& table);
CellFitTable cell_fit_table_from_json(const std::string& text);

} // namespace mrproj
