#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "affine_pr/model.hpp"
#include "affine_pr/recovery.hpp"
#include "affine_pr/sensing.hpp"

namespace affine_pr {

/// ||estimate - truth||_2 / ||truth||_2. Throws std::invalid_argument on a
/// zero truth vector or a length mismatch.
double relative_error(std::span<const Complex> estimate, std::span<const Complex> truth);
double relative_error(const SparseSignal& estimate, const SparseSignal& truth);

/// min over omega of ||estimate * e^{i omega} - truth|| / ||truth||, evaluated
/// at omega* = -arg(sum_j estimate_j conj(truth_j)).
double ar_relative_error(std::span<const Complex> estimate, std::span<const Complex> truth);
double ar_relative_error(const SparseSignal& estimate, const SparseSignal& truth);

/// Normalized references b_m / phi_{m,n} over a reduced support, centered.
struct CenteredBias {
  Index column = 0;
  std::vector<Complex> values;  // b0, sums to zero
  Complex mean;                 // b-bar
  double norm = 0.0;            // ||b0||
  Complex self_inner;           // sum_j b0_j^2

  /// |<b0/||b0||, b0*/||b0*||>| in [0, 1]; 1 for a zero vector.
  double collinearity() const noexcept;
};

/// Throws std::invalid_argument when |reduced| < 2.
CenteredBias centered_bias(const SparseSensingMatrix& matrix, const BiasVector& bias,
                           std::size_t n, const ReducedSupport& reduced);

/// sqrt(|C~_n|) / (||b0|| (1 - collinearity)); +inf when ||b0|| = 0 or
/// 1 - collinearity < kCollinearMargin.
double column_factor(const CenteredBias& centered);

using Point2 = std::array<double, 2>;

struct LineFitResult {
  double residual = 0.0;  // minimized sum of squared orthogonal distances
  Point2 direction{1.0, 0.0};
  Point2 anchor{0.0, 0.0};  // centroid
  std::array<Point2, 2> scatter{};  // Psi, row-major
  double lambda_max = 0.0;
};

/// Orthogonal least-squares line through the points. Throws
/// std::invalid_argument for fewer than 2 points.
LineFitResult line_fit_residual(std::span<const Point2> points);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

/// Compares the collinearity factor of the centered references with
/// 1 - 2 r* / ||b0||^2, r* being the line-fit residual of the points
/// -b_m / phi_{m,n}. Throws InsufficientMeasurements when |reduced| < 3 and
/// DegenerateGeometry when ||b0|| = 0.
IdentityCheck verify_collinearity_identity(const SparseSensingMatrix& matrix,
                                           const BiasVector& bias, std::size_t n,
                                           const ReducedSupport& reduced);

struct NearOptimality {
  double delta = 0.0;
  double t_max = 0.0;       // (-1 + sqrt(1 + rho^2)) / 2
  double below_one_limit = 0.0;  // delta < 1 exactly when t < this value
  bool below_one = false;
};

/// delta(t) = (4(t+1)/rho^2) / (1 - 4(t^2+t)/rho^2) * t for 0 <= t <= t_max.
/// The denominator vanishes at t_max, where delta is +inf. Throws
/// std::invalid_argument for rho <= 0 or t outside [0, t_max].
NearOptimality near_optimality_factor(double rho, double t);

struct BoundReport {
  Index n_star = 0;
  /// sqrt(K) * factor[n_star] * eps, with eps applied to the raw noise.
  double bound_value = 0.0;
  /// sqrt(K) * max_n factor[n] * eps / phi_min(n)^2, the same chain with the
  /// noise normalized by |phi_{m,n}|^2 as the estimator does.
  double scaled_bound = 0.0;
  /// sqrt(K) * eps / (b_max * phi_min).
  double optimal_bound = 0.0;
  std::map<Index, double> per_column_factor;
  double lower_bound = 0.0;  // phi_min / b_max
  double rho = 0.0;          // b_c / phi_c, or b_max / phi_min without magnitude classes
  double delta_t = 0.0;      // delta(t) at the requested t
};

/// Oracle-side bound evaluation over the true support and its true reduced
/// supports. Degenerate columns get a +inf factor.
BoundReport error_bound(const SparseSensingMatrix& matrix, const BiasVector& bias,
                        std::span<const Index> true_support, double eps, double t = 0.0);

struct ConcentrationPoint {
  std::size_t size = 0;       // |C~_n|
  double quantile95 = 0.0;    // of factor / (1/rho)
  double mean = 0.0;
  double exceed_fraction = 0.0;  // factor > (1 + delta(t)) / rho
};

/// Empirical distribution of the per-column factor for circle-distributed
/// references with |b| = rho * |phi|, one point per reduced-support size.
std::vector<ConcentrationPoint> concentration_trend(double rho, std::span<const std::size_t> sizes,
                                                    std::size_t draws, double t,
                                                    std::uint64_t seed);

}  // namespace affine_pr
