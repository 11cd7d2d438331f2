#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "affine_pr/model.hpp"
#include "affine_pr/sensing.hpp"

namespace affine_pr {

enum class Regime { kNoiseFree, kSparse, kBounded };

std::string_view to_string(Regime regime) noexcept;
/// Accepts "noisefree"/"noise-free"/"none", "sparse", "bounded".
Regime parse_regime(std::string_view text);

/// Reference-point geometry too close to collinear for a stable solve.
class DegenerateGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fewer isolated rows than the estimator needs.
class InsufficientMeasurements : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Relative guard for the noise-free equality test y_m != |b_m|^2.
inline constexpr double kEqualityTol = 1e-9;
/// Triple acceptance for the closed form: sine of the angle at the first point.
inline constexpr double kTripleConditionTol = 1e-6;
/// Default majority-rule membership tolerance (relative to the radius).
inline constexpr double kMajorityTol = 1e-6;
/// Two-circle tangency / coincidence tolerance used by the majority rule.
inline constexpr double kIntersectionTol = 1e-12;
/// 1 - |<b0, b0*>| / ||b0||^2 below this is treated as collinear.
inline constexpr double kCollinearMargin = 1e-12;

struct SupportEstimate {
  std::vector<Index> indices;           // T-hat, sorted
  std::vector<Index> per_column_votes;  // counting-rule tally for every column
};

/// Counting rule. With eps == 0 a row votes when |y_m - |b_m|^2| exceeds
/// kEqualityTol * max(1, |b_m|^2); with eps > 0 when it exceeds eps.
/// Requires 0 <= eta < max column weight.
SupportEstimate identify_support(std::span<const double> y, const SparseSensingMatrix& matrix,
                                 const BiasVector& bias, double eta, double eps);

/// Admissible half-open threshold interval [lower, upper) for a regime.
struct EtaRange {
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = false;
  bool sparsity_condition = false;
  double condition_lhs = 0.0;  // e.g. (d + r - 2) / (2r)
  double condition_rhs = 0.0;  // e.g. K

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  bool contains(double eta) const noexcept { return feasible && eta >= lower && eta < upper; }
};

EtaRange eta_range(std::size_t k, std::size_t d, std::size_t r, std::size_t kv, Regime regime);

struct ReducedSupport {
  Index column = 0;
  std::vector<Index> rows;  // sorted ascending
  std::size_t size() const noexcept { return rows.size(); }
};

/// C-tilde_n: rows of C_n touched by no other column of t_hat.
/// Throws std::invalid_argument when n is not in t_hat.
ReducedSupport reduced_support(std::size_t n, const SparsityPattern& pattern,
                               std::span<const Index> t_hat);

/// Circle of candidate values for s_n implied by row m alone.
struct CircleSet {
  Complex center;
  double radius = 0.0;
  Index source_row = 0;
};

/// Builds the circle for (n, m), clamping negative measurements to zero.
CircleSet circle_for(std::span<const double> y, const SparseSensingMatrix& matrix,
                     const BiasVector& bias, std::size_t n, std::size_t m);

struct CirclePoints {
  std::size_t count = 0;
  std::array<Complex, 2> points{};

  std::span<const Complex> view() const noexcept { return {points.data(), count}; }
};

/// Two-circle intersection. Near-coincident centers give no points, a
/// discriminant within tol of zero gives the tangency point.
CirclePoints circle_intersection(const CircleSet& a, const CircleSet& b, double tol);

/// Closed-form entry from three isolated rows. Throws DegenerateGeometry when
/// the three reference points are too close to collinear, and
/// std::invalid_argument when the rows are not distinct members of C_n.
Complex recover_entry_closed_form(std::span<const double> y, const SparseSensingMatrix& matrix,
                                  const BiasVector& bias, std::size_t n, std::size_t m1,
                                  std::size_t m2, std::size_t m3);

/// First triple of `reduced` in ascending lexicographic order whose reference
/// points pass the kTripleConditionTol test.
std::optional<std::array<Index, 3>> select_triple(const SparseSensingMatrix& matrix,
                                                  const BiasVector& bias,
                                                  const ReducedSupport& reduced);

struct MajorityResult {
  Complex value;
  std::size_t candidate_count = 0;
  std::size_t votes = 0;
};

/// Majority rule over the pairwise circle intersections of consecutive rows.
/// Throws InsufficientMeasurements when |reduced| < 3 and DegenerateGeometry
/// when every pair is degenerate (empty candidate set).
MajorityResult recover_entry_majority(std::span<const double> y,
                                      const SparseSensingMatrix& matrix, const BiasVector& bias,
                                      std::size_t n, const ReducedSupport& reduced,
                                      double tol = kMajorityTol);

/// Centered least-squares estimate over the isolated rows. Throws
/// InsufficientMeasurements when |reduced| < 3 and DegenerateGeometry when the
/// centered references are collinear within kCollinearMargin.
Complex recover_entry_ls(std::span<const double> y, const SparseSensingMatrix& matrix,
                         const BiasVector& bias, std::size_t n, const ReducedSupport& reduced);

enum class EntryMethod { kClosedForm, kMajority, kMajorityFallbackLs, kLeastSquares, kFailed };
std::string_view to_string(EntryMethod method) noexcept;

struct EntryDiagnostics {
  Index column = 0;
  EntryMethod method = EntryMethod::kFailed;
  std::size_t reduced_size = 0;
  std::size_t candidate_count = 0;  // majority rule only
  /// sqrt(sum over reduced rows of (y_m - |phi_{m,n} s_n + b_m|^2)^2).
  double residual = 0.0;
  std::string error;

  bool ok() const noexcept { return method != EntryMethod::kFailed; }
};

struct RecoveryOptions {
  Regime regime = Regime::kNoiseFree;
  double eta = 0.0;
  double eps = 0.0;       // required (> 0) for the bounded regime
  double tol = kMajorityTol;
  unsigned threads = 1;
};

struct RecoveryReport {
  Regime regime = Regime::kNoiseFree;
  double eta = 0.0;
  double eps = 0.0;
  /// Stored at the indices of support.indices; a failed entry holds 0.
  SparseSignal estimate;
  SupportEstimate support;
  std::vector<EntryDiagnostics> per_entry;  // parallel to support.indices

  bool all_ok() const noexcept;
};

/// Two-stage recovery: counting-rule support identification, then per-entry
/// retrieval by the regime's estimator. Per-entry failures are recorded in the
/// report. Deterministic for any thread count.
RecoveryReport recover(std::span<const double> y, const SparseSensingMatrix& matrix,
                       const BiasVector& bias, const RecoveryOptions& options);

}  // namespace affine_pr
