#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace affine_pr {

using Complex = std::complex<double>;
using Index = std::uint32_t;

/// Binary support structure of a column-sparse sensing matrix.
/// Column supports are kept sorted ascending.
class SparsityPattern {
 public:
  SparsityPattern() = default;
  /// Throws std::invalid_argument on out-of-range or duplicate row indices.
  SparsityPattern(std::size_t num_rows, std::vector<std::vector<Index>> column_supports);

  std::size_t num_rows() const noexcept { return num_rows_; }
  std::size_t num_cols() const noexcept { return supports_.size(); }
  std::span<const Index> column(std::size_t n) const { return supports_.at(n); }
  const std::vector<std::vector<Index>>& columns() const noexcept { return supports_; }

  /// Total number of stored (row, column) positions.
  std::size_t nnz() const noexcept;
  /// Common column weight d, or nullopt if weights differ.
  std::optional<std::size_t> uniform_weight() const noexcept;
  std::size_t max_weight() const noexcept;

  /// Row supports A_m (columns touching row m), built on demand.
  std::vector<std::vector<Index>> row_supports() const;

  bool operator==(const SparsityPattern&) const = default;

 private:
  std::size_t num_rows_ = 0;
  std::vector<std::vector<Index>> supports_;
};

/// Complex values on a SparsityPattern. values(n)[j] belongs to row column(n)[j].
class SparseSensingMatrix {
 public:
  SparseSensingMatrix() = default;
  /// Throws std::invalid_argument if shapes disagree or a value is zero.
  SparseSensingMatrix(SparsityPattern pattern, std::vector<std::vector<Complex>> values,
                      std::optional<double> magnitude_class = std::nullopt);

  const SparsityPattern& pattern() const noexcept { return pattern_; }
  std::size_t num_rows() const noexcept { return pattern_.num_rows(); }
  std::size_t num_cols() const noexcept { return pattern_.num_cols(); }
  std::span<const Index> support(std::size_t n) const { return pattern_.column(n); }
  std::span<const Complex> values(std::size_t n) const { return values_.at(n); }
  std::optional<double> magnitude_class() const noexcept { return magnitude_class_; }

  /// phi_{m,n}; returns nullopt when m is not in C_n.
  std::optional<Complex> entry(std::size_t m, std::size_t n) const;
  /// phi_{m,n}; throws std::out_of_range when m is not in C_n.
  Complex at(std::size_t m, std::size_t n) const;

  /// Smallest stored modulus (phi_min).
  double min_magnitude() const noexcept;

  bool operator==(const SparseSensingMatrix&) const = default;

 private:
  SparsityPattern pattern_;
  std::vector<std::vector<Complex>> values_;
  std::optional<double> magnitude_class_;
};

struct BiasVector {
  std::vector<Complex> entries;
  std::optional<double> magnitude_class;

  std::size_t size() const noexcept { return entries.size(); }
  /// b_max.
  double max_magnitude() const noexcept;

  bool operator==(const BiasVector&) const = default;
};

struct AssumptionReport {
  bool uff_ok = false;
  std::size_t worst_overlap = 0;
  bool assumption2_ok = false;
  /// Minimum normalized triangle area over the checked triples.
  double worst_collinearity = 0.0;
  std::size_t triples_checked = 0;
};

inline constexpr double kDefaultCollinearityTol = 1e-8;
inline constexpr std::size_t kDefaultMaxTriples = 1'000'000;

bool is_prime(std::uint64_t p) noexcept;

/// DeVore's polynomial construction over Z_p. Column n corresponds to the
/// polynomial Q(x) = sum_j a_j x^j whose coefficient vector (a_0, ..., a_{k-1})
/// is the n-th vector in lexicographic order (a_0 most significant). Its
/// support is {x*p + Q(x) mod p : x in Z_p}, giving M = p^2 rows, weight p and
/// pairwise overlap at most k-1.
SparsityPattern devore_pattern(std::uint64_t p, std::size_t degree_bound, std::size_t n_cols);

/// Appends all-zero rows; supports are unchanged.
SparsityPattern zero_pad_rows(const SparsityPattern& pattern, std::size_t target_rows);

/// Exhaustive check of |C_n| = d and |C_n ∩ C_n'| <= r over all column pairs.
AssumptionReport verify_uff(const SparsityPattern& pattern, std::size_t d, std::size_t r);

/// Entries phi_c * exp(i*phase), phase uniform on (0, 2*pi], one substream per column.
SparseSensingMatrix randomize_entries(const SparsityPattern& pattern, double phi_c,
                                      std::uint64_t seed);

/// b_m = b_c * exp(i*theta_m), theta_m uniform on (0, 2*pi].
BiasVector random_bias(std::size_t m, double b_c, std::uint64_t seed);

/// |Im((z1-z2) conj(z1-z3))| / max(|z1-z2| |z1-z3|, floor): the sine of the
/// angle at z1, zero for collinear points.
double normalized_triangle_area(Complex z1, Complex z2, Complex z3) noexcept;

/// Tests the reference points b_m / phi_{m,n} of every column for collinear
/// triples. Exhaustive when the total triple count is at most max_triples,
/// otherwise max_triples triples are sampled from a seeded stream.
AssumptionReport check_assumption2(const SparseSensingMatrix& matrix, const BiasVector& bias,
                                   double tol = kDefaultCollinearityTol,
                                   std::size_t max_triples = kDefaultMaxTriples,
                                   std::uint64_t seed = 0);

/// An 8-column, 5-row pattern with d = 2 and r = 1 (the first eight 2-subsets
/// of {0..4} in lexicographic order).
SparsityPattern small_uff_fixture();

}  // namespace affine_pr
