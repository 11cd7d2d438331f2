#include "affine_pr/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "affine_pr/rng.hpp"

namespace affine_pr {

SparsityPattern::SparsityPattern(std::size_t num_rows,
                                 std::vector<std::vector<Index>> column_supports)
    : num_rows_(num_rows), supports_(std::move(column_supports)) {
  for (std::size_t n = 0; n < supports_.size(); ++n) {
    auto& col = supports_[n];
    std::sort(col.begin(), col.end());
    if (std::adjacent_find(col.begin(), col.end()) != col.end()) {
      throw std::invalid_argument("duplicate row index in column " + std::to_string(n));
    }
    if (!col.empty() && col.back() >= num_rows_) {
      throw std::invalid_argument("row index out of range in column " + std::to_string(n));
    }
  }
}

std::size_t SparsityPattern::nnz() const noexcept {
  std::size_t total = 0;
  for (const auto& col : supports_) total += col.size();
  return total;
}

std::optional<std::size_t> SparsityPattern::uniform_weight() const noexcept {
  if (supports_.empty()) return std::nullopt;
  const std::size_t d = supports_.front().size();
  for (const auto& col : supports_) {
    if (col.size() != d) return std::nullopt;
  }
  return d;
}

std::size_t SparsityPattern::max_weight() const noexcept {
  std::size_t d = 0;
  for (const auto& col : supports_) d = std::max(d, col.size());
  return d;
}

std::vector<std::vector<Index>> SparsityPattern::row_supports() const {
  std::vector<std::vector<Index>> rows(num_rows_);
  for (std::size_t n = 0; n < supports_.size(); ++n) {
    for (Index m : supports_[n]) rows[m].push_back(static_cast<Index>(n));
  }
  return rows;
}

SparseSensingMatrix::SparseSensingMatrix(SparsityPattern pattern,
                                         std::vector<std::vector<Complex>> values,
                                         std::optional<double> magnitude_class)
    : pattern_(std::move(pattern)), values_(std::move(values)), magnitude_class_(magnitude_class) {
  if (values_.size() != pattern_.num_cols()) {
    throw std::invalid_argument("value columns do not match pattern columns");
  }
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (values_[n].size() != pattern_.column(n).size()) {
      throw std::invalid_argument("value count does not match support of column " +
                                  std::to_string(n));
    }
    for (const Complex& v : values_[n]) {
      if (v == Complex{}) {
        throw std::invalid_argument("stored entry is zero in column " + std::to_string(n));
      }
    }
  }
}

std::optional<Complex> SparseSensingMatrix::entry(std::size_t m, std::size_t n) const {
  const auto col = pattern_.column(n);
  const auto it = std::lower_bound(col.begin(), col.end(), static_cast<Index>(m));
  if (it == col.end() || *it != m) return std::nullopt;
  return values_[n][static_cast<std::size_t>(it - col.begin())];
}

Complex SparseSensingMatrix::at(std::size_t m, std::size_t n) const {
  const auto value = entry(m, n);
  if (!value) {
    throw std::out_of_range("row " + std::to_string(m) + " not in support of column " +
                            std::to_string(n));
  }
  return *value;
}

double SparseSensingMatrix::min_magnitude() const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& col : values_) {
    for (const Complex& v : col) best = std::min(best, std::abs(v));
  }
  return best;
}

double BiasVector::max_magnitude() const noexcept {
  double best = 0.0;
  for (const Complex& b : entries) best = std::max(best, std::abs(b));
  return best;
}

bool is_prime(std::uint64_t p) noexcept {
  if (p < 2) return false;
  for (std::uint64_t f = 2; f * f <= p; ++f) {
    if (p % f == 0) return false;
  }
  return true;
}

SparsityPattern devore_pattern(std::uint64_t p, std::size_t degree_bound, std::size_t n_cols) {
  if (!is_prime(p)) throw std::invalid_argument("devore_pattern: p must be prime");
  if (degree_bound < 1) throw std::invalid_argument("devore_pattern: degree bound must be >= 1");
  // p^k, saturating.
  std::uint64_t capacity = 1;
  for (std::size_t j = 0; j < degree_bound; ++j) {
    if (capacity > std::numeric_limits<std::uint64_t>::max() / p) {
      capacity = std::numeric_limits<std::uint64_t>::max();
      break;
    }
    capacity *= p;
  }
  if (n_cols > capacity) throw std::invalid_argument("devore_pattern: n_cols exceeds p^k");
  if (p * p > std::numeric_limits<Index>::max()) {
    throw std::invalid_argument("devore_pattern: p^2 exceeds index range");
  }

  std::vector<std::vector<Index>> supports(n_cols);
  std::vector<std::uint64_t> coeffs(degree_bound, 0);  // coeffs[0] = a_0 (most significant)
  for (std::size_t n = 0; n < n_cols; ++n) {
    auto& col = supports[n];
    col.reserve(p);
    for (std::uint64_t x = 0; x < p; ++x) {
      // Horner from the highest degree term a_{k-1}.
      std::uint64_t q = 0;
      for (std::size_t j = degree_bound; j-- > 0;) q = (q * x + coeffs[j]) % p;
      col.push_back(static_cast<Index>(x * p + q));
    }
    // Increment the coefficient vector lexicographically (last digit fastest).
    for (std::size_t j = degree_bound; j-- > 0;) {
      if (++coeffs[j] < p) break;
      coeffs[j] = 0;
    }
  }
  return SparsityPattern(p * p, std::move(supports));
}

SparsityPattern zero_pad_rows(const SparsityPattern& pattern, std::size_t target_rows) {
  if (target_rows < pattern.num_rows()) {
    throw std::invalid_argument("zero_pad_rows: target smaller than current row count");
  }
  return SparsityPattern(target_rows, pattern.columns());
}

AssumptionReport verify_uff(const SparsityPattern& pattern, std::size_t d, std::size_t r) {
  AssumptionReport report;
  bool weights_ok = true;
  for (const auto& col : pattern.columns()) weights_ok = weights_ok && col.size() == d;

  // Pairwise overlaps via the row supports: for column n, count how many rows
  // it shares with each later column n'.
  const auto rows = pattern.row_supports();
  const std::size_t n_cols = pattern.num_cols();
  std::vector<Index> counts(n_cols, 0);
  std::vector<Index> touched;
  std::size_t worst = 0;
  for (std::size_t n = 0; n < n_cols; ++n) {
    touched.clear();
    for (Index m : pattern.column(n)) {
      for (Index other : rows[m]) {
        if (other <= n) continue;
        if (counts[other]++ == 0) touched.push_back(other);
      }
    }
    for (Index other : touched) {
      worst = std::max<std::size_t>(worst, counts[other]);
      counts[other] = 0;
    }
  }
  report.worst_overlap = worst;
  report.uff_ok = weights_ok && worst <= r;
  return report;
}

SparseSensingMatrix randomize_entries(const SparsityPattern& pattern, double phi_c,
                                      std::uint64_t seed) {
  if (!(phi_c > 0.0)) throw std::invalid_argument("randomize_entries: phi_c must be positive");
  std::vector<std::vector<Complex>> values(pattern.num_cols());
  for (std::size_t n = 0; n < pattern.num_cols(); ++n) {
    CounterRng rng(seed, Stream::kSensingPhase, n);
    auto& col = values[n];
    col.reserve(pattern.column(n).size());
    for (std::size_t j = 0; j < pattern.column(n).size(); ++j) {
      col.push_back(std::polar(phi_c, rng.phase()));
    }
  }
  return SparseSensingMatrix(pattern, std::move(values), phi_c);
}

BiasVector random_bias(std::size_t m, double b_c, std::uint64_t seed) {
  if (!(b_c > 0.0)) throw std::invalid_argument("random_bias: b_c must be positive");
  CounterRng rng(seed, Stream::kBiasPhase);
  BiasVector bias;
  bias.entries.reserve(m);
  for (std::size_t i = 0; i < m; ++i) bias.entries.push_back(std::polar(b_c, rng.phase()));
  bias.magnitude_class = b_c;
  return bias;
}

double normalized_triangle_area(Complex z1, Complex z2, Complex z3) noexcept {
  const Complex u = z1 - z2;
  const Complex v = z1 - z3;
  const double area = std::abs(std::imag(u * std::conj(v)));
  const double scale = std::max(std::abs(u) * std::abs(v), std::numeric_limits<double>::min());
  return area / scale;
}

AssumptionReport check_assumption2(const SparseSensingMatrix& matrix, const BiasVector& bias,
                                   double tol, std::size_t max_triples, std::uint64_t seed) {
  if (bias.size() != matrix.num_rows()) {
    throw std::invalid_argument("check_assumption2: bias length does not match matrix rows");
  }
  AssumptionReport report;
  report.worst_collinearity = std::numeric_limits<double>::infinity();

  auto reference = [&](std::size_t n, std::size_t j) {
    return bias.entries[matrix.support(n)[j]] / matrix.values(n)[j];
  };
  auto visit = [&](std::size_t n, std::size_t a, std::size_t b, std::size_t c) {
    const double area = normalized_triangle_area(reference(n, a), reference(n, b), reference(n, c));
    report.worst_collinearity = std::min(report.worst_collinearity, area);
    ++report.triples_checked;
  };

  std::size_t total = 0;
  for (std::size_t n = 0; n < matrix.num_cols(); ++n) {
    const std::size_t d = matrix.support(n).size();
    if (d >= 3) total += d * (d - 1) * (d - 2) / 6;
  }

  if (total <= max_triples) {
    for (std::size_t n = 0; n < matrix.num_cols(); ++n) {
      const std::size_t d = matrix.support(n).size();
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a + 1; b < d; ++b)
          for (std::size_t c = b + 1; c < d; ++c) visit(n, a, b, c);
    }
  } else {
    // Sample columns in proportion to their triple counts, then a uniform triple.
    std::vector<std::size_t> eligible;
    std::vector<std::size_t> cumulative;
    std::size_t running = 0;
    for (std::size_t n = 0; n < matrix.num_cols(); ++n) {
      const std::size_t d = matrix.support(n).size();
      if (d < 3) continue;
      running += d * (d - 1) * (d - 2) / 6;
      eligible.push_back(n);
      cumulative.push_back(running);
    }
    CounterRng rng(seed, Stream::kTripleSampling);
    for (std::size_t s = 0; s < max_triples; ++s) {
      const std::size_t pick = rng.below(running);
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
      const std::size_t n = eligible[static_cast<std::size_t>(it - cumulative.begin())];
      const std::size_t d = matrix.support(n).size();
      std::size_t a = rng.below(d);
      std::size_t b = rng.below(d - 1);
      std::size_t c = rng.below(d - 2);
      // Map to three distinct positions.
      if (b >= a) ++b;
      const std::size_t lo = std::min(a, b), hi = std::max(a, b);
      if (c >= lo) ++c;
      if (c >= hi) ++c;
      visit(n, a, b, c);
    }
  }
  report.assumption2_ok = report.worst_collinearity > tol;
  return report;
}

SparsityPattern small_uff_fixture() {
  std::vector<std::vector<Index>> supports;
  for (Index a = 0; a < 5 && supports.size() < 8; ++a)
    for (Index b = a + 1; b < 5 && supports.size() < 8; ++b) supports.push_back({a, b});
  return SparsityPattern(5, std::move(supports));
}

}  // namespace affine_pr
