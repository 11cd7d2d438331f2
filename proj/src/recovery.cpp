#include "affine_pr/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "affine_pr/parallel.hpp"

namespace affine_pr {

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::kNoiseFree: return "noisefree";
    case Regime::kSparse: return "sparse";
    case Regime::kBounded: return "bounded";
  }
  return "unknown";
}

Regime parse_regime(std::string_view text) {
  if (text == "noisefree" || text == "noise-free" || text == "none") return Regime::kNoiseFree;
  if (text == "sparse") return Regime::kSparse;
  if (text == "bounded") return Regime::kBounded;
  throw std::invalid_argument("unknown regime: " + std::string(text));
}

std::string_view to_string(EntryMethod method) noexcept {
  switch (method) {
    case EntryMethod::kClosedForm: return "closed_form";
    case EntryMethod::kMajority: return "majority";
    case EntryMethod::kMajorityFallbackLs: return "majority_fallback_ls";
    case EntryMethod::kLeastSquares: return "least_squares";
    case EntryMethod::kFailed: return "failed";
  }
  return "unknown";
}

bool RecoveryReport::all_ok() const noexcept {
  return std::all_of(per_entry.begin(), per_entry.end(),
                     [](const EntryDiagnostics& e) { return e.ok(); });
}

namespace {

void check_dimensions(std::span<const double> y, const SparseSensingMatrix& matrix,
                      const BiasVector& bias) {
  if (y.size() != matrix.num_rows() || bias.size() != matrix.num_rows()) {
    throw std::invalid_argument("measurement, bias and matrix row counts disagree");
  }
}

// Position of row m inside C_n.
std::size_t slot_of(const SparseSensingMatrix& matrix, std::size_t n, std::size_t m) {
  const auto rows = matrix.support(n);
  const auto it = std::lower_bound(rows.begin(), rows.end(), static_cast<Index>(m));
  if (it == rows.end() || *it != m) {
    throw std::invalid_argument("row " + std::to_string(m) + " is not in the support of column " +
                                std::to_string(n));
  }
  return static_cast<std::size_t>(it - rows.begin());
}

// b_m / phi_{m,n} and (y_m - |b_m|^2) / |phi_{m,n}|^2 for each reduced row.
struct NormalizedRows {
  std::vector<Complex> reference;
  std::vector<double> excess;
};

NormalizedRows normalize(std::span<const double> y, const SparseSensingMatrix& matrix,
                         const BiasVector& bias, std::size_t n, std::span<const Index> rows) {
  NormalizedRows out;
  out.reference.reserve(rows.size());
  out.excess.reserve(rows.size());
  const auto values = matrix.values(n);
  for (Index m : rows) {
    const Complex phi = values[slot_of(matrix, n, m)];
    const Complex b = bias.entries[m];
    out.reference.push_back(b / phi);
    out.excess.push_back((y[m] - std::norm(b)) / std::norm(phi));
  }
  return out;
}

double entry_residual(std::span<const double> y, const SparseSensingMatrix& matrix,
                      const BiasVector& bias, std::size_t n, std::span<const Index> rows,
                      Complex estimate) {
  double sum = 0.0;
  for (Index m : rows) {
    const double predicted = std::norm(matrix.at(m, n) * estimate + bias.entries[m]);
    sum += (y[m] - predicted) * (y[m] - predicted);
  }
  return std::sqrt(sum);
}

double membership_gap(Complex candidate, const CircleSet& circle) {
  return std::abs(std::abs(candidate - circle.center) - circle.radius);
}

}  // namespace

SupportEstimate identify_support(std::span<const double> y, const SparseSensingMatrix& matrix,
                                 const BiasVector& bias, double eta, double eps) {
  check_dimensions(y, matrix, bias);
  const std::size_t d = matrix.pattern().max_weight();
  if (!(eta >= 0.0) || !(eta < static_cast<double>(d))) {
    throw std::invalid_argument("identify_support: eta must satisfy 0 <= eta < d");
  }
  if (eps < 0.0) throw std::invalid_argument("identify_support: eps must be nonnegative");

  std::vector<char> deviates(y.size());
  for (std::size_t m = 0; m < y.size(); ++m) {
    const double power = std::norm(bias.entries[m]);
    const double threshold = eps > 0.0 ? eps : kEqualityTol * std::max(1.0, power);
    deviates[m] = std::abs(y[m] - power) > threshold;
  }

  SupportEstimate estimate;
  estimate.per_column_votes.resize(matrix.num_cols());
  for (std::size_t n = 0; n < matrix.num_cols(); ++n) {
    Index votes = 0;
    for (Index m : matrix.support(n)) votes += deviates[m] ? 1 : 0;
    estimate.per_column_votes[n] = votes;
    if (static_cast<double>(votes) > eta) estimate.indices.push_back(static_cast<Index>(n));
  }
  return estimate;
}

EtaRange eta_range(std::size_t k, std::size_t d, std::size_t r, std::size_t kv, Regime regime) {
  const double K = static_cast<double>(k);
  const double D = static_cast<double>(d);
  const double R = static_cast<double>(r);
  const double V = static_cast<double>(kv);
  const double inf = std::numeric_limits<double>::infinity();
  EtaRange range;
  switch (regime) {
    case Regime::kNoiseFree:
      range.lower = K * R;
      range.upper = D - K * R + R - 2.0;
      range.condition_lhs = R > 0 ? (D + R - 2.0) / (2.0 * R) : inf;
      range.condition_rhs = K;
      break;
    case Regime::kSparse:
      range.lower = K * R + V;
      range.upper = D - K * R - V + R - 2.0;
      range.condition_lhs = (D + R - 2.0) / 2.0;
      range.condition_rhs = K * R + V;
      break;
    case Regime::kBounded:
      range.lower = K * R;
      range.upper = D - K * R + R;
      range.condition_lhs = R > 0 ? (D + R) / (2.0 * R) : inf;
      range.condition_rhs = K;
      break;
  }
  // The counting rule itself needs eta < d.
  range.upper = std::min(range.upper, D);
  range.feasible = range.lower < range.upper;
  range.sparsity_condition = range.condition_lhs > range.condition_rhs;
  return range;
}

ReducedSupport reduced_support(std::size_t n, const SparsityPattern& pattern,
                               std::span<const Index> t_hat) {
  if (!std::binary_search(t_hat.begin(), t_hat.end(), static_cast<Index>(n))) {
    throw std::invalid_argument("reduced_support: column " + std::to_string(n) +
                                " is not in the support estimate");
  }
  ReducedSupport reduced;
  reduced.column = static_cast<Index>(n);
  for (Index m : pattern.column(n)) {
    bool shared = false;
    for (Index other : t_hat) {
      if (other == n) continue;
      const auto col = pattern.column(other);
      if (std::binary_search(col.begin(), col.end(), m)) {
        shared = true;
        break;
      }
    }
    if (!shared) reduced.rows.push_back(m);
  }
  return reduced;
}

CircleSet circle_for(std::span<const double> y, const SparseSensingMatrix& matrix,
                     const BiasVector& bias, std::size_t n, std::size_t m) {
  const Complex phi = matrix.at(m, n);
  CircleSet circle;
  circle.center = -bias.entries[m] / phi;
  circle.radius = std::sqrt(std::max(y[m], 0.0)) / std::abs(phi);
  circle.source_row = static_cast<Index>(m);
  return circle;
}

CirclePoints circle_intersection(const CircleSet& a, const CircleSet& b, double tol) {
  CirclePoints out;
  const Complex offset = b.center - a.center;
  const double dist = std::abs(offset);
  const double scale = std::max({a.radius, b.radius, 1.0});
  if (dist < tol * scale) return out;

  // Foot of the chord along the center line, then half-chord length.
  const double along = (a.radius * a.radius - b.radius * b.radius + dist * dist) / (2.0 * dist);
  const double disc = a.radius * a.radius - along * along;
  const Complex unit = offset / dist;
  const Complex foot = a.center + along * unit;
  if (std::abs(disc) <= tol * scale * scale) {
    out.count = 1;
    out.points[0] = foot;
    return out;
  }
  if (disc < 0.0) return out;
  const double half = std::sqrt(disc);
  const Complex normal = unit * Complex(0.0, 1.0);
  out.count = 2;
  out.points[0] = foot + half * normal;
  out.points[1] = foot - half * normal;
  return out;
}

Complex recover_entry_closed_form(std::span<const double> y, const SparseSensingMatrix& matrix,
                                  const BiasVector& bias, std::size_t n, std::size_t m1,
                                  std::size_t m2, std::size_t m3) {
  check_dimensions(y, matrix, bias);
  if (m1 == m2 || m1 == m3 || m2 == m3) {
    throw std::invalid_argument("recover_entry_closed_form: rows must be distinct");
  }
  const std::array<Index, 3> rows{static_cast<Index>(m1), static_cast<Index>(m2),
                                  static_cast<Index>(m3)};
  const NormalizedRows norm = normalize(y, matrix, bias, n, rows);
  const Complex d12 = norm.reference[0] - norm.reference[1];
  const Complex d13 = norm.reference[0] - norm.reference[2];
  const double twice_area = std::imag(d12 * std::conj(d13));
  if (std::abs(twice_area) <= kTripleConditionTol * std::abs(d12) * std::abs(d13)) {
    throw DegenerateGeometry("recover_entry_closed_form: reference points are collinear");
  }
  const Complex bracket = d12 * (norm.excess[0] - norm.excess[2]) -
                          d13 * (norm.excess[0] - norm.excess[1]);
  return Complex(0.0, -1.0) / (2.0 * twice_area) * bracket;
}

std::optional<std::array<Index, 3>> select_triple(const SparseSensingMatrix& matrix,
                                                  const BiasVector& bias,
                                                  const ReducedSupport& reduced) {
  const std::size_t count = reduced.size();
  std::vector<Complex> refs;
  refs.reserve(count);
  for (Index m : reduced.rows) refs.push_back(bias.entries[m] / matrix.at(m, reduced.column));
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = a + 1; b < count; ++b)
      for (std::size_t c = b + 1; c < count; ++c) {
        if (normalized_triangle_area(refs[a], refs[b], refs[c]) > kTripleConditionTol) {
          return std::array<Index, 3>{reduced.rows[a], reduced.rows[b], reduced.rows[c]};
        }
      }
  return std::nullopt;
}

MajorityResult recover_entry_majority(std::span<const double> y,
                                      const SparseSensingMatrix& matrix, const BiasVector& bias,
                                      std::size_t n, const ReducedSupport& reduced, double tol) {
  check_dimensions(y, matrix, bias);
  if (reduced.size() < 3) {
    throw InsufficientMeasurements("recover_entry_majority: fewer than 3 isolated rows");
  }
  std::vector<CircleSet> circles;
  circles.reserve(reduced.size());
  for (Index m : reduced.rows) circles.push_back(circle_for(y, matrix, bias, n, m));

  std::vector<Complex> candidates;
  for (std::size_t p = 0; p + 1 < circles.size(); p += 2) {
    const CirclePoints hits = circle_intersection(circles[p], circles[p + 1], kIntersectionTol);
    candidates.insert(candidates.end(), hits.view().begin(), hits.view().end());
  }
  if (candidates.empty()) {
    throw DegenerateGeometry("recover_entry_majority: every circle pair is degenerate");
  }

  MajorityResult best;
  best.candidate_count = candidates.size();
  double best_fit = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (const Complex& candidate : candidates) {
    std::size_t votes = 0;
    double fit = 0.0;
    for (const CircleSet& circle : circles) {
      const double gap = membership_gap(candidate, circle);
      if (gap <= tol * std::max(circle.radius, 1.0)) ++votes;
      fit += gap * gap;
    }
    if (!have_best || votes > best.votes || (votes == best.votes && fit < best_fit)) {
      have_best = true;
      best.value = candidate;
      best.votes = votes;
      best_fit = fit;
    }
  }
  return best;
}

Complex recover_entry_ls(std::span<const double> y, const SparseSensingMatrix& matrix,
                         const BiasVector& bias, std::size_t n, const ReducedSupport& reduced) {
  check_dimensions(y, matrix, bias);
  if (reduced.size() < 3) {
    throw InsufficientMeasurements("recover_entry_ls: fewer than 3 isolated rows");
  }
  NormalizedRows rows = normalize(y, matrix, bias, n, reduced.rows);
  // y-tilde_m = y_m/|phi|^2 - |b_m/phi|^2 coincides with the excess term.
  const double count = static_cast<double>(reduced.size());
  Complex ref_mean{};
  double y_mean = 0.0;
  for (std::size_t j = 0; j < reduced.size(); ++j) {
    ref_mean += rows.reference[j];
    y_mean += rows.excess[j];
  }
  ref_mean /= count;
  y_mean /= count;

  Complex self_inner{};    // b0^T b0
  double energy = 0.0;     // ||b0||^2
  Complex conj_dot_y{};    // b0^H y0
  Complex dot_y{};         // b0^T y0
  for (std::size_t j = 0; j < reduced.size(); ++j) {
    const Complex b0 = rows.reference[j] - ref_mean;
    const double y0 = rows.excess[j] - y_mean;
    self_inner += b0 * b0;
    energy += std::norm(b0);
    conj_dot_y += std::conj(b0) * y0;
    dot_y += b0 * y0;
  }
  if (!(energy > 0.0) || 1.0 - std::abs(self_inner) / energy < kCollinearMargin) {
    throw DegenerateGeometry("recover_entry_ls: centered references are collinear");
  }
  const Complex numerator = self_inner * conj_dot_y - energy * dot_y;
  const double denominator = std::norm(self_inner) - energy * energy;
  return numerator / denominator;
}

RecoveryReport recover(std::span<const double> y, const SparseSensingMatrix& matrix,
                       const BiasVector& bias, const RecoveryOptions& options) {
  check_dimensions(y, matrix, bias);
  if (options.regime == Regime::kBounded && !(options.eps > 0.0)) {
    throw std::invalid_argument("recover: the bounded regime requires eps > 0");
  }
  RecoveryReport report;
  report.regime = options.regime;
  report.eta = options.eta;
  report.eps = options.regime == Regime::kBounded ? options.eps : 0.0;
  report.support = identify_support(y, matrix, bias, options.eta, report.eps);

  const auto& t_hat = report.support.indices;
  std::vector<Index> coverage(matrix.num_rows(), 0);
  for (Index n : t_hat)
    for (Index m : matrix.support(n)) ++coverage[m];

  std::vector<Complex> values(t_hat.size());
  report.per_entry.resize(t_hat.size());

  parallel_for(t_hat.size(), options.threads, [&](std::size_t i) {
    const Index n = t_hat[i];
    EntryDiagnostics& diag = report.per_entry[i];
    diag.column = n;
    ReducedSupport reduced;
    reduced.column = n;
    for (Index m : matrix.support(n))
      if (coverage[m] == 1) reduced.rows.push_back(m);
    diag.reduced_size = reduced.size();

    Complex estimate{};
    try {
      if (reduced.size() < 3) {
        throw InsufficientMeasurements("fewer than 3 isolated rows");
      }
      switch (options.regime) {
        case Regime::kNoiseFree: {
          const auto triple = select_triple(matrix, bias, reduced);
          if (!triple) throw DegenerateGeometry("no well-conditioned triple");
          estimate = recover_entry_closed_form(y, matrix, bias, n, (*triple)[0], (*triple)[1],
                                               (*triple)[2]);
          diag.method = EntryMethod::kClosedForm;
          break;
        }
        case Regime::kSparse: {
          try {
            const MajorityResult majority =
                recover_entry_majority(y, matrix, bias, n, reduced, options.tol);
            estimate = majority.value;
            diag.candidate_count = majority.candidate_count;
            diag.method = EntryMethod::kMajority;
          } catch (const DegenerateGeometry&) {
            estimate = recover_entry_ls(y, matrix, bias, n, reduced);
            diag.method = EntryMethod::kMajorityFallbackLs;
          }
          break;
        }
        case Regime::kBounded:
          estimate = recover_entry_ls(y, matrix, bias, n, reduced);
          diag.method = EntryMethod::kLeastSquares;
          break;
      }
      diag.residual = entry_residual(y, matrix, bias, n, reduced.rows, estimate);
    } catch (const std::domain_error& e) {
      estimate = Complex{};
      diag.method = EntryMethod::kFailed;
      diag.error = e.what();
    }
    values[i] = estimate;
  });

  report.estimate.length = matrix.num_cols();
  report.estimate.support = t_hat;
  report.estimate.values = std::move(values);
  return report;
}

}  // namespace affine_pr
