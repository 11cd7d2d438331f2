#include "affine_pr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "affine_pr/rng.hpp"

namespace affine_pr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_norm(std::span<const Complex> v) {
  double sum = 0.0;
  for (const Complex& z : v) sum += std::norm(z);
  return sum;
}

// Entries of estimate and truth aligned over the union of their supports.
struct AlignedPair {
  std::vector<Complex> estimate;
  std::vector<Complex> truth;
};

AlignedPair align(const SparseSignal& estimate, const SparseSignal& truth) {
  if (estimate.length != truth.length) {
    throw std::invalid_argument("signals have different lengths");
  }
  AlignedPair out;
  std::size_t i = 0, j = 0;
  while (i < estimate.support.size() || j < truth.support.size()) {
    const Index a = i < estimate.support.size() ? estimate.support[i]
                                                : std::numeric_limits<Index>::max();
    const Index b = j < truth.support.size() ? truth.support[j]
                                             : std::numeric_limits<Index>::max();
    if (a == b) {
      out.estimate.push_back(estimate.values[i++]);
      out.truth.push_back(truth.values[j++]);
    } else if (a < b) {
      out.estimate.push_back(estimate.values[i++]);
      out.truth.emplace_back();
    } else {
      out.estimate.emplace_back();
      out.truth.push_back(truth.values[j++]);
    }
  }
  return out;
}

void check_pair(std::span<const Complex> estimate, std::span<const Complex> truth) {
  if (estimate.size() != truth.size()) {
    throw std::invalid_argument("estimate and truth differ in length");
  }
}

}  // namespace

double relative_error(std::span<const Complex> estimate, std::span<const Complex> truth) {
  check_pair(estimate, truth);
  const double denom = squared_norm(truth);
  if (!(denom > 0.0)) throw std::invalid_argument("relative_error: zero truth vector");
  double num = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) num += std::norm(estimate[j] - truth[j]);
  return std::sqrt(num / denom);
}

double ar_relative_error(std::span<const Complex> estimate, std::span<const Complex> truth) {
  check_pair(estimate, truth);
  const double denom = squared_norm(truth);
  if (!(denom > 0.0)) throw std::invalid_argument("ar_relative_error: zero truth vector");
  Complex inner{};
  for (std::size_t j = 0; j < truth.size(); ++j) inner += estimate[j] * std::conj(truth[j]);
  // Rotate explicitly instead of expanding the norm, which cancels badly
  // when the estimate is accurate.
  const double mag = std::abs(inner);
  const Complex rotation = mag > 0.0 ? std::conj(inner) / mag : Complex(1.0, 0.0);
  double num = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    num += std::norm(estimate[j] * rotation - truth[j]);
  }
  return std::sqrt(num / denom);
}

double relative_error(const SparseSignal& estimate, const SparseSignal& truth) {
  const AlignedPair p = align(estimate, truth);
  return relative_error(p.estimate, p.truth);
}

double ar_relative_error(const SparseSignal& estimate, const SparseSignal& truth) {
  const AlignedPair p = align(estimate, truth);
  return ar_relative_error(p.estimate, p.truth);
}

double CenteredBias::collinearity() const noexcept {
  const double energy = norm * norm;
  if (!(energy > 0.0)) return 1.0;
  return std::min(1.0, std::abs(self_inner) / energy);
}

CenteredBias centered_bias(const SparseSensingMatrix& matrix, const BiasVector& bias,
                           std::size_t n, const ReducedSupport& reduced) {
  if (reduced.size() < 2) {
    throw std::invalid_argument("centered_bias: needs at least 2 reduced rows");
  }
  if (bias.size() != matrix.num_rows()) {
    throw std::invalid_argument("centered_bias: bias length does not match matrix rows");
  }
  CenteredBias out;
  out.column = static_cast<Index>(n);
  out.values.reserve(reduced.size());
  for (Index m : reduced.rows) out.values.push_back(bias.entries[m] / matrix.at(m, n));
  for (const Complex& z : out.values) out.mean += z;
  out.mean /= static_cast<double>(reduced.size());
  double energy = 0.0;
  for (Complex& z : out.values) {
    z -= out.mean;
    energy += std::norm(z);
    out.self_inner += z * z;
  }
  out.norm = std::sqrt(energy);
  return out;
}

double column_factor(const CenteredBias& centered) {
  if (!(centered.norm > 0.0)) return kInf;
  const double gap = 1.0 - centered.collinearity();
  if (gap < kCollinearMargin) return kInf;
  return std::sqrt(static_cast<double>(centered.values.size())) / (centered.norm * gap);
}

LineFitResult line_fit_residual(std::span<const Point2> points) {
  if (points.size() < 2) throw std::invalid_argument("line_fit_residual: needs 2 or more points");
  LineFitResult fit;
  for (const Point2& p : points) {
    fit.anchor[0] += p[0];
    fit.anchor[1] += p[1];
  }
  fit.anchor[0] /= static_cast<double>(points.size());
  fit.anchor[1] /= static_cast<double>(points.size());

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Point2& p : points) {
    const double dx = p[0] - fit.anchor[0];
    const double dy = p[1] - fit.anchor[1];
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  fit.scatter = {Point2{sxx, sxy}, Point2{sxy, syy}};

  const double half_trace = 0.5 * (sxx + syy);
  const double spread = std::hypot(0.5 * (sxx - syy), sxy);
  fit.lambda_max = half_trace + spread;
  // det / lambda_max avoids cancelling trace - lambda_max.
  fit.residual =
      fit.lambda_max > 0.0 ? std::max(0.0, (sxx * syy - sxy * sxy) / fit.lambda_max) : 0.0;

  Point2 dir = sxx >= syy ? Point2{fit.lambda_max - syy, sxy} : Point2{sxy, fit.lambda_max - sxx};
  const double len = std::hypot(dir[0], dir[1]);
  if (len > 0.0) {
    fit.direction = {dir[0] / len, dir[1] / len};
  }
  return fit;
}

IdentityCheck verify_collinearity_identity(const SparseSensingMatrix& matrix,
                                           const BiasVector& bias, std::size_t n,
                                           const ReducedSupport& reduced) {
  if (reduced.size() < 3) {
    throw InsufficientMeasurements("verify_collinearity_identity: needs 3 or more reduced rows");
  }
  const CenteredBias centered = centered_bias(matrix, bias, n, reduced);
  if (!(centered.norm > 0.0)) {
    throw DegenerateGeometry("verify_collinearity_identity: references coincide");
  }
  std::vector<Point2> points;
  points.reserve(reduced.size());
  for (Index m : reduced.rows) {
    const Complex z = -bias.entries[m] / matrix.at(m, n);
    points.push_back({z.real(), z.imag()});
  }
  const LineFitResult fit = line_fit_residual(points);
  const double energy = centered.norm * centered.norm;
  IdentityCheck check;
  check.lhs = std::abs(centered.self_inner) / energy;
  check.rhs = 1.0 - 2.0 * fit.residual / energy;
  check.gap = std::abs(check.lhs - check.rhs);
  return check;
}

NearOptimality near_optimality_factor(double rho, double t) {
  if (!(rho > 0.0)) throw std::invalid_argument("near_optimality_factor: rho must be positive");
  NearOptimality out;
  out.t_max = 0.5 * (-1.0 + std::sqrt(1.0 + rho * rho));
  out.below_one_limit = 0.5 * (-1.0 + std::sqrt(1.0 + 0.5 * rho * rho));
  const double slack = 1e-12 * std::max(1.0, out.t_max);
  if (!(t >= 0.0) || t > out.t_max + slack) {
    throw std::invalid_argument("near_optimality_factor: t outside [0, t_max]");
  }
  const double rho2 = rho * rho;
  const double denom = 1.0 - 4.0 * (t * t + t) / rho2;
  if (t == 0.0) {
    out.delta = 0.0;
  } else if (denom <= slack) {
    out.delta = kInf;
  } else {
    out.delta = (4.0 * (t + 1.0) / rho2) / denom * t;
  }
  out.below_one = out.delta < 1.0;
  return out;
}

BoundReport error_bound(const SparseSensingMatrix& matrix, const BiasVector& bias,
                        std::span<const Index> true_support, double eps, double t) {
  if (bias.size() != matrix.num_rows()) {
    throw std::invalid_argument("error_bound: bias length does not match matrix rows");
  }
  if (!(eps >= 0.0)) throw std::invalid_argument("error_bound: eps must be nonnegative");
  std::vector<Index> support(true_support.begin(), true_support.end());
  std::sort(support.begin(), support.end());

  BoundReport report;
  const double phi_min = matrix.min_magnitude();
  const double b_max = bias.max_magnitude();
  report.lower_bound = b_max > 0.0 ? phi_min / b_max : kInf;
  if (matrix.magnitude_class() && bias.magnitude_class) {
    report.rho = *bias.magnitude_class / *matrix.magnitude_class();
  } else {
    report.rho = phi_min > 0.0 ? b_max / phi_min : kInf;
  }
  report.delta_t = std::isfinite(report.rho) && report.rho > 0.0
                       ? near_optimality_factor(report.rho, t).delta
                       : kInf;

  const double sqrt_k = std::sqrt(static_cast<double>(support.size()));
  double worst = -1.0;
  double worst_scaled = 0.0;
  for (Index n : support) {
    const ReducedSupport reduced = reduced_support(n, matrix.pattern(), support);
    double factor = kInf;
    double phi_floor = 0.0;
    if (reduced.size() >= 2) {
      factor = column_factor(centered_bias(matrix, bias, n, reduced));
      phi_floor = kInf;
      for (Index m : reduced.rows) phi_floor = std::min(phi_floor, std::abs(matrix.at(m, n)));
    }
    report.per_column_factor[n] = factor;
    if (factor > worst) {
      worst = factor;
      report.n_star = n;
    }
    const double scaled = phi_floor > 0.0 ? factor / (phi_floor * phi_floor) : kInf;
    worst_scaled = std::max(worst_scaled, scaled);
  }
  if (!support.empty()) {
    report.bound_value = sqrt_k * worst * eps;
    report.scaled_bound = sqrt_k * worst_scaled * eps;
  }
  report.optimal_bound = b_max > 0.0 && phi_min > 0.0 ? sqrt_k * eps / (b_max * phi_min) : kInf;
  return report;
}

std::vector<ConcentrationPoint> concentration_trend(double rho, std::span<const std::size_t> sizes,
                                                    std::size_t draws, double t,
                                                    std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("concentration_trend: draws must be positive");
  const double limit = (1.0 + near_optimality_factor(rho, t).delta) / rho;
  const double optimum = 1.0 / rho;
  std::vector<ConcentrationPoint> out;
  out.reserve(sizes.size());
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const std::size_t size = sizes[s];
    if (size < 2) throw std::invalid_argument("concentration_trend: sizes must be at least 2");
    std::vector<double> normalized(draws);
    std::size_t exceed = 0;
    for (std::size_t j = 0; j < draws; ++j) {
      CounterRng rng(seed, Stream::kConcentration, s * draws + j);
      CenteredBias c;
      c.values.resize(size);
      for (Complex& z : c.values) {
        // b / phi with |phi| = 1 and |b| = rho: the phases combine to a uniform one.
        const Complex phi = std::polar(1.0, rng.phase());
        const Complex b = std::polar(rho, rng.phase());
        z = b / phi;
        c.mean += z;
      }
      c.mean /= static_cast<double>(size);
      double energy = 0.0;
      for (Complex& z : c.values) {
        z -= c.mean;
        energy += std::norm(z);
        c.self_inner += z * z;
      }
      c.norm = std::sqrt(energy);
      const double factor = column_factor(c);
      normalized[j] = factor / optimum;
      if (factor > limit) ++exceed;
    }
    ConcentrationPoint point;
    point.size = size;
    double sum = 0.0;
    for (double v : normalized) sum += v;
    point.mean = sum / static_cast<double>(draws);
    std::sort(normalized.begin(), normalized.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(draws)));
    point.quantile95 = normalized[std::max<std::size_t>(rank, 1) - 1];
    point.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(draws);
    out.push_back(point);
  }
  return out;
}

}  // namespace affine_pr
