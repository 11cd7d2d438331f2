#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "affine_pr/rng.hpp"
#include "affine_pr/sensing.hpp"

namespace affine_pr {

/// K-sparse complex vector of length N. Support indices are sorted and
/// values[i] belongs to support[i].
struct SparseSignal {
  std::size_t length = 0;
  std::vector<Index> support;
  std::vector<Complex> values;

  std::size_t sparsity() const noexcept { return support.size(); }
  std::vector<Complex> dense() const;
  /// s_n, zero off the support.
  Complex value_at(std::size_t n) const;
  double norm() const noexcept;
  /// delta_min = min |s_n| over the support (0 for an empty support).
  double min_magnitude() const noexcept;

  /// Throws std::invalid_argument unless the support is sorted, unique, in
  /// range, matches values in size, and every stored value is nonzero.
  void validate() const;

  bool operator==(const SparseSignal&) const = default;
};

struct ComplexGaussian {
  double variance = 2.0;
};
struct CircleDistribution {
  double radius = 5.0;
};
using SignalDistribution = std::variant<ComplexGaussian, CircleDistribution>;

/// E|s_n|^2 of a nonzero entry under the distribution.
double entry_power(const SignalDistribution& dist) noexcept;

enum class NoiseKind { kNone, kSparse, kBounded };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  std::size_t kv = 0;      // sparse: |V|
  double sigma_v = 0.0;    // sparse: standard deviation of each outlier
  double epsilon = 0.0;    // bounded: ||v||_inf < epsilon

  static NoiseSpec none() { return {}; }
  static NoiseSpec sparse(std::size_t kv, double sigma_v);
  static NoiseSpec bounded(double epsilon);
};

/// Realized noise, kept for diagnostics only. Recovery never reads it.
struct NoiseMeta {
  NoiseKind kind = NoiseKind::kNone;
  std::vector<Index> support;    // sparse: V
  std::vector<double> values;    // sparse: v_m for m in V
  double linf = 0.0;             // realized ||v||_inf
};

struct MeasurementVector {
  std::vector<double> y;
  NoiseMeta noise_meta;
};

/// Support uniform without replacement, values i.i.d. from dist.
SparseSignal generate_signal(std::size_t n, std::size_t k, const SignalDistribution& dist,
                             std::uint64_t seed);

/// Noiseless y_m = |sum_{n in T} phi_{m,n} s_n + b_m|^2, touching only the
/// rows of supported columns beyond the |b_m|^2 baseline.
MeasurementVector measure(const SparseSensingMatrix& matrix, const BiasVector& bias,
                          const SparseSignal& signal);

MeasurementVector apply_noise(const MeasurementVector& y, const NoiseSpec& spec,
                              std::uint64_t seed);

/// k distinct indices drawn uniformly from [0, n), sorted (Floyd's method).
std::vector<Index> sample_without_replacement(std::size_t n, std::size_t k, CounterRng& rng);

}  // namespace affine_pr
