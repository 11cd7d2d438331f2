#pragma once

#include <complex>
#include <cstdint>
#include <utility>

namespace affine_pr {

/// Stream tags for per-object substreams. A stream is addressed by
/// (seed, tag, index) so draws never depend on evaluation order.
enum class Stream : std::uint64_t {
  kSensingPhase = 1,
  kBiasPhase = 2,
  kSignal = 3,
  kNoise = 4,
  kTripleSampling = 5,
  kBaseline = 6,
  kTrial = 7,
  kConcentration = 8,
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: the i-th output is a pure function of
/// (key, i), computed with the SplitMix64 finalizer over key + (i+1)*gamma.
/// The key is derived from (seed, stream id), so independent substreams
/// are cheap and reproducible on every platform. All distribution helpers
/// are implemented here rather than via <random> distributions, whose
/// output is implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;
  CounterRng(std::uint64_t seed, Stream tag, std::uint64_t index = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform in the open interval (0, 1).
  double uniform_open() noexcept;
  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair() noexcept;
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) noexcept;
  /// Phase uniform on (0, 2*pi].
  double phase() noexcept;

  /// Independent child stream keyed by this generator's key and id.
  CounterRng substream(std::uint64_t id) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  struct FromKey {};
  CounterRng(FromKey, std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace affine_pr
