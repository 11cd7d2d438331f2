#include "affine_pr/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "affine_pr/rng.hpp"

namespace affine_pr {

std::vector<Complex> SparseSignal::dense() const {
  std::vector<Complex> out(length);
  for (std::size_t i = 0; i < support.size(); ++i) out[support[i]] = values[i];
  return out;
}

Complex SparseSignal::value_at(std::size_t n) const {
  const auto it = std::lower_bound(support.begin(), support.end(), static_cast<Index>(n));
  if (it == support.end() || *it != n) return {};
  return values[static_cast<std::size_t>(it - support.begin())];
}

double SparseSignal::norm() const noexcept {
  double sum = 0.0;
  for (const Complex& v : values) sum += std::norm(v);
  return std::sqrt(sum);
}

double SparseSignal::min_magnitude() const noexcept {
  if (values.empty()) return 0.0;
  double best = std::abs(values.front());
  for (const Complex& v : values) best = std::min(best, std::abs(v));
  return best;
}

void SparseSignal::validate() const {
  if (support.size() != values.size()) {
    throw std::invalid_argument("signal support and values differ in size");
  }
  if (support.size() > length) throw std::invalid_argument("signal sparsity exceeds length");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] >= length) throw std::invalid_argument("signal index out of range");
    if (i > 0 && support[i] <= support[i - 1]) {
      throw std::invalid_argument("signal support must be sorted and unique");
    }
    if (values[i] == Complex{}) {
      throw std::invalid_argument("signal stores a zero at index " + std::to_string(support[i]));
    }
  }
}

double entry_power(const SignalDistribution& dist) noexcept {
  if (const auto* g = std::get_if<ComplexGaussian>(&dist)) return g->variance;
  const auto& c = std::get<CircleDistribution>(dist);
  return c.radius * c.radius;
}

NoiseSpec NoiseSpec::sparse(std::size_t kv, double sigma_v) {
  if (!(sigma_v > 0.0)) throw std::invalid_argument("sparse noise: sigma_v must be positive");
  NoiseSpec spec;
  spec.kind = NoiseKind::kSparse;
  spec.kv = kv;
  spec.sigma_v = sigma_v;
  return spec;
}

NoiseSpec NoiseSpec::bounded(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("bounded noise: epsilon must be positive");
  NoiseSpec spec;
  spec.kind = NoiseKind::kBounded;
  spec.epsilon = epsilon;
  return spec;
}

std::vector<Index> sample_without_replacement(std::size_t n, std::size_t k, CounterRng& rng) {
  if (k > n) throw std::invalid_argument("cannot sample more indices than available");
  std::unordered_set<Index> chosen;
  chosen.reserve(k * 2);
  std::vector<Index> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    auto t = static_cast<Index>(rng.below(j + 1));
    if (!chosen.insert(t).second) {
      t = static_cast<Index>(j);
      chosen.insert(t);
    }
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SparseSignal generate_signal(std::size_t n, std::size_t k, const SignalDistribution& dist,
                             std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("generate_signal: k exceeds n");
  CounterRng support_rng(seed, Stream::kSignal, 0);
  CounterRng value_rng(seed, Stream::kSignal, 1);
  SparseSignal signal;
  signal.length = n;
  signal.support = sample_without_replacement(n, k, support_rng);
  signal.values.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Complex v;
    do {
      if (const auto* g = std::get_if<ComplexGaussian>(&dist)) {
        v = value_rng.complex_normal(g->variance);
      } else {
        v = std::polar(std::get<CircleDistribution>(dist).radius, value_rng.phase());
      }
    } while (v == Complex{});
    signal.values.push_back(v);
  }
  return signal;
}

MeasurementVector measure(const SparseSensingMatrix& matrix, const BiasVector& bias,
                          const SparseSignal& signal) {
  if (bias.size() != matrix.num_rows()) {
    throw std::invalid_argument("measure: bias length does not match matrix rows");
  }
  if (signal.length != matrix.num_cols()) {
    throw std::invalid_argument("measure: signal length does not match matrix columns");
  }
  MeasurementVector out;
  out.y.resize(bias.size());
  for (std::size_t m = 0; m < bias.size(); ++m) out.y[m] = std::norm(bias.entries[m]);

  // Accumulate Phi s over the rows of supported columns only.
  std::unordered_map<Index, Complex> acc;
  acc.reserve(signal.sparsity() * matrix.pattern().max_weight() * 2);
  std::vector<Index> order;
  for (std::size_t i = 0; i < signal.sparsity(); ++i) {
    const std::size_t n = signal.support[i];
    const auto rows = matrix.support(n);
    const auto vals = matrix.values(n);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      auto [it, inserted] = acc.try_emplace(rows[j], Complex{});
      if (inserted) order.push_back(rows[j]);
      it->second += vals[j] * signal.values[i];
    }
  }
  for (Index m : order) out.y[m] = std::norm(acc[m] + bias.entries[m]);
  return out;
}

MeasurementVector apply_noise(const MeasurementVector& y, const NoiseSpec& spec,
                              std::uint64_t seed) {
  MeasurementVector out = y;
  out.noise_meta = NoiseMeta{};
  out.noise_meta.kind = spec.kind;
  const std::size_t m = y.y.size();
  switch (spec.kind) {
    case NoiseKind::kNone:
      break;
    case NoiseKind::kSparse: {
      if (spec.kv > m) throw std::invalid_argument("apply_noise: K_v exceeds M");
      CounterRng support_rng(seed, Stream::kNoise, 0);
      CounterRng value_rng(seed, Stream::kNoise, 1);
      out.noise_meta.support = sample_without_replacement(m, spec.kv, support_rng);
      out.noise_meta.values.reserve(spec.kv);
      for (Index row : out.noise_meta.support) {
        const double v = spec.sigma_v * value_rng.normal_pair().first;
        out.y[row] += v;
        out.noise_meta.values.push_back(v);
        out.noise_meta.linf = std::max(out.noise_meta.linf, std::abs(v));
      }
      break;
    }
    case NoiseKind::kBounded: {
      CounterRng rng(seed, Stream::kNoise, 2);
      for (std::size_t row = 0; row < m; ++row) {
        double v = spec.epsilon * (2.0 * rng.uniform_open() - 1.0);
        if (std::abs(v) >= spec.epsilon) v = std::nextafter(v, 0.0);
        out.y[row] += v;
        out.noise_meta.linf = std::max(out.noise_meta.linf, std::abs(v));
      }
      break;
    }
  }
  return out;
}

}  // namespace affine_pr
