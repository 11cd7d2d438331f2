#include "affine_pr/rng.hpp"

#include <cmath>
#include <numbers>

namespace affine_pr {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream + 0xD1B54A32D192ED03ULL));
}
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(derive_key(seed, stream)) {}

CounterRng::CounterRng(std::uint64_t seed, Stream tag, std::uint64_t index) noexcept
    : key_(derive_key(derive_key(seed, static_cast<std::uint64_t>(tag)), index)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  // Lemire's multiply-and-reject.
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::pair<double, double> CounterRng::normal_pair() noexcept {
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::complex<double> CounterRng::complex_normal(double variance) noexcept {
  const auto [re, im] = normal_pair();
  const double scale = std::sqrt(variance / 2.0);
  return {scale * re, scale * im};
}

double CounterRng::phase() noexcept {
  return 2.0 * std::numbers::pi * (1.0 - uniform());
}

CounterRng CounterRng::substream(std::uint64_t id) const noexcept {
  return CounterRng(FromKey{}, derive_key(key_, id));
}

}  // namespace affine_pr
