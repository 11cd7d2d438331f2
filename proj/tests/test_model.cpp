#include <chrono>
#include <set>

#include "affine_pr/model.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace affine_pr;

TEST_CASE("generate_signal: sparsity, distributions, determinism") {
  const SparseSignal s = generate_signal(7500, 15, ComplexGaussian{2.0}, 3);
  CHECK(s.length == 7500);
  CHECK(s.sparsity() == 15);
  CHECK_NOTHROW(s.validate());
  CHECK(s == generate_signal(7500, 15, ComplexGaussian{2.0}, 3));
  CHECK_FALSE(s == generate_signal(7500, 15, ComplexGaussian{2.0}, 4));

  const SparseSignal circ = generate_signal(100, 20, CircleDistribution{5.0}, 1);
  for (const Complex& v : circ.values) CHECK(std::abs(v) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(circ.min_magnitude() == doctest::Approx(5.0));

  const SparseSignal empty = generate_signal(10, 0, ComplexGaussian{}, 1);
  CHECK(empty.sparsity() == 0);
  CHECK(empty.norm() == 0.0);
  CHECK_THROWS_AS(generate_signal(3, 4, ComplexGaussian{}, 1), std::invalid_argument);

  SparseSignal full = generate_signal(12, 12, ComplexGaussian{}, 8);
  for (Index n = 0; n < 12; ++n) CHECK(full.support[n] == n);
}

TEST_CASE("gaussian entries have the requested power") {
  const SparseSignal s = generate_signal(20000, 20000, ComplexGaussian{2.0}, 5);
  double power = 0.0;
  for (const Complex& v : s.values) power += std::norm(v);
  power /= 20000.0;
  // |s|^2 is exponential with mean 2: sd of the mean is 2 / sqrt(2e4).
  CHECK(std::abs(power - 2.0) < 4.0 * 2.0 / std::sqrt(2e4));
}

TEST_CASE("sample_without_replacement is uniform over positions") {
  std::vector<int> hits(10, 0);
  for (std::uint64_t t = 0; t < 20000; ++t) {
    CounterRng rng(t, Stream::kSignal, 0);
    const auto idx = sample_without_replacement(10, 3, rng);
    REQUIRE(std::set<Index>(idx.begin(), idx.end()).size() == 3);
    for (Index i : idx) ++hits[i];
  }
  // Expected 6000 each; binomial sd about 65.
  for (int h : hits) CHECK(std::abs(h - 6000) < 400);
}

TEST_CASE("validate rejects malformed signals") {
  SparseSignal s{5, {1, 3}, {1.0, 2.0}};
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS(SparseSignal{5, {3, 1}, {1.0, 2.0}}.validate());
  CHECK_THROWS(SparseSignal{5, {1, 5}, {1.0, 2.0}}.validate());
  CHECK_THROWS(SparseSignal{5, {1, 3}, {1.0, 0.0}}.validate());
  CHECK_THROWS(SparseSignal{5, {1}, {1.0, 2.0}}.validate());
  CHECK(s.value_at(3) == Complex(2.0));
  CHECK(s.value_at(2) == Complex(0.0));
}

TEST_CASE("measure: hand instance and zero signal") {
  const fixtures::HandInstance h;
  const SparseSignal s{1, {0}, {2.0}};
  const MeasurementVector y = measure(h.matrix, h.bias, s);
  CHECK(y.y == h.y);

  const SparseSignal zero{1, {}, {}};
  const MeasurementVector y0 = measure(h.matrix, h.bias, zero);
  CHECK(y0.y == std::vector<double>{1.0, 1.0, 1.0});

  CHECK_THROWS_AS(measure(h.matrix, fixtures::bias_of({1.0}), s), std::invalid_argument);
  CHECK_THROWS_AS(measure(h.matrix, h.bias, SparseSignal{2, {0}, {1.0}}), std::invalid_argument);
}

TEST_CASE("measure matches a dense evaluation and leaves untouched rows at |b|^2") {
  const SparsityPattern pat = zero_pad_rows(devore_pattern(7, 2, 49), 60);
  const auto phi = randomize_entries(pat, 1.3, 2);
  const auto b = random_bias(60, 0.7, 2);
  const SparseSignal s = generate_signal(49, 4, ComplexGaussian{2.0}, 2);
  const MeasurementVector y = measure(phi, b, s);
  std::set<Index> touched;
  for (Index n : s.support)
    for (Index m : pat.column(n)) touched.insert(m);
  for (std::size_t m = 0; m < 60; ++m) {
    Complex acc = b.entries[m];
    for (std::size_t i = 0; i < s.sparsity(); ++i) {
      if (auto v = phi.entry(m, s.support[i])) acc += *v * s.values[i];
    }
    CHECK(y.y[m] == doctest::Approx(std::norm(acc)).epsilon(1e-13));
    CHECK(y.y[m] >= 0.0);
    if (!touched.count(static_cast<Index>(m))) CHECK(y.y[m] == std::norm(b.entries[m]));
  }
}

TEST_CASE("measure cost does not grow with N at a fixed support") {
  // Same K and d, N differing by 60x: iterating supported columns only keeps
  // the two timings in the same range.
  const auto small = randomize_entries(devore_pattern(43, 3, 120), 1.0, 1);
  const auto large = randomize_entries(devore_pattern(43, 3, 7500), 1.0, 1);
  const auto b = random_bias(1849, 1.0, 1);
  SparseSignal s_small = generate_signal(120, 10, ComplexGaussian{}, 1);
  SparseSignal s_large = s_small;
  s_large.length = 7500;
  auto time = [&](const SparseSensingMatrix& m, const SparseSignal& s) {
    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (int rep = 0; rep < 200; ++rep) sink += measure(m, b, s).y[0];
    CHECK(sink > 0.0);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double ts = time(small, s_small);
  const double tl = time(large, s_large);
  CHECK(tl < 5.0 * ts + 1e-3);
}

TEST_CASE("apply_noise: none, sparse, bounded") {
  const std::vector<double> base(1875, 2.0);
  const MeasurementVector clean{base, {}};
  CHECK(apply_noise(clean, NoiseSpec::none(), 1).y == base);

  const MeasurementVector sp = apply_noise(clean, NoiseSpec::sparse(50, 3.0), 1);
  std::size_t changed = 0;
  for (std::size_t m = 0; m < base.size(); ++m) changed += sp.y[m] != base[m] ? 1 : 0;
  CHECK(changed == 50);
  CHECK(sp.noise_meta.support.size() == 50);
  CHECK(sp.noise_meta.values.size() == 50);
  for (std::size_t j = 0; j < 50; ++j) {
    const Index m = sp.noise_meta.support[j];
    CHECK(sp.y[m] - base[m] == doctest::Approx(sp.noise_meta.values[j]));
  }
  CHECK_THROWS_AS(apply_noise(clean, NoiseSpec::sparse(1876, 1.0), 1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::sparse(3, 0.0), std::invalid_argument);

  const MeasurementVector bd = apply_noise(clean, NoiseSpec::bounded(0.1), 1);
  double worst = 0.0;
  for (std::size_t m = 0; m < base.size(); ++m) worst = std::max(worst, std::abs(bd.y[m] - base[m]));
  CHECK(worst < 0.1);
  CHECK(worst > 0.09);
  CHECK(bd.noise_meta.linf == doctest::Approx(worst).epsilon(1e-12));
  CHECK(apply_noise(clean, NoiseSpec::bounded(0.1), 1).y == bd.y);
  CHECK_THROWS_AS(NoiseSpec::bounded(0.0), std::invalid_argument);
}

TEST_CASE("bounded noise stays strictly inside the bound on real measurements") {
  const auto pat = devore_pattern(11, 3, 300);
  const auto phi = randomize_entries(pat, std::sqrt(2.0), 6);
  const auto b = random_bias(pat.num_rows(), std::sqrt(2.0), 6);
  const SparseSignal s = generate_signal(300, 5, CircleDistribution{5.0}, 6);
  const MeasurementVector clean = measure(phi, b, s);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MeasurementVector noisy = apply_noise(clean, NoiseSpec::bounded(1e-3), seed);
    for (std::size_t m = 0; m < clean.y.size(); ++m) REQUIRE(std::abs(noisy.y[m] - clean.y[m]) < 1e-3);
  }
}
