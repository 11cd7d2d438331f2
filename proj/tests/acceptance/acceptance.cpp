// One line per acceptance criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "affine_pr/analysis.hpp"
#include "affine_pr/bench.hpp"
#include "affine_pr/recovery.hpp"
#include "affine_pr/rng.hpp"
#include "affine_pr/sensing.hpp"
#include "fixtures.hpp"

using namespace affine_pr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

void run(const std::string& id, const std::string& title, double limit_seconds,
         const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = out.pass;
  if (limit_seconds > 0 && secs >= limit_seconds) {
    pass = false;
    out.detail += fmt("; over the %.0f s limit", limit_seconds);
  }
  std::printf("[%s] criterion %s: %s (%s; %.2f s)\n", pass ? "PASS" : "FAIL", id.c_str(),
              title.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

bench::ExperimentConfig paper_config(std::size_t trials, std::uint64_t seed) {
  bench::ExperimentConfig c;
  c.sizes = {{43, 1875}};
  c.n = 7500;
  c.trials = trials;
  c.master_seed = seed;
  c.baseline = false;
  return c;
}

struct RecordTally {
  std::size_t trials = 0, exact = 0, re_ok = 0, bound_ok = 0, ambiguity_ok = 0;
  double max_re = 0.0, max_gap = 0.0;
};

RecordTally tally(const std::vector<bench::TrialRecord>& records, double re_limit = 1e-8) {
  RecordTally t;
  for (const auto& r : records) {
    ++t.trials;
    t.exact += r.support_exact;
    t.re_ok += r.re <= re_limit;
    t.bound_ok += r.bound_ok;
    const double gap = std::abs(r.re - r.ar_re);
    t.ambiguity_ok += gap <= 1e-10;
    t.max_re = std::max(t.max_re, r.re);
    t.max_gap = std::max(t.max_gap, gap);
  }
  return t;
}

// Supported columns of random paper-scale noise-free instances, with their
// measurements and reduced supports.
struct ColumnCase {
  SparseSensingMatrix matrix;
  BiasVector bias;
  SparseSignal signal;
  std::vector<double> y;
};

template <typename Visit>
void for_each_column(std::size_t wanted, std::uint64_t seed, Visit&& visit) {
  const SparsityPattern pattern = zero_pad_rows(devore_pattern(43, 3, 7500), 1875);
  std::size_t seen = 0;
  for (std::uint64_t trial = 0; seen < wanted; ++trial) {
    const std::uint64_t s = CounterRng(seed, Stream::kTrial, trial)();
    ColumnCase c{randomize_entries(pattern, std::sqrt(2.0), s), random_bias(1875, std::sqrt(2.0), s),
                 generate_signal(7500, 11, ComplexGaussian{}, s), {}};
    c.y = measure(c.matrix, c.bias, c.signal).y;
    for (std::size_t i = 0; i < c.signal.sparsity() && seen < wanted; ++i) {
      const Index n = c.signal.support[i];
      const ReducedSupport reduced = reduced_support(n, pattern, c.signal.support);
      if (reduced.size() < 3) continue;
      visit(c, i, reduced);
      ++seen;
    }
  }
}

}  // namespace

int main() {
  run("1", "UFF construction for p in {3,5,7,11}, k in {2,3}", 5.0, [] {
    std::size_t ok = 0, total = 0;
    for (std::uint64_t p : {3u, 5u, 7u, 11u}) {
      for (std::size_t k : {2u, 3u}) {
        std::size_t cols = 1;
        for (std::size_t j = 0; j < k; ++j) cols *= p;
        const SparsityPattern pat = devore_pattern(p, k, cols);
        const AssumptionReport rep = verify_uff(pat, p, k - 1);
        bool weights = true;
        for (std::size_t n = 0; n < pat.num_cols(); ++n) weights &= pat.column(n).size() == p;
        ok += rep.uff_ok && weights && rep.worst_overlap <= k - 1;
        ++total;
      }
    }
    return Outcome{ok == total, fmt("%zu/%zu constructions verified", ok, total)};
  });

  run("2", "noise-free exact recovery, d=23, N=2000, K=5, theorem-midpoint eta", 30.0, [] {
    bench::ExperimentConfig c;
    c.sizes = {{23, 0}};
    c.n = 2000;
    c.k_values = {5};
    c.eta_policy = bench::EtaPolicy::kTheoremMidpoint;
    c.trials = 250;
    c.master_seed = 2;
    c.baseline = false;
    const auto res = bench::run_experiment(c, 1);
    const RecordTally t = tally(res.records);
    return Outcome{t.exact == 250 && t.re_ok == 250,
                   fmt("eta=%.1f, support exact %zu/250, RE<=1e-8 %zu/250, max RE %.2e",
                       res.points[0].eta, t.exact, t.re_ok, t.max_re)};
  });

  run("3", "paper-scale noise-free recovery, d=43, M=1875, K in {5,15,25,35}, eta=d-1", 300.0, [] {
    bench::ExperimentConfig c = paper_config(50, 3);
    c.k_values = {5, 15, 25, 35};
    c.eta_policy = bench::EtaPolicy::kDMinus1;
    const auto res = bench::run_experiment(c, 1);
    const RecordTally t = tally(res.records);
    return Outcome{t.re_ok == 200, fmt("RE<=1e-8 in %zu/200, support exact %zu/200, max RE %.2e",
                                       t.re_ok, t.exact, t.max_re)};
  });

  run("4", "sparse-noise exact recovery (K=3, Kv=10, 15 dB; K=15, Kv in {50,100})", 120.0, [] {
    bench::ExperimentConfig a = paper_config(250, 4);
    a.regime = Regime::kSparse;
    a.k_values = {3};
    a.kv_values = {10};
    a.sigma_ratio_db = {15.0};
    a.eta_policy = bench::EtaPolicy::kTheoremMidpoint;
    const auto ra = bench::run_experiment(a, 1);
    const RecordTally ta = tally(ra.records);

    bench::ExperimentConfig b = paper_config(50, 44);
    b.regime = Regime::kSparse;
    b.k_values = {15};
    b.kv_values = {50, 100};
    b.sigma_ratio_db = {15.0};
    b.eta_policy = bench::EtaPolicy::kDMinus1;
    const auto rb = bench::run_experiment(b, 1);
    const RecordTally tb = tally(rb.records);
    return Outcome{ta.re_ok == 250 && tb.re_ok == 100,
                   fmt("theorem eta=%.1f: %zu/250; eta=d-1: %zu/100; max RE %.2e / %.2e",
                       ra.points[0].eta, ta.re_ok, tb.re_ok, ta.max_re, tb.max_re)};
  });

  auto bounded = [](double eps, std::uint64_t seed) {
    bench::ExperimentConfig c = paper_config(250, seed);
    c.regime = Regime::kBounded;
    c.k_values = {11};
    c.eps_values = {eps};
    c.distribution = CircleDistribution{5.0};
    c.eta_policy = bench::EtaPolicy::kTheoremMidpoint;
    return bench::run_experiment(c, 1);
  };

  run("5", "bounded noise, radius-5 circle signal, K=11, eps=1e-8", 120.0, [&] {
    const auto res = bounded(1e-8, 5);
    const RecordTally t = tally(res.records);
    return Outcome{t.exact == 250 && t.bound_ok == 250 && t.ambiguity_ok == 250,
                   fmt("eta=%.1f, support exact %zu/250, below bound %zu/250, |RE-ARRE|<=1e-10 "
                       "%zu/250 (max %.2e)",
                       res.points[0].eta, t.exact, t.bound_ok, t.ambiguity_ok, t.max_gap)};
  });

  run("5b", "bounded noise at eps=7.5, support and bound only", 120.0, [&] {
    const auto res = bounded(7.5, 55);
    const RecordTally t = tally(res.records);
    return Outcome{t.exact == 250 && t.bound_ok == 250,
                   fmt("support exact %zu/250, below bound %zu/250, max |RE-ARRE| %.2e (not gated)",
                       t.exact, t.bound_ok, t.max_gap)};
  });

  run("6", "closed form agrees with least squares on 1000 noise-free columns", 0.0, [] {
    std::size_t ok = 0, total = 0;
    double worst = 0.0;
    for_each_column(1000, 6, [&](const ColumnCase& c, std::size_t i, const ReducedSupport& reduced) {
      const Index n = c.signal.support[i];
      const auto triple = select_triple(c.matrix, c.bias, reduced);
      if (!triple) return;
      const Complex cf = recover_entry_closed_form(c.y, c.matrix, c.bias, n, (*triple)[0],
                                                   (*triple)[1], (*triple)[2]);
      const Complex ls = recover_entry_ls(c.y, c.matrix, c.bias, n, reduced);
      const double scale = std::max(1.0, std::abs(c.signal.values[i]));
      worst = std::max(worst, std::abs(cf - ls) / scale);
      ok += std::abs(cf - ls) <= 1e-10 * scale;
      ++total;
    });
    return Outcome{ok == 1000 && total == 1000,
                   fmt("%zu/%zu within 1e-10, worst scaled gap %.2e", ok, total, worst)};
  });

  run("7", "collinearity identity on 1000 columns and the hand instance", 0.0, [] {
    std::size_t ok = 0;
    double worst = 0.0;
    for_each_column(1000, 7, [&](const ColumnCase& c, std::size_t i, const ReducedSupport& reduced) {
      const IdentityCheck r = verify_collinearity_identity(c.matrix, c.bias, c.signal.support[i], reduced);
      worst = std::max(worst, r.gap);
      ok += r.gap < 1e-9;
    });
    ReducedSupport all{0, {0, 1, 2}};
    const IdentityCheck h = verify_collinearity_identity(
        fixtures::single_column({1.0, 1.0, 1.0}), fixtures::bias_of({0.0, 1.0, Complex(0.0, 1.0)}), 0, all);
    const bool hand = std::abs(h.lhs - 0.5) <= 1e-12 && std::abs(h.rhs - 0.5) <= 1e-12;
    return Outcome{ok == 1000 && hand, fmt("%zu/1000 below 1e-9 (worst %.2e); hand lhs=%.15f rhs=%.15f",
                                           ok, worst, h.lhs, h.rhs)};
  });

  run("8", "per-column factor lower bound and its equality case", 0.0, [] {
    const SparsityPattern pattern = devore_pattern(23, 3, 2000);
    std::size_t ok = 0, columns = 0;
    for (std::uint64_t inst = 0; inst < 1000; ++inst) {
      const double phi_c = 0.5 + 0.25 * static_cast<double>(inst % 7);
      const double b_c = 0.4 + 0.3 * static_cast<double>(inst % 5);
      const auto matrix = randomize_entries(pattern, phi_c, inst);
      const auto bias = random_bias(529, b_c, inst);
      const SparseSignal s = generate_signal(2000, 5, ComplexGaussian{}, inst);
      const BoundReport rep = error_bound(matrix, bias, s.support, 0.1);
      bool all = true;
      for (const auto& [n, f] : rep.per_column_factor) {
        all &= f >= rep.lower_bound;
        ++columns;
      }
      ok += all;
    }
    CounterRng rng(8);
    double eq_gap = 0.0;
    for (std::size_t L : {3u, 5u, 8u, 13u, 43u}) {
      std::vector<Complex> phi(L), b(L);
      for (std::size_t m = 0; m < L; ++m) {
        phi[m] = std::polar(1.3, rng.phase());
        b[m] = phi[m] * std::polar(0.9, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(L));
      }
      const std::vector<Index> support{0};
      const BoundReport rep = error_bound(fixtures::single_column(phi), fixtures::bias_of(b), support, 0.1);
      eq_gap = std::max(eq_gap, std::abs(rep.per_column_factor.at(0) - rep.lower_bound));
    }
    return Outcome{ok == 1000 && eq_gap <= 1e-9,
                   fmt("%zu/1000 instances (%zu columns) hold; equality gap %.2e", ok, columns, eq_gap)};
  });

  run("9", "phase-ambiguous baseline: mean RE near 4/pi, AR-RE vanishes", 0.0, [] {
    double sum = 0.0, worst_ar = 0.0;
    for (std::uint64_t t = 0; t < 10000; ++t) {
      const std::uint64_t seed = CounterRng(9, Stream::kTrial, t)();
      const SparseSignal s = generate_signal(7500, 15, ComplexGaussian{}, seed);
      const Complex rot = std::polar(1.0, CounterRng(seed, Stream::kBaseline, 0).phase());
      std::vector<Complex> est(s.values);
      for (auto& z : est) z *= rot;
      sum += relative_error(est, s.values);
      worst_ar = std::max(worst_ar, ar_relative_error(est, s.values));
    }
    const double mean = sum / 10000.0;
    const double target = 4.0 / std::numbers::pi;
    return Outcome{std::abs(mean - target) <= 0.01 * target && worst_ar <= 1e-12,
                   fmt("mean RE %.4f vs %.4f, max AR-RE %.2e", mean, target, worst_ar)};
  });

  run("10", "closed-form AR-RE matches a 10^4-point phase grid", 0.0, [] {
    CounterRng rng(10);
    double worst = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
      const std::size_t len = 1 + rng.below(40);
      std::vector<Complex> s(len), e(len);
      for (auto& z : s) z = rng.complex_normal(2.0);
      for (auto& z : e) z = rng.complex_normal(2.0);
      double grid = std::numeric_limits<double>::infinity();
      for (int j = 0; j < 10000; ++j) {
        const Complex rot = std::polar(1.0, 2.0 * std::numbers::pi * j / 10000.0);
        std::vector<Complex> r(e);
        for (auto& z : r) z *= rot;
        grid = std::min(grid, relative_error(r, s));
      }
      worst = std::max(worst, std::abs(grid - ar_relative_error(e, s)));
    }
    return Outcome{worst <= 1e-6, fmt("worst difference %.2e over 100 pairs", worst)};
  });

  run("11", "95th percentile of the normalized factor shrinks with |C~|", 0.0, [] {
    const std::vector<std::size_t> sizes{8, 16, 32, 64};
    const auto trend = concentration_trend(1.0, sizes, 500, 0.0, 11);
    bool mono = true;
    std::string q;
    for (std::size_t i = 0; i < trend.size(); ++i) {
      if (i > 0) mono &= trend[i].quantile95 <= trend[i - 1].quantile95;
      q += fmt("%s%zu:%.3f", i ? " " : "", trend[i].size, trend[i].quantile95);
    }
    return Outcome{mono, "q95 " + q};
  });

  run("12", "bench records.csv identical across repeats and thread counts", 0.0, [] {
    auto strip_runtime = [](const std::vector<bench::TrialRecord>& recs) {
      std::ostringstream out;
      bench::write_records_csv(out, recs, true);
      std::istringstream in(out.str());
      std::string text, line;
      while (std::getline(in, line)) text += line.substr(0, line.rfind(',')) + '\n';
      return text;
    };
    std::size_t configs = 0, same = 0;
    for (Regime regime : {Regime::kNoiseFree, Regime::kSparse, Regime::kBounded}) {
      bench::ExperimentConfig c;
      c.sizes = {{11, 0}, {13, 180}};
      c.n = 500;
      c.k_values = {2, 4};
      c.regime = regime;
      c.kv_values = {3};
      c.eps_values = {1e-3};
      c.trials = 6;
      c.master_seed = 12;
      const std::string a = strip_runtime(bench::run_experiment(c, 1).records);
      const std::string b = strip_runtime(bench::run_experiment(c, 1).records);
      const std::string t8 = strip_runtime(bench::run_experiment(c, 8).records);
      ++configs;
      same += a == b && a == t8;
    }
    return Outcome{same == configs, fmt("%zu/%zu regimes byte-identical", same, configs)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
