// affine-pr: command-line front end for matrix generation, simulation,
// recovery, theory checks and benchmarks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "affine_pr/analysis.hpp"
#include "affine_pr/bench.hpp"
#include "affine_pr/io.hpp"
#include "affine_pr/model.hpp"
#include "affine_pr/recovery.hpp"
#include "affine_pr/rng.hpp"
#include "affine_pr/sensing.hpp"

namespace fs = std::filesystem;
using namespace affine_pr;

namespace {

struct GenMatrixArgs {
  std::uint64_t p = 0;
  std::size_t k = 2;
  std::size_t cols = 0;
  std::size_t pad_rows = 0;
  double phi_c = std::sqrt(2.0);
  std::uint64_t seed = 1;
  std::string out;
};

struct GenBiasArgs {
  std::size_t m = 0;
  double b_c = std::sqrt(2.0);
  std::uint64_t seed = 1;
  std::string out;
};

struct SimulateArgs {
  std::string matrix, bias, out, signal_out;
  std::size_t k = 1;
  std::string noise = "none";
  std::string dist = "gaussian";
  double variance = 2.0;
  double radius = 5.0;
  std::size_t kv = 0;
  double sigma_v = 1.0;
  double eps = 0.0;
  std::uint64_t seed = 1;
};

struct RecoverArgs {
  std::string y, matrix, bias, out;
  std::string regime = "noisefree";
  double eta = 0.0;
  double eps = 0.0;
  double tol = kMajorityTol;
  unsigned threads = 1;
};

struct VerifyArgs {
  std::string matrix, bias, support, out;
  std::vector<std::string> checks{"identity", "bound", "lemma51", "concentration"};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double eps = 0.1;
  double rho = 1.0;
  double t = 0.0;
  std::optional<double> eta;
};

struct BenchArgs {
  std::string config, out_dir, out;
  unsigned threads = 1;
};

int gen_matrix(const GenMatrixArgs& a) {
  SparsityPattern pattern = devore_pattern(a.p, a.k, a.cols);
  if (a.pad_rows > 0) pattern = zero_pad_rows(pattern, a.pad_rows);
  io::save_matrix(a.out, randomize_entries(pattern, a.phi_c, a.seed));
  std::cerr << "wrote " << pattern.num_rows() << "x" << pattern.num_cols() << " matrix, nnz "
            << pattern.nnz() << "\n";
  return 0;
}

int gen_bias(const GenBiasArgs& a) {
  io::save_bias(a.out, random_bias(a.m, a.b_c, a.seed));
  return 0;
}

int simulate(const SimulateArgs& a) {
  const SparseSensingMatrix matrix = io::load_matrix(a.matrix);
  const BiasVector bias = io::load_bias(a.bias);
  SignalDistribution dist = ComplexGaussian{a.variance};
  if (a.dist == "circle") dist = CircleDistribution{a.radius};
  const SparseSignal signal = generate_signal(matrix.num_cols(), a.k, dist, a.seed);

  NoiseSpec spec = NoiseSpec::none();
  if (a.noise == "sparse") spec = NoiseSpec::sparse(a.kv, a.sigma_v);
  else if (a.noise == "bounded") spec = NoiseSpec::bounded(a.eps);
  const MeasurementVector y = apply_noise(measure(matrix, bias, signal), spec, a.seed);
  io::save_measurements(a.out, y.y);
  if (!a.signal_out.empty()) io::save_signal(a.signal_out, signal);
  return 0;
}

int recover_cmd(const RecoverArgs& a) {
  const SparseSensingMatrix matrix = io::load_matrix(a.matrix);
  const BiasVector bias = io::load_bias(a.bias);
  const std::vector<double> y = io::load_measurements(a.y);
  RecoveryOptions options;
  options.regime = parse_regime(a.regime);
  options.eta = a.eta;
  options.eps = a.eps;
  options.tol = a.tol;
  options.threads = a.threads;
  const RecoveryReport report = recover(y, matrix, bias, options);
  io::save_report(a.out, report);
  if (!report.all_ok()) {
    std::cerr << "warning: some entries could not be recovered; see [entries]\n";
  }
  return 0;
}

struct CsvRow {
  std::string check;
  std::string instance;
  double lhs, rhs, gap;
  bool pass;
};

std::string g17(double v) { return io::format_double(v); }

int verify_theory(const VerifyArgs& a) {
  const SparseSensingMatrix matrix = io::load_matrix(a.matrix);
  const BiasVector bias = io::load_bias(a.bias);
  const SparseSignal truth = io::load_signal(a.support);
  const std::vector<Index>& support = truth.support;
  std::vector<CsvRow> rows;

  for (const std::string& check : a.checks) {
    if (check == "identity") {
      for (Index n : support) {
        const ReducedSupport reduced = reduced_support(n, matrix.pattern(), support);
        if (reduced.size() < 3) continue;
        const IdentityCheck c = verify_collinearity_identity(matrix, bias, n, reduced);
        rows.push_back({check, std::to_string(n), c.lhs, c.rhs, c.gap, c.gap < 1e-9});
      }
    } else if (check == "lemma51") {
      const BoundReport report = error_bound(matrix, bias, support, a.eps);
      for (const auto& [n, factor] : report.per_column_factor) {
        const double lower = report.lower_bound;
        rows.push_back({check, std::to_string(n), factor, lower, factor - lower,
                        factor >= lower * (1.0 - 1e-12)});
      }
    } else if (check == "bound") {
      const BoundReport report = error_bound(matrix, bias, support, a.eps);
      const std::size_t d = matrix.pattern().max_weight();
      std::size_t r = 0;
      const auto uff = verify_uff(matrix.pattern(), d, d);
      r = uff.worst_overlap;
      double eta = static_cast<double>(d) - 1.0;
      if (a.eta) {
        eta = *a.eta;
      } else if (const EtaRange range = eta_range(support.size(), d, r, 0, Regime::kBounded);
                 range.feasible) {
        eta = range.midpoint();
      }
      const MeasurementVector clean = measure(matrix, bias, truth);
      for (std::size_t trial = 0; trial < a.trials; ++trial) {
        const std::uint64_t seed = CounterRng(a.seed, Stream::kTrial, trial)();
        const MeasurementVector y = apply_noise(clean, NoiseSpec::bounded(a.eps), seed);
        RecoveryOptions options;
        options.regime = Regime::kBounded;
        options.eta = eta;
        options.eps = a.eps;
        const RecoveryReport rec = recover(y.y, matrix, bias, options);
        const bool exact = rec.support.indices == support;
        const double err = relative_error(rec.estimate, truth) * truth.norm();
        rows.push_back({check, std::to_string(trial), err, report.bound_value,
                        report.bound_value - err, exact && err < report.bound_value});
      }
    } else if (check == "concentration") {
      const std::vector<std::size_t> sizes{8, 16, 32, 64};
      const auto trend = concentration_trend(a.rho, sizes, a.trials, a.t, a.seed);
      double previous = std::numeric_limits<double>::infinity();
      for (const ConcentrationPoint& pt : trend) {
        rows.push_back({check, std::to_string(pt.size), pt.quantile95, previous,
                        previous - pt.quantile95, pt.quantile95 <= previous});
        previous = pt.quantile95;
      }
    } else {
      throw std::invalid_argument("unknown check: " + check);
    }
  }

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot open " + a.out);
  out << "check_name,instance_id,lhs,rhs,gap,pass\n";
  std::size_t failures = 0;
  for (const CsvRow& r : rows) {
    out << r.check << ',' << r.instance << ',' << g17(r.lhs) << ',' << g17(r.rhs) << ','
        << g17(r.gap) << ',' << (r.pass ? 1 : 0) << '\n';
    failures += r.pass ? 0 : 1;
  }
  std::cerr << rows.size() << " checks, " << failures << " failed\n";
  return failures == 0 ? 0 : 2;
}

int bench_cmd(const BenchArgs& a) {
  const bench::ExperimentConfig config = bench::load_config(a.config);
  const bench::ExperimentResult result = bench::run_experiment(config, a.threads);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  fs::create_directories(a.out_dir);
  {
    std::ofstream out(fs::path(a.out_dir) / "records.csv");
    bench::write_records_csv(out, result.records);
  }
  {
    std::ofstream out(fs::path(a.out_dir) / "summary.csv");
    bench::write_summary_csv(out, result.summary);
  }
  {
    std::ofstream out(fs::path(a.out_dir) / "config.echo.json");
    out << bench::to_json(config);
  }
  for (const bench::SummaryRow& s : result.summary) {
    std::fprintf(stderr, "M=%zu K=%zu kv=%zu eps=%.4g: RE %.3e  AR-RE %.3e  success %.3f\n",
                 s.point.m, s.point.k, s.point.kv, s.point.eps, s.mean_re, s.mean_ar_re,
                 s.success_rate);
  }
  return 0;
}

int phase_grid_cmd(const BenchArgs& a) {
  const bench::ExperimentConfig config = bench::load_config(a.config);
  const auto cells = bench::phase_transition_grid(config, a.threads);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot open " + a.out);
  bench::write_grid_csv(out, cells);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse phase retrieval from affine magnitude-squared measurements"};
  app.require_subcommand(1);

  GenMatrixArgs gm;
  auto* c_gm = app.add_subcommand("gen-matrix", "DeVore pattern with random unit-modulus phases");
  c_gm->add_option("--p", gm.p, "prime field size")->required();
  c_gm->add_option("--k", gm.k, "polynomial degree bound")->required();
  c_gm->add_option("--cols", gm.cols, "number of columns (<= p^k)")->required();
  c_gm->add_option("--pad-rows", gm.pad_rows, "zero-pad to this many rows");
  c_gm->add_option("--phi-c", gm.phi_c, "entry modulus");
  c_gm->add_option("--seed", gm.seed);
  c_gm->add_option("--out", gm.out)->required();

  GenBiasArgs gb;
  auto* c_gb = app.add_subcommand("gen-bias", "bias vector on a circle");
  c_gb->add_option("--m", gb.m, "length")->required();
  c_gb->add_option("--b-c", gb.b_c, "bias modulus");
  c_gb->add_option("--seed", gb.seed);
  c_gb->add_option("--out", gb.out)->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "draw a signal and its measurements");
  c_sim->add_option("--matrix", sim.matrix)->required();
  c_sim->add_option("--bias", sim.bias)->required();
  c_sim->add_option("--k", sim.k, "sparsity")->required();
  c_sim->add_option("--noise", sim.noise)->check(CLI::IsMember({"none", "sparse", "bounded"}));
  c_sim->add_option("--kv", sim.kv, "outlier count (sparse)");
  c_sim->add_option("--sigma-v", sim.sigma_v, "outlier std deviation (sparse)");
  c_sim->add_option("--eps", sim.eps, "noise bound (bounded)");
  c_sim->add_option("--dist", sim.dist)->check(CLI::IsMember({"gaussian", "circle"}));
  c_sim->add_option("--variance", sim.variance, "gaussian E|s_n|^2");
  c_sim->add_option("--radius", sim.radius, "circle radius");
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--out", sim.out, "measurement file")->required();
  c_sim->add_option("--signal-out", sim.signal_out, "also write the true signal");

  RecoverArgs rec;
  auto* c_rec = app.add_subcommand("recover", "two-stage recovery");
  c_rec->add_option("--y", rec.y)->required();
  c_rec->add_option("--matrix", rec.matrix)->required();
  c_rec->add_option("--bias", rec.bias)->required();
  c_rec->add_option("--regime", rec.regime)
      ->check(CLI::IsMember({"noisefree", "noise-free", "sparse", "bounded"}));
  c_rec->add_option("--eta", rec.eta)->required();
  c_rec->add_option("--eps", rec.eps, "noise bound, required for bounded");
  c_rec->add_option("--tol", rec.tol, "majority membership tolerance");
  c_rec->add_option("--threads", rec.threads);
  c_rec->add_option("--out", rec.out)->required();

  VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify-theory", "numerical checks of the error analysis");
  c_ver->add_option("--matrix", ver.matrix)->required();
  c_ver->add_option("--bias", ver.bias)->required();
  c_ver->add_option("--support", ver.support, "signal file carrying the true support")
      ->required();
  c_ver->add_option("--checks", ver.checks)
      ->check(CLI::IsMember({"identity", "bound", "lemma51", "concentration"}))
      ->delimiter(',');
  c_ver->add_option("--trials", ver.trials);
  c_ver->add_option("--seed", ver.seed);
  c_ver->add_option("--eps", ver.eps, "noise bound for the bound checks");
  c_ver->add_option("--eta", ver.eta, "support threshold for the bound check");
  c_ver->add_option("--rho", ver.rho, "b_c / phi_c for the concentration check");
  c_ver->add_option("--t", ver.t, "deviation parameter for the concentration check");
  c_ver->add_option("--out", ver.out)->required();

  BenchArgs bn;
  auto* c_bn = app.add_subcommand("bench", "Monte-Carlo experiment from a JSON config");
  c_bn->add_option("--config", bn.config)->required();
  c_bn->add_option("--out-dir", bn.out_dir)->required();
  c_bn->add_option("--threads", bn.threads);

  BenchArgs pg;
  auto* c_pg = app.add_subcommand("phase-grid", "success-rate grid over sizes and K");
  c_pg->add_option("--config", pg.config)->required();
  c_pg->add_option("--out", pg.out)->required();
  c_pg->add_option("--threads", pg.threads);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gm->parsed()) return gen_matrix(gm);
    if (c_gb->parsed()) return gen_bias(gb);
    if (c_sim->parsed()) return simulate(sim);
    if (c_rec->parsed()) return recover_cmd(rec);
    if (c_ver->parsed()) return verify_theory(ver);
    if (c_bn->parsed()) return bench_cmd(bn);
    if (c_pg->parsed()) return phase_grid_cmd(pg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
