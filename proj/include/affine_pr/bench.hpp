#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "affine_pr/model.hpp"
#include "affine_pr/recovery.hpp"

namespace affine_pr::bench {

/// A DeVore size: p^2 rows zero-padded to pad_rows (0 means no padding).
struct MatrixSize {
  std::uint64_t p = 0;
  std::size_t pad_rows = 0;

  std::size_t rows() const noexcept { return pad_rows == 0 ? p * p : pad_rows; }
};

enum class EtaPolicy {
  kTheoremMidpoint,  // midpoint of the admissible interval, error if infeasible
  kAuto,             // midpoint when feasible, else d - 1 with a warning
  kDMinus1,
  kExplicit,
};

EtaPolicy parse_eta_policy(const std::string& text);
std::string to_string(EtaPolicy policy);

struct ExperimentConfig {
  std::string name = "experiment";
  // matrix
  std::size_t degree_bound = 3;  // DeVore k; overlap r = k - 1
  double phi_c = 1.4142135623730951;
  std::vector<MatrixSize> sizes;
  // signal
  std::size_t n = 7500;
  std::vector<std::size_t> k_values;
  SignalDistribution distribution = ComplexGaussian{};
  // bias
  double b_c = 1.4142135623730951;
  // noise
  Regime regime = Regime::kNoiseFree;
  std::vector<std::size_t> kv_values{0};
  std::vector<double> sigma_ratio_db{15.0};  // sigma_v^2 / sigma_s^2
  std::vector<double> eps_values;
  std::vector<double> snr_db;  // used when eps_values is empty
  // threshold
  EtaPolicy eta_policy = EtaPolicy::kAuto;
  double eta_value = 0.0;
  // run
  std::size_t trials = 1;
  std::uint64_t master_seed = 1;
  double tol = kMajorityTol;
  bool baseline = true;

  /// Throws std::invalid_argument on empty sweeps, trials == 0 or
  /// unrealizable sizes (pad_rows below p^2, non-prime p, N above p^k).
  void validate() const;
};

/// Parses the JSON layout written by to_json. Unknown keys are ignored.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string to_json(const ExperimentConfig& config);

/// One cell of the sweep.
struct SweepPoint {
  std::size_t index = 0;
  std::uint64_t p = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t kv = 0;
  double sigma_v = 0.0;
  double eps = 0.0;
  double eta = 0.0;
};

/// Expands the sweep in a fixed order: sizes, then K, then the regime's noise
/// axis. Warnings from the auto eta policy are appended to `warnings`.
std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config,
                                     std::vector<std::string>* warnings = nullptr);

/// sqrt(3 * P * K / (M * SNR)) with P = E|s_n|^2, so that
/// E||s||^2 / E||v||^2 = SNR for v uniform on (-eps, eps).
double eps_for_snr(double snr_db, std::size_t k, std::size_t m, double entry_power);

struct TrialRecord {
  std::size_t trial_id = 0;  // global, point-major
  std::size_t point = 0;
  std::uint64_t p = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t kv = 0;
  double sigma_v = 0.0;
  double eps = 0.0;
  double eta = 0.0;
  bool support_exact = false;
  std::size_t failed_entries = 0;
  double re = 0.0;
  double ar_re = 0.0;
  double bound_value = 0.0;  // bounded regime only, else 0
  bool bound_ok = false;     // support exact and ||s_hat - s|| < bound_value
  double baseline_re = 0.0;
  double baseline_ar_re = 0.0;
  double runtime_seconds = 0.0;

  bool success() const noexcept { return ar_re < kSuccessThreshold; }
  static constexpr double kSuccessThreshold = 1e-5;
};

struct SummaryRow {
  SweepPoint point;
  std::size_t trials = 0;
  double mean_re = 0.0;
  double std_re = 0.0;
  double mean_ar_re = 0.0;
  double std_ar_re = 0.0;
  double success_rate = 0.0;
  double support_exact_rate = 0.0;
  double bound_ok_rate = 0.0;  // among support-exact trials, bounded regime
  double mean_baseline_re = 0.0;
};

struct ExperimentResult {
  std::vector<SweepPoint> points;
  std::vector<TrialRecord> records;  // ordered by trial_id
  std::vector<SummaryRow> summary;
  std::vector<std::string> warnings;
};

/// Runs one trial of a sweep point. Every random draw comes from substreams of
/// (master_seed, trial_id).
TrialRecord run_trial(const ExperimentConfig& config, const SweepPoint& point,
                      std::size_t trial_id, const SparsityPattern& pattern);

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 1);

/// Mean and sample standard deviation per sweep point, in point order.
std::vector<SummaryRow> summarize(const std::vector<SweepPoint>& points,
                                  const std::vector<TrialRecord>& records, Regime regime);

struct GridCell {
  std::size_t k = 0;
  std::size_t m = 0;
  double success_rate = 0.0;
  double support_exact_rate = 0.0;
};

/// Success rate over the sizes x K sweep. Throws on an empty sweep.
std::vector<GridCell> phase_transition_grid(const ExperimentConfig& config, unsigned threads = 1);

// CSV with a header row and %.17g floats. runtime_seconds is the last column
// of the records file and the only nondeterministic one.
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                       bool include_runtime = true);
std::vector<TrialRecord> read_records_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_grid_csv(std::ostream& out, const std::vector<GridCell>& cells);

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);

}  // namespace affine_pr::bench
