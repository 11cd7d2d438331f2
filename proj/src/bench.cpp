#include "affine_pr/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "affine_pr/analysis.hpp"
#include "affine_pr/parallel.hpp"
#include "affine_pr/rng.hpp"
#include "affine_pr/sensing.hpp"
#include "json.hpp"

namespace affine_pr::bench {

using nlohmann::json;

EtaPolicy parse_eta_policy(const std::string& text) {
  if (text == "theorem-midpoint") return EtaPolicy::kTheoremMidpoint;
  if (text == "auto") return EtaPolicy::kAuto;
  if (text == "d-minus-1") return EtaPolicy::kDMinus1;
  if (text == "explicit") return EtaPolicy::kExplicit;
  throw std::invalid_argument("unknown eta policy: " + text);
}

std::string to_string(EtaPolicy policy) {
  switch (policy) {
    case EtaPolicy::kTheoremMidpoint: return "theorem-midpoint";
    case EtaPolicy::kAuto: return "auto";
    case EtaPolicy::kDMinus1: return "d-minus-1";
    case EtaPolicy::kExplicit: return "explicit";
  }
  return "auto";
}

namespace {

// p^k, saturating.
std::size_t power_saturating(std::uint64_t p, std::size_t k) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (out > std::numeric_limits<std::size_t>::max() / p) {
      return std::numeric_limits<std::size_t>::max();
    }
    out *= p;
  }
  return out;
}

template <typename T>
std::vector<T> scalar_or_list(const json& node) {
  if (node.is_array()) return node.get<std::vector<T>>();
  return {node.get<T>()};
}

double sample_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return std::sqrt(sum / static_cast<double>(v.size() - 1));
}

std::string fmt17(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (sizes.empty()) throw std::invalid_argument("config: matrix.sizes is empty");
  if (k_values.empty()) throw std::invalid_argument("config: signal.k is empty");
  if (trials == 0) throw std::invalid_argument("config: trials must be at least 1");
  if (degree_bound == 0) throw std::invalid_argument("config: matrix.k must be at least 1");
  if (!(phi_c > 0.0) || !(b_c > 0.0)) {
    throw std::invalid_argument("config: phi_c and b_c must be positive");
  }
  for (const MatrixSize& s : sizes) {
    if (!is_prime(s.p)) throw std::invalid_argument("config: p must be prime");
    if (s.pad_rows != 0 && s.pad_rows < s.p * s.p) {
      throw std::invalid_argument("config: pad_rows " + std::to_string(s.pad_rows) +
                                  " is below p^2 = " + std::to_string(s.p * s.p));
    }
    if (n > power_saturating(s.p, degree_bound)) {
      throw std::invalid_argument("config: N exceeds p^k for p = " + std::to_string(s.p));
    }
  }
  for (std::size_t k : k_values) {
    if (k == 0 || k > n) throw std::invalid_argument("config: each K must lie in [1, N]");
  }
  switch (regime) {
    case Regime::kNoiseFree:
      break;
    case Regime::kSparse:
      if (kv_values.empty() || sigma_ratio_db.empty()) {
        throw std::invalid_argument("config: sparse regime needs kv and sigma_ratio_db");
      }
      break;
    case Regime::kBounded:
      if (eps_values.empty() && snr_db.empty()) {
        throw std::invalid_argument("config: bounded regime needs eps or snr_db");
      }
      for (double e : eps_values) {
        if (!(e > 0.0)) throw std::invalid_argument("config: eps must be positive");
      }
      break;
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  const json doc = json::parse(json_text);
  ExperimentConfig c;
  c.name = doc.value("name", c.name);
  if (doc.contains("matrix")) {
    const json& m = doc["matrix"];
    c.degree_bound = m.value("k", c.degree_bound);
    c.phi_c = m.value("phi_c", c.phi_c);
    for (const json& s : m.value("sizes", json::array())) {
      c.sizes.push_back({s.at("p").get<std::uint64_t>(), s.value("pad_rows", std::size_t{0})});
    }
  }
  if (doc.contains("signal")) {
    const json& s = doc["signal"];
    c.n = s.value("n", c.n);
    if (s.contains("k")) c.k_values = scalar_or_list<std::size_t>(s["k"]);
    const std::string dist = s.value("distribution", std::string("gaussian"));
    if (dist == "gaussian") {
      c.distribution = ComplexGaussian{s.value("variance", ComplexGaussian{}.variance)};
    } else if (dist == "circle") {
      c.distribution = CircleDistribution{s.value("radius", CircleDistribution{}.radius)};
    } else {
      throw std::invalid_argument("config: unknown signal distribution " + dist);
    }
  }
  if (doc.contains("bias")) c.b_c = doc["bias"].value("b_c", c.b_c);
  if (doc.contains("noise")) {
    const json& v = doc["noise"];
    c.regime = parse_regime(v.value("regime", std::string("noisefree")));
    if (v.contains("kv")) c.kv_values = scalar_or_list<std::size_t>(v["kv"]);
    if (v.contains("sigma_ratio_db")) c.sigma_ratio_db = scalar_or_list<double>(v["sigma_ratio_db"]);
    if (v.contains("eps")) c.eps_values = scalar_or_list<double>(v["eps"]);
    if (v.contains("snr_db")) c.snr_db = scalar_or_list<double>(v["snr_db"]);
  }
  if (doc.contains("eta")) {
    const json& e = doc["eta"];
    c.eta_policy = parse_eta_policy(e.value("policy", std::string("auto")));
    c.eta_value = e.value("value", 0.0);
  }
  c.trials = doc.value("trials", c.trials);
  c.master_seed = doc.value("master_seed", c.master_seed);
  c.tol = doc.value("tol", c.tol);
  c.baseline = doc.value("baseline", c.baseline);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_json(const ExperimentConfig& c) {
  json doc;
  doc["name"] = c.name;
  json sizes = json::array();
  for (const MatrixSize& s : c.sizes) sizes.push_back({{"p", s.p}, {"pad_rows", s.pad_rows}});
  doc["matrix"] = {{"k", c.degree_bound}, {"phi_c", c.phi_c}, {"sizes", sizes}};
  json signal = {{"n", c.n}, {"k", c.k_values}};
  if (const auto* g = std::get_if<ComplexGaussian>(&c.distribution)) {
    signal["distribution"] = "gaussian";
    signal["variance"] = g->variance;
  } else {
    signal["distribution"] = "circle";
    signal["radius"] = std::get<CircleDistribution>(c.distribution).radius;
  }
  doc["signal"] = signal;
  doc["bias"] = {{"b_c", c.b_c}};
  doc["noise"] = {{"regime", std::string(affine_pr::to_string(c.regime))},
                  {"kv", c.kv_values},
                  {"sigma_ratio_db", c.sigma_ratio_db},
                  {"eps", c.eps_values},
                  {"snr_db", c.snr_db}};
  doc["eta"] = {{"policy", to_string(c.eta_policy)}, {"value", c.eta_value}};
  doc["trials"] = c.trials;
  doc["master_seed"] = c.master_seed;
  doc["tol"] = c.tol;
  doc["baseline"] = c.baseline;
  return doc.dump(2) + "\n";
}

double eps_for_snr(double snr_db, std::size_t k, std::size_t m, double entry_power) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return std::sqrt(3.0 * entry_power * static_cast<double>(k) / (static_cast<double>(m) * snr));
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config,
                                     std::vector<std::string>* warnings) {
  config.validate();
  const double power = entry_power(config.distribution);
  const std::size_t r = config.degree_bound - 1;
  std::vector<SweepPoint> points;

  auto choose_eta = [&](SweepPoint& pt) {
    const std::size_t d = pt.p;
    const EtaRange range = eta_range(pt.k, d, r, pt.kv, config.regime);
    switch (config.eta_policy) {
      case EtaPolicy::kExplicit:
        pt.eta = config.eta_value;
        return;
      case EtaPolicy::kDMinus1:
        pt.eta = static_cast<double>(d) - 1.0;
        return;
      case EtaPolicy::kTheoremMidpoint:
        if (!range.feasible) {
          throw std::invalid_argument("theorem-midpoint eta is infeasible for K = " +
                                      std::to_string(pt.k) + ", d = " + std::to_string(d));
        }
        pt.eta = range.midpoint();
        return;
      case EtaPolicy::kAuto:
        if (range.feasible) {
          pt.eta = range.midpoint();
        } else {
          pt.eta = static_cast<double>(d) - 1.0;
          if (warnings) {
            warnings->push_back("eta range infeasible for K = " + std::to_string(pt.k) +
                                ", d = " + std::to_string(d) + "; using d - 1");
          }
        }
        return;
    }
  };

  auto push = [&](SweepPoint pt) {
    pt.index = points.size();
    choose_eta(pt);
    points.push_back(pt);
  };

  for (const MatrixSize& size : config.sizes) {
    for (std::size_t k : config.k_values) {
      SweepPoint base;
      base.p = size.p;
      base.m = size.rows();
      base.k = k;
      switch (config.regime) {
        case Regime::kNoiseFree:
          push(base);
          break;
        case Regime::kSparse:
          for (std::size_t kv : config.kv_values) {
            for (double db : config.sigma_ratio_db) {
              SweepPoint pt = base;
              pt.kv = kv;
              pt.sigma_v = std::sqrt(power * std::pow(10.0, db / 10.0));
              push(pt);
            }
          }
          break;
        case Regime::kBounded:
          if (!config.eps_values.empty()) {
            for (double eps : config.eps_values) {
              SweepPoint pt = base;
              pt.eps = eps;
              push(pt);
            }
          } else {
            for (double db : config.snr_db) {
              SweepPoint pt = base;
              pt.eps = eps_for_snr(db, k, base.m, power);
              push(pt);
            }
          }
          break;
      }
    }
  }
  return points;
}

TrialRecord run_trial(const ExperimentConfig& config, const SweepPoint& point,
                      std::size_t trial_id, const SparsityPattern& pattern) {
  const auto start = std::chrono::steady_clock::now();
  CounterRng trial_rng(config.master_seed, Stream::kTrial, trial_id);
  const std::uint64_t seed = trial_rng();

  const SparseSensingMatrix matrix = randomize_entries(pattern, config.phi_c, seed);
  const BiasVector bias = random_bias(pattern.num_rows(), config.b_c, seed);
  const SparseSignal signal = generate_signal(config.n, point.k, config.distribution, seed);

  NoiseSpec noise = NoiseSpec::none();
  if (config.regime == Regime::kSparse && point.kv > 0) {
    noise = NoiseSpec::sparse(point.kv, point.sigma_v);
  } else if (config.regime == Regime::kBounded) {
    noise = NoiseSpec::bounded(point.eps);
  }
  const MeasurementVector y = apply_noise(measure(matrix, bias, signal), noise, seed);

  RecoveryOptions options;
  options.regime = config.regime;
  options.eta = point.eta;
  options.eps = point.eps;
  options.tol = config.tol;
  const RecoveryReport report = recover(y.y, matrix, bias, options);

  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.point = point.index;
  rec.p = point.p;
  rec.m = point.m;
  rec.k = point.k;
  rec.kv = point.kv;
  rec.sigma_v = point.sigma_v;
  rec.eps = point.eps;
  rec.eta = point.eta;
  rec.support_exact = report.support.indices == signal.support;
  for (const auto& e : report.per_entry) rec.failed_entries += e.ok() ? 0 : 1;
  rec.re = relative_error(report.estimate, signal);
  rec.ar_re = ar_relative_error(report.estimate, signal);
  if (config.regime == Regime::kBounded) {
    rec.bound_value = error_bound(matrix, bias, signal.support, point.eps).bound_value;
    rec.bound_ok = rec.support_exact && rec.re * signal.norm() < rec.bound_value;
  }
  if (config.baseline) {
    CounterRng baseline_rng(seed, Stream::kBaseline, 0);
    const Complex rotation = std::polar(1.0, baseline_rng.phase());
    std::vector<Complex> rotated(signal.values);
    for (Complex& v : rotated) v *= rotation;
    rec.baseline_re = relative_error(rotated, signal.values);
    rec.baseline_ar_re = ar_relative_error(rotated, signal.values);
  }
  rec.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<SummaryRow> summarize(const std::vector<SweepPoint>& points,
                                  const std::vector<TrialRecord>& records, Regime regime) {
  std::vector<SummaryRow> rows(points.size());
  std::vector<std::vector<double>> re(points.size()), ar(points.size()), base(points.size());
  std::vector<std::size_t> success(points.size()), exact(points.size()), bound_ok(points.size());
  for (const TrialRecord& r : records) {
    if (r.point >= points.size()) throw std::invalid_argument("record refers to unknown point");
    re[r.point].push_back(r.re);
    ar[r.point].push_back(r.ar_re);
    base[r.point].push_back(r.baseline_re);
    success[r.point] += r.success() ? 1 : 0;
    exact[r.point] += r.support_exact ? 1 : 0;
    bound_ok[r.point] += r.bound_ok ? 1 : 0;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    SummaryRow& row = rows[i];
    row.point = points[i];
    row.trials = re[i].size();
    if (row.trials == 0) continue;
    const double count = static_cast<double>(row.trials);
    row.mean_re = sample_mean(re[i]);
    row.std_re = sample_std(re[i], row.mean_re);
    row.mean_ar_re = sample_mean(ar[i]);
    row.std_ar_re = sample_std(ar[i], row.mean_ar_re);
    row.success_rate = static_cast<double>(success[i]) / count;
    row.support_exact_rate = static_cast<double>(exact[i]) / count;
    if (regime == Regime::kBounded && exact[i] > 0) {
      row.bound_ok_rate = static_cast<double>(bound_ok[i]) / static_cast<double>(exact[i]);
    }
    row.mean_baseline_re = sample_mean(base[i]);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  ExperimentResult result;
  result.points = expand_sweep(config, &result.warnings);

  std::map<std::uint64_t, SparsityPattern> patterns;
  for (const MatrixSize& size : config.sizes) {
    const std::uint64_t key = size.p * 1'000'003ULL + size.rows();
    if (!patterns.count(key)) {
      patterns.emplace(key, zero_pad_rows(devore_pattern(size.p, config.degree_bound, config.n),
                                          size.rows()));
    }
  }

  const std::size_t total = result.points.size() * config.trials;
  result.records.resize(total);
  parallel_for(total, threads, [&](std::size_t id) {
    const SweepPoint& point = result.points[id / config.trials];
    const SparsityPattern& pattern = patterns.at(point.p * 1'000'003ULL + point.m);
    result.records[id] = run_trial(config, point, id, pattern);
  });
  result.summary = summarize(result.points, result.records, config.regime);
  return result;
}

std::vector<GridCell> phase_transition_grid(const ExperimentConfig& config, unsigned threads) {
  if (config.sizes.empty() || config.k_values.empty()) {
    throw std::invalid_argument("phase_transition_grid: empty sweep");
  }
  const ExperimentResult result = run_experiment(config, threads);
  // Cells are (K, M); noise axes collapse into the first matching point.
  std::vector<GridCell> cells;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> where;
  std::vector<std::size_t> counts;
  for (const SummaryRow& row : result.summary) {
    const auto key = std::make_pair(row.point.k, row.point.m);
    auto [it, inserted] = where.emplace(key, cells.size());
    if (inserted) {
      cells.push_back({row.point.k, row.point.m, 0.0, 0.0});
      counts.push_back(0);
    }
    GridCell& cell = cells[it->second];
    cell.success_rate += row.success_rate * static_cast<double>(row.trials);
    cell.support_exact_rate += row.support_exact_rate * static_cast<double>(row.trials);
    counts[it->second] += row.trials;
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].success_rate /= static_cast<double>(counts[i]);
    cells[i].support_exact_rate /= static_cast<double>(counts[i]);
  }
  return cells;
}

namespace {

const char* const kRecordColumns[] = {
    "trial_id", "point",       "p",           "m",        "k",          "kv",
    "sigma_v",  "eps",         "eta",         "support_exact", "failed_entries", "re",
    "ar_re",    "bound_value", "bound_ok",    "baseline_re",   "baseline_ar_re", "runtime_seconds"};

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                       bool include_runtime) {
  const std::size_t columns = std::size(kRecordColumns) - (include_runtime ? 0 : 1);
  for (std::size_t c = 0; c < columns; ++c) out << (c ? "," : "") << kRecordColumns[c];
  out << '\n';
  for (const TrialRecord& r : records) {
    out << r.trial_id << ',' << r.point << ',' << r.p << ',' << r.m << ',' << r.k << ','
        << r.kv << ',' << fmt17(r.sigma_v) << ',' << fmt17(r.eps) << ',' << fmt17(r.eta) << ','
        << (r.support_exact ? 1 : 0) << ',' << r.failed_entries << ',' << fmt17(r.re) << ','
        << fmt17(r.ar_re) << ',' << fmt17(r.bound_value) << ',' << (r.bound_ok ? 1 : 0) << ','
        << fmt17(r.baseline_re) << ',' << fmt17(r.baseline_ar_re);
    if (include_runtime) out << ',' << fmt17(r.runtime_seconds);
    out << '\n';
  }
}

std::vector<TrialRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("records csv: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<TrialRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::map<std::string, std::string> row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= header.size()) throw std::runtime_error("records csv: extra field on line " +
                                                       std::to_string(line_no));
      row[header[c++]] = cell;
    }
    if (c != header.size()) {
      throw std::runtime_error("records csv: short row on line " + std::to_string(line_no));
    }
    auto u = [&](const char* key) -> std::size_t {
      auto it = row.find(key);
      return it == row.end() ? 0 : std::stoull(it->second);
    };
    auto d = [&](const char* key) -> double {
      auto it = row.find(key);
      return it == row.end() ? 0.0 : std::stod(it->second);
    };
    TrialRecord r;
    r.trial_id = u("trial_id");
    r.point = u("point");
    r.p = u("p");
    r.m = u("m");
    r.k = u("k");
    r.kv = u("kv");
    r.sigma_v = d("sigma_v");
    r.eps = d("eps");
    r.eta = d("eta");
    r.support_exact = u("support_exact") != 0;
    r.failed_entries = u("failed_entries");
    r.re = d("re");
    r.ar_re = d("ar_re");
    r.bound_value = d("bound_value");
    r.bound_ok = u("bound_ok") != 0;
    r.baseline_re = d("baseline_re");
    r.baseline_ar_re = d("baseline_ar_re");
    r.runtime_seconds = d("runtime_seconds");
    out.push_back(r);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "point,p,m,k,kv,sigma_v,eps,eta,trials,mean_re,std_re,mean_ar_re,std_ar_re,"
         "success_rate,support_exact_rate,bound_ok_rate,mean_baseline_re\n";
  for (const SummaryRow& s : rows) {
    const SweepPoint& p = s.point;
    out << p.index << ',' << p.p << ',' << p.m << ',' << p.k << ',' << p.kv << ','
        << fmt17(p.sigma_v) << ',' << fmt17(p.eps) << ',' << fmt17(p.eta) << ',' << s.trials
        << ',' << fmt17(s.mean_re) << ',' << fmt17(s.std_re) << ',' << fmt17(s.mean_ar_re) << ','
        << fmt17(s.std_ar_re) << ',' << fmt17(s.success_rate) << ','
        << fmt17(s.support_exact_rate) << ',' << fmt17(s.bound_ok_rate) << ','
        << fmt17(s.mean_baseline_re) << '\n';
  }
}

void write_grid_csv(std::ostream& out, const std::vector<GridCell>& cells) {
  out << "k,m,success_rate,support_exact_rate\n";
  for (const GridCell& c : cells) {
    out << c.k << ',' << c.m << ',' << fmt17(c.success_rate) << ','
        << fmt17(c.support_exact_rate) << '\n';
  }
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_records_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace affine_pr::bench
