#include <cmath>
#include <sstream>

#include "affine_pr/bench.hpp"
#include "doctest.h"

using namespace affine_pr;
using namespace affine_pr::bench;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.name = "small";
  c.sizes = {{11, 0}, {13, 200}};
  c.n = 400;
  c.k_values = {2, 4};
  c.trials = 3;
  c.master_seed = 9;
  return c;
}

std::string records_text(const ExperimentResult& r) {
  std::ostringstream out;
  write_records_csv(out, r.records, false);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const char* text = R"({
    "name": "demo",
    "matrix": {"k": 3, "phi_c": 1.5, "sizes": [{"p": 7}, {"p": 11, "pad_rows": 130}]},
    "signal": {"n": 300, "k": [1, 3], "distribution": "circle", "radius": 2},
    "bias": {"b_c": 0.5},
    "noise": {"regime": "bounded", "eps": [0.01, 0.1]},
    "eta": {"policy": "explicit", "value": 4.5},
    "trials": 7,
    "master_seed": 42
  })";
  const ExperimentConfig c = parse_config(text);
  CHECK(c.name == "demo");
  CHECK(c.phi_c == 1.5);
  REQUIRE(c.sizes.size() == 2);
  CHECK(c.sizes[1].rows() == 130);
  CHECK(c.sizes[0].rows() == 49);
  CHECK(c.k_values == std::vector<std::size_t>{1, 3});
  CHECK(std::get<CircleDistribution>(c.distribution).radius == 2.0);
  CHECK(c.regime == Regime::kBounded);
  CHECK(c.eta_policy == EtaPolicy::kExplicit);
  CHECK(c.trials == 7);

  // to_json round trips.
  const ExperimentConfig again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));

  const auto points = expand_sweep(c);
  REQUIRE(points.size() == 8);
  CHECK(points[1].eps == 0.1);
  CHECK(points[2].k == 3);
  CHECK(points[4].m == 130);
  for (const auto& p : points) CHECK(p.eta == 4.5);

  CHECK_THROWS_AS(parse_config(R"({"signal": {"k": 2}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"matrix": {"sizes": [{"p": 9}]}, "signal": {"n": 10, "k": 2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"matrix": {"sizes": [{"p": 7, "pad_rows": 40}]}, "signal": {"n": 10, "k": 2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"matrix": {"sizes": [{"p": 3}]}, "signal": {"n": 30, "k": 2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"matrix": {"sizes": [{"p": 7}]}, "signal": {"n": 10, "k": 2}, "trials": 0})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"matrix": {"sizes": [{"p": 7}]}, "signal": {"n": 10, "k": 2},
                                   "noise": {"regime": "bounded"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"matrix": {"sizes": [{"p": 7}]}, "signal": {"n": 10, "k": 2},
                                   "eta": {"policy": "median"}})"),
                  std::invalid_argument);
  CHECK_THROWS(parse_config("{not json"));
}

TEST_CASE("eta policies") {
  ExperimentConfig c = small_config();
  c.sizes = {{23, 0}};
  c.n = 2000;
  c.k_values = {5, 20};
  c.eta_policy = EtaPolicy::kAuto;
  std::vector<std::string> warnings;
  const auto pts = expand_sweep(c, &warnings);
  CHECK(pts[0].eta == doctest::Approx(11.5));  // [10, 13)
  CHECK(pts[1].eta == 22.0);
  CHECK(warnings.size() == 1);
  c.eta_policy = EtaPolicy::kTheoremMidpoint;
  CHECK_THROWS_AS(expand_sweep(c), std::invalid_argument);
  c.eta_policy = EtaPolicy::kDMinus1;
  for (const auto& p : expand_sweep(c)) CHECK(p.eta == 22.0);
  CHECK(parse_eta_policy(to_string(EtaPolicy::kTheoremMidpoint)) == EtaPolicy::kTheoremMidpoint);
}

TEST_CASE("sparse and SNR sweeps") {
  ExperimentConfig c = small_config();
  c.regime = Regime::kSparse;
  c.kv_values = {0, 5};
  c.sigma_ratio_db = {15.0};
  const auto pts = expand_sweep(c);
  REQUIRE(pts.size() == 8);
  CHECK(pts[1].kv == 5);
  CHECK(pts[1].sigma_v == doctest::Approx(std::sqrt(2.0 * std::pow(10.0, 1.5))));

  // SNR definition: E||s||^2 / E||v||^2 with v uniform on (-eps, eps).
  const double eps = eps_for_snr(30.0, 11, 1875, 25.0);
  CHECK(25.0 * 11 / (1875 * eps * eps / 3.0) == doctest::Approx(1000.0));
  CHECK(eps_for_snr(20.0, 11, 1875, 25.0) == doctest::Approx(std::sqrt(75.0 * 11 / (1875 * 100.0))));
}

TEST_CASE("experiments are deterministic across thread counts") {
  const ExperimentConfig c = small_config();
  const ExperimentResult a = run_experiment(c, 1);
  const ExperimentResult b = run_experiment(c, 8);
  const ExperimentResult again = run_experiment(c, 1);
  REQUIRE(a.records.size() == 12);
  CHECK(records_text(a) == records_text(b));
  CHECK(records_text(a) == records_text(again));
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].trial_id == i);

  ExperimentConfig other = c;
  other.master_seed = 10;
  CHECK(records_text(run_experiment(other, 1)) != records_text(a));
}

TEST_CASE("noise-free small sweep recovers exactly") {
  const ExperimentResult r = run_experiment(small_config(), 1);
  for (const auto& rec : r.records) {
    CHECK(rec.support_exact);
    CHECK(rec.re < 1e-8);
    CHECK(rec.success());
    CHECK(rec.baseline_ar_re < 1e-12);
  }
  for (const auto& row : r.summary) {
    CHECK(row.trials == 3);
    CHECK(row.success_rate == 1.0);
  }
}

TEST_CASE("records csv round trip and summary recompute") {
  ExperimentConfig c = small_config();
  c.regime = Regime::kBounded;
  c.eps_values = {1e-3};
  c.distribution = CircleDistribution{5.0};
  const ExperimentResult r = run_experiment(c, 1);
  for (const auto& rec : r.records) {
    CHECK(rec.bound_value > 0.0);
    CHECK(rec.bound_ok == (rec.support_exact && rec.re * 5.0 * std::sqrt(double(rec.k)) < rec.bound_value));
  }

  std::ostringstream out;
  write_records_csv(out, r.records, true);
  std::istringstream in(out.str());
  const auto back = read_records_csv(in);
  REQUIRE(back.size() == r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].re == r.records[i].re);
    CHECK(back[i].ar_re == r.records[i].ar_re);
    CHECK(back[i].bound_value == r.records[i].bound_value);
    CHECK(back[i].runtime_seconds == r.records[i].runtime_seconds);
    CHECK(back[i].support_exact == r.records[i].support_exact);
  }
  std::ostringstream again;
  write_records_csv(again, back, true);
  CHECK(again.str() == out.str());

  std::ostringstream s1, s2;
  write_summary_csv(s1, r.summary);
  write_summary_csv(s2, summarize(r.points, back, c.regime));
  CHECK(s1.str() == s2.str());

  // header plus one line per record
  std::vector<TrialRecord> three(r.records.begin(), r.records.begin() + 3);
  std::ostringstream o3;
  write_records_csv(o3, three);
  std::size_t lines = 0;
  for (char ch : o3.str()) lines += ch == '\n';
  CHECK(lines == 4);
  CHECK(o3.str().rfind("trial_id,point,p,m,k,kv,sigma_v,eps,eta,support_exact,failed_entries,re,ar_re,"
                       "bound_value,bound_ok,baseline_re,baseline_ar_re,runtime_seconds\n",
                       0) == 0);

  std::istringstream bad("trial_id,point\n1,2,3\n");
  CHECK_THROWS_AS(read_records_csv(bad), std::runtime_error);
}

TEST_CASE("summary statistics") {
  std::vector<SweepPoint> pts(1);
  std::vector<TrialRecord> recs(4);
  const double res[] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    recs[i].re = res[i];
    recs[i].ar_re = i < 2 ? 0.0 : 1.0;
    recs[i].support_exact = i != 3;
    recs[i].bound_ok = i == 0;
  }
  const auto rows = summarize(pts, recs, Regime::kBounded);
  CHECK(rows[0].mean_re == 2.5);
  CHECK(rows[0].std_re == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(rows[0].success_rate == 0.5);
  CHECK(rows[0].support_exact_rate == 0.75);
  CHECK(rows[0].bound_ok_rate == doctest::Approx(1.0 / 3.0));
  recs[0].point = 3;
  CHECK_THROWS_AS(summarize(pts, recs, Regime::kBounded), std::invalid_argument);
}

TEST_CASE("phase transition grid") {
  ExperimentConfig c = small_config();
  c.k_values = {1, 2, 30};
  c.eta_policy = EtaPolicy::kDMinus1;
  const auto cells = phase_transition_grid(c, 1);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].k == 1);
  CHECK(cells[0].m == 121);
  CHECK(cells[3].m == 200);
  CHECK(cells[0].success_rate == 1.0);
  for (const auto& cell : cells) CHECK((cell.success_rate >= 0.0 && cell.success_rate <= 1.0));
  CHECK(cells[2].success_rate < 1.0);
  std::ostringstream out;
  write_grid_csv(out, cells);
  CHECK(out.str().rfind("k,m,success_rate,support_exact_rate\n", 0) == 0);

  ExperimentConfig empty = c;
  empty.k_values.clear();
  CHECK_THROWS_AS(phase_transition_grid(empty), std::invalid_argument);
  ExperimentConfig small_pad = c;
  small_pad.sizes = {{11, 100}};
  CHECK_THROWS_AS(phase_transition_grid(small_pad), std::invalid_argument);
}
