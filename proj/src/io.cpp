#include "affine_pr/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace affine_pr::io {

namespace {

// Line reader that skips blank lines and '#' comments and tracks line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::istringstream& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      fields.clear();
      fields.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("line " + std::to_string(line_no_) + ": " + what);
  }

  template <typename... T>
  void expect(const char* what, T&... values) {
    std::istringstream fields;
    if (!next(fields)) fail(std::string("unexpected end of input, wanted ") + what);
    if (!(fields >> ... >> values)) fail(std::string("malformed ") + what);
    std::string extra;
    if (fields >> extra) fail(std::string("trailing data after ") + what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

template <typename Write>
void save(const std::string& path, Write&& write) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_matrix(std::ostream& out, const SparseSensingMatrix& matrix) {
  out << matrix.num_rows() << ' ' << matrix.num_cols() << ' ' << matrix.pattern().nnz() << '\n';
  for (std::size_t n = 0; n < matrix.num_cols(); ++n) {
    const auto rows = matrix.support(n);
    const auto vals = matrix.values(n);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      out << rows[j] << ' ' << n << ' ' << format_double(vals[j].real()) << ' '
          << format_double(vals[j].imag()) << '\n';
    }
  }
}

SparseSensingMatrix read_matrix(std::istream& in) {
  LineReader reader(in);
  std::size_t m = 0, n = 0, nnz = 0;
  reader.expect("matrix header", m, n, nnz);
  std::vector<std::map<Index, Complex>> cols(n);
  for (std::size_t e = 0; e < nnz; ++e) {
    std::size_t row = 0, col = 0;
    double re = 0.0, im = 0.0;
    reader.expect("matrix entry", row, col, re, im);
    if (row >= m || col >= n) reader.fail("matrix entry index out of range");
    if (!cols[col].emplace(static_cast<Index>(row), Complex(re, im)).second) {
      reader.fail("duplicate matrix entry");
    }
  }
  std::vector<std::vector<Index>> supports(n);
  std::vector<std::vector<Complex>> values(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (const auto& [row, v] : cols[c]) {
      supports[c].push_back(row);
      values[c].push_back(v);
    }
  }
  return SparseSensingMatrix(SparsityPattern(m, std::move(supports)), std::move(values));
}

void write_bias(std::ostream& out, const BiasVector& bias) {
  out << bias.size() << '\n';
  for (std::size_t m = 0; m < bias.size(); ++m) {
    out << m << ' ' << format_double(bias.entries[m].real()) << ' '
        << format_double(bias.entries[m].imag()) << '\n';
  }
}

BiasVector read_bias(std::istream& in) {
  LineReader reader(in);
  std::size_t m = 0;
  reader.expect("bias header", m);
  BiasVector bias;
  bias.entries.resize(m);
  std::vector<char> seen(m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t row = 0;
    double re = 0.0, im = 0.0;
    reader.expect("bias entry", row, re, im);
    if (row >= m) reader.fail("bias index out of range");
    if (seen[row]) reader.fail("duplicate bias entry");
    seen[row] = 1;
    bias.entries[row] = Complex(re, im);
  }
  return bias;
}

void write_signal(std::ostream& out, const SparseSignal& signal) {
  out << signal.length << ' ' << signal.sparsity() << '\n';
  for (std::size_t i = 0; i < signal.sparsity(); ++i) {
    out << signal.support[i] << ' ' << format_double(signal.values[i].real()) << ' '
        << format_double(signal.values[i].imag()) << '\n';
  }
}

SparseSignal read_signal(std::istream& in) {
  LineReader reader(in);
  std::size_t n = 0, k = 0;
  reader.expect("signal header", n, k);
  std::map<Index, Complex> entries;
  for (std::size_t e = 0; e < k; ++e) {
    std::size_t idx = 0;
    double re = 0.0, im = 0.0;
    reader.expect("signal entry", idx, re, im);
    if (idx >= n) reader.fail("signal index out of range");
    if (!entries.emplace(static_cast<Index>(idx), Complex(re, im)).second) {
      reader.fail("duplicate signal entry");
    }
  }
  SparseSignal signal;
  signal.length = n;
  for (const auto& [idx, v] : entries) {
    signal.support.push_back(idx);
    signal.values.push_back(v);
  }
  return signal;
}

void write_measurements(std::ostream& out, const std::vector<double>& y) {
  out << y.size() << '\n';
  for (std::size_t m = 0; m < y.size(); ++m) out << m << ' ' << format_double(y[m]) << '\n';
}

std::vector<double> read_measurements(std::istream& in) {
  LineReader reader(in);
  std::size_t m = 0;
  reader.expect("measurement header", m);
  std::vector<double> y(m);
  std::vector<char> seen(m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t row = 0;
    double value = 0.0;
    reader.expect("measurement entry", row, value);
    if (row >= m) reader.fail("measurement index out of range");
    if (seen[row]) reader.fail("duplicate measurement entry");
    seen[row] = 1;
    y[row] = value;
  }
  return y;
}

void write_report(std::ostream& out, const RecoveryReport& report) {
  std::size_t failed = 0;
  for (const auto& e : report.per_entry) failed += e.ok() ? 0 : 1;
  out << "regime = " << to_string(report.regime) << '\n'
      << "eta = " << format_double(report.eta) << '\n'
      << "eps = " << format_double(report.eps) << '\n'
      << "support_size = " << report.support.indices.size() << '\n'
      << "failed_entries = " << failed << '\n'
      << "[estimate]\n";
  write_signal(out, report.estimate);
  out << "[entries]\n"
      << "# column method reduced_size candidate_count votes residual error\n";
  for (std::size_t i = 0; i < report.per_entry.size(); ++i) {
    const EntryDiagnostics& e = report.per_entry[i];
    out << e.column << ' ' << to_string(e.method) << ' ' << e.reduced_size << ' '
        << e.candidate_count << ' ' << report.support.per_column_votes.at(e.column) << ' '
        << format_double(e.residual) << ' ' << (e.error.empty() ? "-" : e.error) << '\n';
  }
}

void save_matrix(const std::string& path, const SparseSensingMatrix& matrix) {
  save(path, [&](std::ostream& out) { write_matrix(out, matrix); });
}
SparseSensingMatrix load_matrix(const std::string& path) {
  auto in = open(path);
  return read_matrix(in);
}
void save_bias(const std::string& path, const BiasVector& bias) {
  save(path, [&](std::ostream& out) { write_bias(out, bias); });
}
BiasVector load_bias(const std::string& path) {
  auto in = open(path);
  return read_bias(in);
}
void save_signal(const std::string& path, const SparseSignal& signal) {
  save(path, [&](std::ostream& out) { write_signal(out, signal); });
}
SparseSignal load_signal(const std::string& path) {
  auto in = open(path);
  return read_signal(in);
}
void save_measurements(const std::string& path, const std::vector<double>& y) {
  save(path, [&](std::ostream& out) { write_measurements(out, y); });
}
std::vector<double> load_measurements(const std::string& path) {
  auto in = open(path);
  return read_measurements(in);
}
void save_report(const std::string& path, const RecoveryReport& report) {
  save(path, [&](std::ostream& out) { write_report(out, report); });
}

}  // namespace affine_pr::io
