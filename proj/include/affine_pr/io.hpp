#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "affine_pr/model.hpp"
#include "affine_pr/recovery.hpp"
#include "affine_pr/sensing.hpp"

namespace affine_pr::io {

// Plain-text formats, 0-based indices, floats written with %.17g so values
// round-trip exactly.
//   matrix:      "M N nnz" then "m n re im" per stored entry
//   bias:        "M" then "m re im"
//   signal:      "N K" then "n re im"
//   measurement: "M" then "m y"
// Parse errors throw std::runtime_error naming the line.

void write_matrix(std::ostream& out, const SparseSensingMatrix& matrix);
SparseSensingMatrix read_matrix(std::istream& in);

void write_bias(std::ostream& out, const BiasVector& bias);
BiasVector read_bias(std::istream& in);

void write_signal(std::ostream& out, const SparseSignal& signal);
SparseSignal read_signal(std::istream& in);

void write_measurements(std::ostream& out, const std::vector<double>& y);
std::vector<double> read_measurements(std::istream& in);

/// key = value lines followed by an [estimate] block in the signal format and
/// an [entries] block with one line per recovered column.
void write_report(std::ostream& out, const RecoveryReport& report);

std::string format_double(double value);

// File helpers; throw std::runtime_error when the file cannot be opened.
void save_matrix(const std::string& path, const SparseSensingMatrix& matrix);
SparseSensingMatrix load_matrix(const std::string& path);
void save_bias(const std::string& path, const BiasVector& bias);
BiasVector load_bias(const std::string& path);
void save_signal(const std::string& path, const SparseSignal& signal);
SparseSignal load_signal(const std::string& path);
void save_measurements(const std::string& path, const std::vector<double>& y);
std::vector<double> load_measurements(const std::string& path);
void save_report(const std::string& path, const RecoveryReport& report);

}  // namespace affine_pr::io
