#pragma once

#include <complex>
#include <vector>

#include "affine_pr/model.hpp"
#include "affine_pr/sensing.hpp"

namespace fixtures {

using affine_pr::BiasVector;
using affine_pr::Complex;
using affine_pr::Index;
using affine_pr::SparseSensingMatrix;
using affine_pr::SparsityPattern;

// One column supported on every row, with the given entries.
inline SparseSensingMatrix single_column(std::vector<Complex> phi) {
  std::vector<Index> rows(phi.size());
  for (Index m = 0; m < rows.size(); ++m) rows[m] = m;
  SparsityPattern pattern(rows.size(), {rows});
  return SparseSensingMatrix(std::move(pattern), {std::move(phi)});
}

inline BiasVector bias_of(std::vector<Complex> b) { return BiasVector{std::move(b), {}}; }

// phi = 1 on rows 0..2, b = (1, i, -1); s = 2 gives y = (9, 5, 1).
struct HandInstance {
  SparseSensingMatrix matrix = single_column({1.0, 1.0, 1.0});
  BiasVector bias = bias_of({1.0, Complex(0.0, 1.0), -1.0});
  std::vector<double> y{9.0, 5.0, 1.0};
};

}  // namespace fixtures
