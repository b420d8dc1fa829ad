#pragma once

#include <vector>

#include "dflow/sym_matrix.hpp"

namespace dflow {

struct FdSeries {
  std::vector<double> value;
  // |fourth-order - second-order| at each sample; bounds the truncation error.
  std::vector<double> error;
};

struct FdMatrixSeries {
  std::vector<SymMatrix> value;
  std::vector<double> error;  // max over entries
};

// Uniformly spaced samples; central stencils inside, one-sided at the ends.
FdSeries differentiate(const std::vector<double>& f, double dt);
FdMatrixSeries differentiate(const std::vector<SymMatrix>& f, double dt);
// Cumulative trapezoid starting at zero.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f);

}  // namespace dflow
