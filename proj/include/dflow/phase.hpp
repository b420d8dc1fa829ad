#pragma once

#include <vector>

#include "dflow/grid_calculus.hpp"

namespace dflow {

struct LogTerm {
  double coef = 0.0;
  ScalarField positive;
};

// theta(x) = smooth(x) + 1/2 <x, Q x> + <g, x> + sum_j c_j log P_j(x)
// smooth and P_j are periodic; the affine-quadratic part is evaluated in box
// coordinates and differentiated analytically.
struct Phase {
  ScalarField smooth;
  SymMatrix quad;
  Vec linear;
  std::vector<LogTerm> logs;

  Phase() = default;
  explicit Phase(const ScalarField& periodic);
  static Phase zero(const Grid& g) { return Phase(ScalarField(g)); }

  const Grid& grid() const { return smooth.grid; }
  bool has_affine() const { return quad.max_abs() > 0.0 || linear.norm() > 0.0; }
  ScalarField values() const;
  VectorField grad() const;
  SymField hess() const;
  Phase negated() const;
  void add_constant(double c);
  // Enforce integral theta drho = 0.
  void gauge_fix(const Density& rho);
};

}  // namespace dflow
