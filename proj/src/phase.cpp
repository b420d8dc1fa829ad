#include "dflow/phase.hpp"

#include <cmath>

#include "dflow/error.hpp"

namespace dflow {

Phase::Phase(const ScalarField& periodic) : smooth(periodic), quad(periodic.grid.dim), linear(periodic.grid.dim) {}

ScalarField Phase::values() const {
  const Grid& g = grid();
  ScalarField out = smooth;
  if (has_affine())
    for (std::size_t p = 0; p < g.size(); ++p) {
      Vec x = g.point(p);
      out[p] += 0.5 * quad.quad(x) + linear.dot(x);
    }
  for (const LogTerm& t : logs) {
    require_same_grid(t.positive.grid, g);
    for (std::size_t p = 0; p < g.size(); ++p) out[p] += t.coef * std::log(t.positive[p]);
  }
  return out;
}

VectorField Phase::grad() const {
  const Grid& g = grid();
  VectorField out = gradient(smooth);
  if (has_affine())
    for (std::size_t p = 0; p < g.size(); ++p) {
      Vec v = quad.apply(g.point(p)) + linear;
      for (int a = 0; a < g.dim; ++a) out.comp[a][p] += v[a];
    }
  for (const LogTerm& t : logs) {
    VectorField gp = gradient(t.positive);
    for (int a = 0; a < g.dim; ++a)
      for (std::size_t p = 0; p < g.size(); ++p) out.comp[a][p] += t.coef * gp.comp[a][p] / t.positive[p];
  }
  return out;
}

SymField Phase::hess() const {
  const Grid& g = grid();
  int n = g.dim;
  SymField out = hessian(smooth);
  if (quad.max_abs() > 0.0)
    for (int k = 0; k < sym_count(n); ++k)
      for (double& v : out.comp[k]) v += quad.packed(k);
  for (const LogTerm& t : logs) {
    VectorField gp = gradient(t.positive);
    SymField hp = hessian(t.positive);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        int k = sym_index(i, j, n);
        for (std::size_t p = 0; p < g.size(); ++p) {
          double r = t.positive[p];
          out.comp[k][p] += t.coef * (hp.comp[k][p] / r - gp.comp[i][p] * gp.comp[j][p] / (r * r));
        }
      }
  }
  return out;
}

Phase Phase::negated() const {
  Phase out = *this;
  for (double& v : out.smooth.values) v = -v;
  out.quad *= -1.0;
  out.linear = -1.0 * out.linear;
  for (LogTerm& t : out.logs) t.coef = -t.coef;
  return out;
}

void Phase::add_constant(double c) {
  for (double& v : smooth.values) v += c;
}

void Phase::gauge_fix(const Density& rho) {
  add_constant(-integrate_against(values(), rho));
}

}  // namespace dflow
