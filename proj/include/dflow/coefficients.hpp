#pragma once

#include <optional>
#include <string>

#include "dflow/grid_calculus.hpp"

namespace dflow {

// U: zero, quadratic 1/2 <x-c, A(x-c)>, or a periodic gridded field.
struct Potential {
  enum class Kind { Zero, Quadratic, Gridded };
  Kind kind = Kind::Zero;
  SymMatrix A;
  Vec c;
  std::optional<ScalarField> field;

  static Potential zero() { return {}; }
  static Potential quadratic(const SymMatrix& A, const Vec& c);
  static Potential gridded(const ScalarField& f);

  ScalarField values(const Grid& g) const;
  VectorField grad(const Grid& g) const;
  SymField hess(const Grid& g) const;
  bool is_zero() const { return kind == Kind::Zero; }
};

// W: zero, concave quadratic -b|x|^2 (b >= 0), or a gridded periodic kernel.
struct Interaction {
  enum class Kind { Zero, Quadratic, Gridded };
  Kind kind = Kind::Zero;
  double b = 0.0;
  std::optional<ScalarField> kernel;

  static Interaction zero() { return {}; }
  static Interaction quadratic(double b);
  static Interaction gridded(const ScalarField& kernel);
  bool is_zero() const { return kind == Kind::Zero || (kind == Kind::Quadratic && b == 0.0); }
};

// f with f' and F, f = F + r F'.
struct Congestion {
  enum class Kind { Zero, Log, Linear, Power };
  Kind kind = Kind::Zero;
  double eps = 0.0;
  double p = 1.0;

  static Congestion zero() { return {}; }
  static Congestion log(double eps);
  static Congestion linear(double eps);
  static Congestion power(double eps, double p);

  double f(double r) const;
  double fprime(double r) const;
  double F(double r) const;
  bool is_zero() const { return kind == Kind::Zero || eps == 0.0; }
  std::string describe() const;
};

struct CoefficientSet {
  Potential U;
  Interaction W;
  Congestion f;
  double sigma = 0.0;

  bool entropic() const { return U.is_zero() && W.is_zero() && f.is_zero(); }
};

// W * rho.
ScalarField convolve(const Interaction& W, const Density& rho);
// (-hess W) * rho as a per-point matrix field.
SymField neg_hess_convolve(const Interaction& W, const Density& rho);
// First moment and second moment about the box centre.
Vec first_moment(const Density& rho);
double second_moment(const Density& rho);

}  // namespace dflow
