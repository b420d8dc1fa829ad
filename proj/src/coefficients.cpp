#include "dflow/coefficients.hpp"

#include <cmath>
#include <cstdio>

#include "dflow/error.hpp"

namespace dflow {

Potential Potential::quadratic(const SymMatrix& A, const Vec& c) {
  Potential u;
  u.kind = Kind::Quadratic;
  u.A = A;
  u.c = c;
  return u;
}

Potential Potential::gridded(const ScalarField& f) {
  Potential u;
  u.kind = Kind::Gridded;
  u.field = f;
  return u;
}

ScalarField Potential::values(const Grid& g) const {
  switch (kind) {
    case Kind::Zero: return ScalarField(g);
    case Kind::Quadratic:
      return ScalarField::from_function(g, [this](const Vec& x) {
        Vec d = x - c;
        return 0.5 * A.quad(d);
      });
    case Kind::Gridded:
      require_same_grid(field->grid, g);
      return *field;
  }
  return ScalarField(g);
}

VectorField Potential::grad(const Grid& g) const {
  switch (kind) {
    case Kind::Zero: return VectorField(g);
    case Kind::Quadratic: {
      VectorField out(g);
      for (std::size_t p = 0; p < g.size(); ++p) {
        Vec d = A.apply(g.point(p) - c);
        for (int a = 0; a < g.dim; ++a) out.comp[a][p] = d[a];
      }
      return out;
    }
    case Kind::Gridded:
      require_same_grid(field->grid, g);
      return gradient(*field);
  }
  return VectorField(g);
}

SymField Potential::hess(const Grid& g) const {
  switch (kind) {
    case Kind::Zero: return SymField(g);
    case Kind::Quadratic: {
      SymField out(g);
      for (std::size_t p = 0; p < g.size(); ++p) out.set(p, A);
      return out;
    }
    case Kind::Gridded:
      require_same_grid(field->grid, g);
      return hessian(*field);
  }
  return SymField(g);
}

Interaction Interaction::quadratic(double b) {
  if (b < 0.0) throw Error(ErrorKind::InvalidArgument, "interaction b must be >= 0 (W is concave)");
  Interaction w;
  w.kind = Kind::Quadratic;
  w.b = b;
  return w;
}

Interaction Interaction::gridded(const ScalarField& kernel) {
  Interaction w;
  w.kind = Kind::Gridded;
  w.kernel = kernel;
  return w;
}

Congestion Congestion::log(double eps) { return {Kind::Log, eps, 0.0}; }
Congestion Congestion::linear(double eps) { return {Kind::Linear, eps, 1.0}; }

Congestion Congestion::power(double eps, double p) {
  if (p == -1.0) throw Error(ErrorKind::InvalidArgument, "power congestion needs p != -1");
  return {Kind::Power, eps, p};
}

double Congestion::f(double r) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Log: return eps * std::log(r);
    case Kind::Linear: return eps * r;
    case Kind::Power: return eps * std::pow(r, p);
  }
  return 0.0;
}

double Congestion::fprime(double r) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Log: return eps / r;
    case Kind::Linear: return eps;
    case Kind::Power: return eps * p * std::pow(r, p - 1.0);
  }
  return 0.0;
}

double Congestion::F(double r) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Log: return eps * (std::log(r) - 1.0);
    case Kind::Linear: return 0.5 * eps * r;
    case Kind::Power: return eps * std::pow(r, p) / (p + 1.0);
  }
  return 0.0;
}

std::string Congestion::describe() const {
  char buf[96];
  switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Log: std::snprintf(buf, sizeof buf, "%.17g*log(r)", eps); return buf;
    case Kind::Linear: std::snprintf(buf, sizeof buf, "%.17g*r", eps); return buf;
    case Kind::Power: std::snprintf(buf, sizeof buf, "%.17g*r^%.17g", eps, p); return buf;
  }
  return "zero";
}

Vec first_moment(const Density& rho) {
  const Grid& g = rho.grid();
  Vec m(g.dim);
  for (std::size_t p = 0; p < rho.size(); ++p) {
    Vec x = g.point(p);
    for (int a = 0; a < g.dim; ++a) m[a] += x[a] * rho[p];
  }
  return g.cell_volume() * m;
}

double second_moment(const Density& rho) {
  const Grid& g = rho.grid();
  double s = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) s += g.point(p).dot(g.point(p)) * rho[p];
  return s * g.cell_volume();
}

ScalarField convolve(const Interaction& W, const Density& rho) {
  const Grid& g = rho.grid();
  switch (W.kind) {
    case Interaction::Kind::Zero: return ScalarField(g);
    case Interaction::Kind::Quadratic: {
      if (W.b < 0.0) throw Error(ErrorKind::InvalidArgument, "interaction b must be >= 0");
      Vec m1 = first_moment(rho);
      double m2 = second_moment(rho);
      double b = W.b;
      return ScalarField::from_function(
          g, [&](const Vec& x) { return -b * (x.dot(x) - 2.0 * x.dot(m1) + m2); });
    }
    case Interaction::Kind::Gridded: return circular_convolve(*W.kernel, rho.field());
  }
  return ScalarField(g);
}

SymField neg_hess_convolve(const Interaction& W, const Density& rho) {
  const Grid& g = rho.grid();
  SymField out(g);
  switch (W.kind) {
    case Interaction::Kind::Zero: break;
    case Interaction::Kind::Quadratic: {
      SymMatrix m = (2.0 * W.b) * SymMatrix::identity(g.dim);
      for (std::size_t p = 0; p < g.size(); ++p) out.set(p, m);
      break;
    }
    case Interaction::Kind::Gridded: {
      SymField h = hessian(*W.kernel);
      for (int k = 0; k < sym_count(g.dim); ++k) {
        ScalarField c = circular_convolve(ScalarField(g, h.comp[k]), rho.field());
        for (std::size_t p = 0; p < g.size(); ++p) out.comp[k][p] = -c[p];
      }
      break;
    }
  }
  return out;
}

}  // namespace dflow
