#include "dflow/sym_matrix.hpp"

#include <algorithm>
#include <cstdio>

namespace dflow {

Vec Vec::unit(int n, int axis) {
  Vec w(n);
  w[axis] = 1.0;
  return w;
}

double Vec::dot(const Vec& o) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += v[i] * o.v[i];
  return s;
}

Vec Vec::normalized() const {
  double n = norm();
  Vec w(dim);
  for (int i = 0; i < dim; ++i) w[i] = v[i] / n;
  return w;
}

Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = a[i] + b[i];
  return r;
}

Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
  return r;
}

Vec operator*(double s, const Vec& a) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = s * a[i];
  return r;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  SymMatrix m(d.dim);
  for (int i = 0; i < d.dim; ++i) m.at(i, i) = d[i];
  return m;
}

SymMatrix SymMatrix::outer(const Vec& a) {
  SymMatrix m(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = i; j < a.dim; ++j) m.at(i, j) = a[i] * a[j];
  return m;
}

SymMatrix SymMatrix::sym_outer(const Vec& a, const Vec& b) {
  SymMatrix m(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = i; j < a.dim; ++j) m.at(i, j) = 0.5 * (a[i] * b[j] + a[j] * b[i]);
  return m;
}

double SymMatrix::trace() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
  return s;
}

double SymMatrix::quad(const Vec& w) const { return w.dot(apply(w)); }

Vec SymMatrix::apply(const Vec& w) const {
  Vec r(dim_);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * w[j];
    r[i] = s;
  }
  return r;
}

SymMatrix SymMatrix::square() const { return sym_product(*this); }

SymMatrix SymMatrix::sym_product(const SymMatrix& b) const {
  SymMatrix r(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += (*this)(i, k) * b(k, j) + b(i, k) * (*this)(k, j);
      r.at(i, j) = 0.5 * s;
    }
  return r;
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < sym_count(dim_); ++k) m = std::max(m, std::fabs(e_[k]));
  return m;
}

bool SymMatrix::finite() const {
  for (int k = 0; k < sym_count(dim_); ++k)
    if (!std::isfinite(e_[k])) return false;
  return true;
}

std::string SymMatrix::str() const {
  std::string s = "[";
  char buf[64];
  for (int i = 0; i < dim_; ++i) {
    s += (i ? ", [" : "[");
    for (int j = 0; j < dim_; ++j) {
      std::snprintf(buf, sizeof buf, "%s%.6g", j ? ", " : "", (*this)(i, j));
      s += buf;
    }
    s += "]";
  }
  return s + "]";
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  for (int k = 0; k < 6; ++k) e_[k] += o.e_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  for (int k = 0; k < 6; ++k) e_[k] -= o.e_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (int k = 0; k < 6; ++k) e_[k] *= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) { return (a - b).max_abs(); }

}  // namespace dflow
