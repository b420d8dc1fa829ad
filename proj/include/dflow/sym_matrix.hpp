#pragma once

#include <array>
#include <cmath>
#include <string>

namespace dflow {

// Small dense vector of length dim <= 3.
struct Vec {
  int dim = 1;
  std::array<double, 3> v{0.0, 0.0, 0.0};

  Vec() = default;
  explicit Vec(int n) : dim(n) {}
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  static Vec unit(int n, int axis);
  double dot(const Vec& o) const;
  double norm() const { return std::sqrt(dot(*this)); }
  Vec normalized() const;
};

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);

inline int sym_count(int n) { return n * (n + 1) / 2; }

// Packed position of entry (i,j) in the row-major upper triangle.
inline int sym_index(int i, int j, int n) {
  if (i > j) {
    int t = i;
    i = j;
    j = t;
  }
  return i * n - i * (i - 1) / 2 + (j - i);
}

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : dim_(n) {}

  static SymMatrix identity(int n);
  static SymMatrix diagonal(const Vec& d);
  static SymMatrix outer(const Vec& a);
  // (a b^T + b a^T) / 2
  static SymMatrix sym_outer(const Vec& a, const Vec& b);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return e_[sym_index(i, j, dim_)]; }
  double& at(int i, int j) { return e_[sym_index(i, j, dim_)]; }
  double packed(int k) const { return e_[k]; }
  double& packed(int k) { return e_[k]; }

  double trace() const;
  double quad(const Vec& w) const;
  Vec apply(const Vec& w) const;
  SymMatrix square() const;
  // Symmetrized product (AB + BA) / 2.
  SymMatrix sym_product(const SymMatrix& b) const;
  double max_abs() const;
  bool finite() const;
  std::string str() const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);

 private:
  int dim_ = 1;
  std::array<double, 6> e_{0, 0, 0, 0, 0, 0};
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);
double max_abs_diff(const SymMatrix& a, const SymMatrix& b);

}  // namespace dflow
