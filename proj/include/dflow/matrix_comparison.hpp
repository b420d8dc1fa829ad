#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dflow/check_report.hpp"
#include "dflow/sym_matrix.hpp"

namespace dflow {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  std::vector<Vec> vectors;
};

EigenDecomposition sym_eig(const SymMatrix& M);
double min_eig(const SymMatrix& M);
double max_eig(const SymMatrix& M);
// Applies fn to the eigenvalues: sum fn(l_i) w_i w_i^T.
SymMatrix sym_apply(const SymMatrix& M, double (*fn)(double));
SymMatrix sym_inverse(const SymMatrix& M);
double log_det(const SymMatrix& M);

// A bound is vacuous once the Riccati comparison passes its pole.
struct Bound {
  double value = 0.0;
  bool vacuous = false;
  double offending = 0.0;  // eigenvalue or quadratic form that hit the pole
};

Bound riccati_lower_bound(const SymMatrix& M0, const Vec& w, double t);
Bound trace_lower_bound(const SymMatrix& M0, double t);
Bound log_bound(const SymMatrix& M0, double tau);

struct MatrixOdePath {
  std::vector<double> times;
  std::vector<SymMatrix> mats;
  std::optional<std::vector<SymMatrix>> remainders;
};

// tol <= 0 selects the automatic tolerance max(1e-6, finite-difference error estimate).
CheckReport check_matrix_ode(const MatrixOdePath& path, double tol = 0.0);
CheckReport concavity_profile(const MatrixOdePath& path, const Vec& w, double tol = 1e-6);

// Eigenbasis of M plus `extra` seeded random unit vectors.
std::vector<Vec> probe_directions(const SymMatrix& M, int extra, std::uint64_t seed);
Vec random_unit(int n, std::uint64_t seed, int index);

}  // namespace dflow
