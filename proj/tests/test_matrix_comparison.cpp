#include <gtest/gtest.h>

#include <cmath>

#include "dflow/error.hpp"
#include "dflow/flows.hpp"
#include "dflow/matrix_comparison.hpp"
#include "oracles_support.hpp"

using namespace dflow;

namespace {

SymMatrix diag(std::initializer_list<double> d) {
  Vec v(static_cast<int>(d.size()));
  int i = 0;
  for (double x : d) v[i++] = x;
  return SymMatrix::diagonal(v);
}

// M(t) = M0 (I - t M0)^{-1} for diagonal M0.
MatrixOdePath riccati_path(const std::vector<double>& d0, double tau, int samples) {
  MatrixOdePath p;
  p.times = uniform_times(tau, samples);
  for (double t : p.times) {
    Vec v(static_cast<int>(d0.size()));
    for (std::size_t i = 0; i < d0.size(); ++i) v[static_cast<int>(i)] = oracle::riccati(d0[i], t);
    p.mats.push_back(SymMatrix::diagonal(v));
  }
  return p;
}

}  // namespace

TEST(MatrixComparison, EigenDecompositionReconstructs) {
  SymMatrix M(3);
  M.at(0, 0) = 2;
  M.at(0, 1) = 0.5;
  M.at(1, 1) = -1;
  M.at(1, 2) = 0.3;
  M.at(2, 2) = 0.7;
  M.at(0, 2) = -0.2;
  EigenDecomposition e = sym_eig(M);
  ASSERT_EQ(e.values.size(), 3u);
  EXPECT_GE(e.values[0], e.values[1]);
  EXPECT_GE(e.values[1], e.values[2]);
  SymMatrix R(3);
  for (int i = 0; i < 3; ++i) R += e.values[i] * SymMatrix::outer(e.vectors[i]);
  EXPECT_LT(max_abs_diff(R, M), 1e-12);
  EXPECT_NEAR(e.values[0] + e.values[1] + e.values[2], M.trace(), 1e-12);
}

TEST(MatrixComparison, InverseAndLogDet) {
  SymMatrix M(2);
  M.at(0, 0) = 2;
  M.at(0, 1) = 1;
  M.at(1, 1) = 3;
  SymMatrix inv = sym_inverse(M);
  EXPECT_NEAR(inv(0, 0), 3.0 / 5.0, 1e-14);
  EXPECT_NEAR(inv(0, 1), -1.0 / 5.0, 1e-14);
  EXPECT_NEAR(log_det(M), std::log(5.0), 1e-14);
  EXPECT_THROW(log_det(diag({1.0, -1.0})), Error);
}

TEST(MatrixComparison, ScalarBoundsMatchRiccati) {
  SymMatrix M0 = diag({0.5, -2.0});
  Bound r = riccati_lower_bound(M0, Vec::unit(2, 0), 1.0);
  EXPECT_FALSE(r.vacuous);
  EXPECT_NEAR(r.value, oracle::riccati(0.5, 1.0), 1e-15);
  Bound tr = trace_lower_bound(M0, 1.0);
  EXPECT_NEAR(tr.value, oracle::riccati(0.5, 1.0) + oracle::riccati(-2.0, 1.0), 1e-14);
  Bound lg = log_bound(M0, 1.0);
  EXPECT_NEAR(lg.value, -std::log(0.5) - std::log(3.0), 1e-14);
}

TEST(MatrixComparison, BoundsPastThePoleAreVacuous) {
  SymMatrix M0 = diag({2.0});
  Bound r = riccati_lower_bound(M0, Vec::unit(1, 0), 0.6);
  EXPECT_TRUE(r.vacuous);
  EXPECT_DOUBLE_EQ(r.offending, 2.0);
  EXPECT_TRUE(trace_lower_bound(M0, 0.5).vacuous);
  EXPECT_TRUE(log_bound(M0, 0.5).vacuous);
}

TEST(MatrixComparison, ExactRiccatiPathPasses) {
  CheckReport rep = check_matrix_ode(riccati_path({0.4, -1.0, -3.0}, 1.0, 65));
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.worst_margin, -rep.tolerance);
}

TEST(MatrixComparison, DecreasingPathFailsWithWitness) {
  MatrixOdePath p;
  p.times = uniform_times(1.0, 33);
  for (double t : p.times) p.mats.push_back(diag({-t, 0.0}));
  CheckReport rep = check_matrix_ode(p);
  EXPECT_FALSE(rep.pass);
  EXPECT_LT(rep.worst_margin, -0.9);
  EXPECT_FALSE(rep.witness.label.empty());
  ASSERT_EQ(rep.witness.direction.size(), 2u);
  EXPECT_NEAR(std::fabs(rep.witness.direction[0]), 1.0, 1e-12);
}

TEST(MatrixComparison, RemainderIsSubtracted) {
  // M = t Id solves M' = M^2 + (1 - t^2) Id
  MatrixOdePath p;
  p.times = uniform_times(0.9, 33);
  std::vector<SymMatrix> R;
  for (double t : p.times) {
    p.mats.push_back(t * SymMatrix::identity(2));
    R.push_back((1.0 - t * t) * SymMatrix::identity(2));
  }
  EXPECT_TRUE(check_matrix_ode(p).pass);
  p.remainders = R;
  EXPECT_TRUE(check_matrix_ode(p).pass);
  for (auto& r : *p.remainders) r *= 2.0;
  EXPECT_FALSE(check_matrix_ode(p).pass);
}

TEST(MatrixComparison, ConcavityOfExactPath) {
  MatrixOdePath p = riccati_path({0.3, -0.5}, 1.0, 129);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(concavity_profile(p, random_unit(2, 5, i)).pass);
  MatrixOdePath bad;
  bad.times = p.times;
  for (double t : bad.times) bad.mats.push_back(diag({-3.0 * t, -3.0 * t}));
  EXPECT_FALSE(concavity_profile(bad, Vec::unit(2, 0)).pass);
}

TEST(MatrixComparison, TooFewSamples) {
  MatrixOdePath p = riccati_path({0.1}, 1.0, 4);
  try {
    check_matrix_ode(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
}

TEST(MatrixComparison, ProbeDirectionsAreSeededUnitVectors) {
  SymMatrix M = diag({1.0, 2.0, 3.0});
  auto a = probe_directions(M, 4, 9), b = probe_directions(M, 4, 9), c = probe_directions(M, 4, 10);
  ASSERT_EQ(a.size(), 7u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].norm(), 1.0, 1e-14);
    for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(a[i][k], b[i][k]);
  }
  EXPECT_NE(a[5][0], c[5][0]);
}

TEST(MatrixComparison, TwoByTwoClosedForm) {
  SymMatrix M(2);
  M.at(0, 0) = 2;
  M.at(0, 1) = 1;
  M.at(1, 1) = 2;
  EigenDecomposition e = sym_eig(M);
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  EXPECT_NEAR(std::fabs(e.vectors[0][0]), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(e.vectors[0][0], e.vectors[0][1], 1e-14);
}
