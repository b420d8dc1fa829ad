#include "dflow/matrix_comparison.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dflow/error.hpp"
#include "dflow/time_series.hpp"

namespace dflow {

namespace {

void fix_sign(Vec& w) {
  for (int i = 0; i < w.dim; ++i) {
    if (std::fabs(w[i]) > 1e-14) {
      if (w[i] < 0) w = -1.0 * w;
      return;
    }
  }
}

EigenDecomposition jacobi3(const SymMatrix& M) {
  double a[3][3], v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = M(i, j);
  double scale = std::max(M.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::fabs(a[0][1]) + std::fabs(a[0][2]) + std::fabs(a[1][2]);
    if (off <= 1e-15 * scale) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < 3; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  EigenDecomposition e;
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  for (int idx : order) {
    e.values.push_back(a[idx][idx]);
    Vec w(3);
    for (int k = 0; k < 3; ++k) w[k] = v[k][idx];
    e.vectors.push_back(w.normalized());
  }
  return e;
}

}  // namespace

EigenDecomposition sym_eig(const SymMatrix& M) {
  int n = M.dim();
  EigenDecomposition e;
  if (n == 1) {
    e.values = {M(0, 0)};
    e.vectors = {Vec::unit(1, 0)};
  } else if (n == 2) {
    double a = M(0, 0), b = M(0, 1), d = M(1, 1);
    double mean = 0.5 * (a + d), r = std::hypot(0.5 * (a - d), b);
    e.values = {mean + r, mean - r};
    Vec w1(2);
    if (r == 0.0) {
      w1 = Vec::unit(2, 0);
    } else if (a >= d) {
      w1[0] = a - (mean - r);
      w1[1] = b;
    } else {
      w1[0] = b;
      w1[1] = d - (mean - r);
    }
    w1 = w1.normalized();
    Vec w2(2);
    w2[0] = -w1[1];
    w2[1] = w1[0];
    e.vectors = {w1, w2};
  } else if (n == 3) {
    e = jacobi3(M);
  } else {
    throw Error(ErrorKind::InvalidArgument, "sym_eig supports n <= 3");
  }
  for (auto& w : e.vectors) fix_sign(w);
  return e;
}

double min_eig(const SymMatrix& M) { return sym_eig(M).values.back(); }
double max_eig(const SymMatrix& M) { return sym_eig(M).values.front(); }

SymMatrix sym_apply(const SymMatrix& M, double (*fn)(double)) {
  EigenDecomposition e = sym_eig(M);
  SymMatrix out(M.dim());
  for (std::size_t i = 0; i < e.values.size(); ++i) out += fn(e.values[i]) * SymMatrix::outer(e.vectors[i]);
  return out;
}

SymMatrix sym_inverse(const SymMatrix& M) {
  for (double l : sym_eig(M).values)
    if (l == 0.0) throw Error(ErrorKind::InvalidArgument, "singular matrix");
  return sym_apply(M, [](double l) { return 1.0 / l; });
}

double log_det(const SymMatrix& M) {
  double s = 0.0;
  for (double l : sym_eig(M).values) {
    if (!(l > 0.0)) throw Error(ErrorKind::InvalidArgument, "log_det of a matrix that is not positive definite");
    s += std::log(l);
  }
  return s;
}

Bound riccati_lower_bound(const SymMatrix& M0, const Vec& w, double t) {
  double a = M0.quad(w);
  Bound b;
  if (1.0 - t * a <= 0.0) {
    b.vacuous = true;
    b.value = std::numeric_limits<double>::infinity();
    b.offending = a;
    return b;
  }
  b.value = a / (1.0 - t * a);
  return b;
}

Bound trace_lower_bound(const SymMatrix& M0, double t) {
  Bound b;
  for (double l : sym_eig(M0).values) {
    if (1.0 - t * l <= 0.0) {
      b.vacuous = true;
      b.value = std::numeric_limits<double>::infinity();
      b.offending = l;
      return b;
    }
    b.value += l / (1.0 - t * l);
  }
  return b;
}

Bound log_bound(const SymMatrix& M0, double tau) {
  Bound b;
  for (double l : sym_eig(M0).values) {
    if (1.0 - tau * l <= 0.0) {
      b.vacuous = true;
      b.value = std::numeric_limits<double>::infinity();
      b.offending = l;
      return b;
    }
    b.value -= std::log(1.0 - tau * l);
  }
  return b;
}

CheckReport check_matrix_ode(const MatrixOdePath& path, double tol) {
  CheckReport rep;
  rep.name = "matrix_ode";
  std::size_t m = path.times.size();
  if (m < 5) throw Error(ErrorKind::TooFewSamples, "matrix ODE check needs at least 5 samples");
  double dt = (path.times.back() - path.times.front()) / static_cast<double>(m - 1);
  FdMatrixSeries d = differentiate(path.mats, dt);
  double fd_err = 0.0;
  for (std::size_t k = 1; k + 1 < m; ++k) fd_err = std::max(fd_err, d.error[k]);
  rep.c_fd = fd_err / (dt * dt);
  rep.tolerance = tol > 0.0 ? tol : std::max(1e-6, fd_err);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    SymMatrix r = d.value[k] - path.mats[k].square();
    if (path.remainders) r -= (*path.remainders)[k];
    EigenDecomposition e = sym_eig(r);
    rep.observe("dM - M^2 - R", e.values.back(), rep.tolerance, path.times[k], &e.vectors.back(),
                static_cast<int>(e.values.size()) - 1);
  }
  rep.finalize();
  return rep;
}

CheckReport concavity_profile(const MatrixOdePath& path, const Vec& w, double tol) {
  CheckReport rep;
  rep.name = "concavity";
  rep.tolerance = tol;
  std::size_t m = path.times.size();
  if (m < 5) throw Error(ErrorKind::TooFewSamples, "concavity check needs at least 5 samples");
  double t0 = path.times.front(), tau = path.times.back() - t0;
  double dt = tau / static_cast<double>(m - 1);
  std::vector<double> q(m);
  for (std::size_t k = 0; k < m; ++k) q[k] = path.mats[k].quad(w);
  std::vector<double> cum = cumulative_trapezoid(path.times, q);
  std::vector<double> c(m);
  double cmax = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    c[k] = std::exp(-cum[k]);
    cmax = std::max(cmax, std::fabs(c[k]));
  }
  FdSeries dq = differentiate(q, dt);
  double dmax = 0.0, qmax = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    dmax = std::max(dmax, std::fabs(dq.value[k]));
    qmax = std::max(qmax, q[k] * q[k]);
  }
  double cc_tol = std::max(tol, cmax * dt * dt * (dmax + qmax));
  for (std::size_t k = 1; k + 1 < m; ++k) {
    double second = (c[k + 1] - 2.0 * c[k] + c[k - 1]) / (dt * dt);
    rep.observe("second difference of c_w", -second, cc_tol, path.times[k], &w);
    double t = path.times[k] - t0;
    rep.observe("lower -1/t", q[k] + 1.0 / t, tol, path.times[k], &w);
    rep.observe("upper 1/(tau-t)", 1.0 / (tau - t) - q[k], tol, path.times[k], &w);
  }
  rep.finalize();
  return rep;
}

Vec random_unit(int n, std::uint64_t seed, int index) {
  std::mt19937_64 gen(seed * 1000003ULL + static_cast<std::uint64_t>(index) * 7919ULL + 17ULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec w(n);
  do {
    for (int i = 0; i < n; ++i) w[i] = nd(gen);
  } while (w.norm() < 1e-8);
  return w.normalized();
}

std::vector<Vec> probe_directions(const SymMatrix& M, int extra, std::uint64_t seed) {
  std::vector<Vec> dirs = sym_eig(M).vectors;
  for (int i = 0; i < extra; ++i) dirs.push_back(random_unit(M.dim(), seed, i));
  return dirs;
}

}  // namespace dflow
