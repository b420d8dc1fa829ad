#include "dflow/time_series.hpp"

#include <algorithm>
#include <cmath>

#include "dflow/error.hpp"

namespace dflow {

namespace {

double d4(const std::vector<double>& f, std::size_t k, double dt) {
  std::size_t m = f.size() - 1;
  if (k >= 2 && k + 2 <= m) return (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * dt);
  if (k == 0) return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * dt);
  if (k == 1) return (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * dt);
  if (k == m) return (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / (12.0 * dt);
  return (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * dt);
}

double d2(const std::vector<double>& f, std::size_t k, double dt) {
  std::size_t m = f.size() - 1;
  if (k == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  if (k == m) return (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]) / (2.0 * dt);
  return (f[k + 1] - f[k - 1]) / (2.0 * dt);
}

}  // namespace

FdSeries differentiate(const std::vector<double>& f, double dt) {
  if (f.size() < 5) throw Error(ErrorKind::TooFewSamples, "finite differences need at least 5 samples");
  FdSeries out;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double a = d4(f, k, dt);
    out.value.push_back(a);
    out.error.push_back(std::fabs(a - d2(f, k, dt)));
  }
  return out;
}

FdMatrixSeries differentiate(const std::vector<SymMatrix>& f, double dt) {
  if (f.size() < 5) throw Error(ErrorKind::TooFewSamples, "finite differences need at least 5 samples");
  int n = f.front().dim();
  FdMatrixSeries out;
  out.value.assign(f.size(), SymMatrix(n));
  out.error.assign(f.size(), 0.0);
  std::vector<double> comp(f.size());
  for (int e = 0; e < sym_count(n); ++e) {
    for (std::size_t k = 0; k < f.size(); ++k) comp[k] = f[k].packed(e);
    FdSeries d = differentiate(comp, dt);
    for (std::size_t k = 0; k < f.size(); ++k) {
      out.value[k].packed(e) = d.value[k];
      out.error[k] = std::max(out.error[k], d.error[k]);
    }
  }
  return out;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> c(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) c[k] = c[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return c;
}

}  // namespace dflow
