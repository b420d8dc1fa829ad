#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "dflow/error.hpp"
#include "dflow/grid_calculus.hpp"

namespace dflow {

namespace {

using cplx = std::complex<double>;

struct Plan {
  int dim = 1;
  std::array<int, 3> n{1, 1, 1};
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// FFTW planning is not thread-safe; execution with new-array calls is.
const Plan& plan_for(const Grid& g) {
  static std::mutex mu;
  static std::map<std::array<int, 4>, std::unique_ptr<Plan>> cache;
  std::array<int, 4> key{g.dim, g.points[0], g.points[1], g.points[2]};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto plan = std::make_unique<Plan>();
  plan->dim = g.dim;
  plan->real_size = g.size();
  plan->complex_size = g.size() / g.points[g.dim - 1] * (g.points[g.dim - 1] / 2 + 1);
  for (int a = 0; a < g.dim; ++a) plan->n[a] = g.points[a];
  std::unique_ptr<double, FftwFree> r(fftw_alloc_real(plan->real_size));
  std::unique_ptr<fftw_complex, FftwFree> c(fftw_alloc_complex(plan->complex_size));
  plan->forward = fftw_plan_dft_r2c(g.dim, plan->n.data(), r.get(), c.get(), FFTW_ESTIMATE);
  plan->backward = fftw_plan_dft_c2r(g.dim, plan->n.data(), c.get(), r.get(), FFTW_ESTIMATE);
  const Plan& ref = *plan;
  cache.emplace(key, std::move(plan));
  return ref;
}

struct Spectrum {
  Grid grid;
  std::vector<cplx> c;
};

Spectrum forward(const ScalarField& f) {
  const Plan& plan = plan_for(f.grid);
  std::unique_ptr<double, FftwFree> r(fftw_alloc_real(plan.real_size));
  std::unique_ptr<fftw_complex, FftwFree> c(fftw_alloc_complex(plan.complex_size));
  std::copy(f.values.begin(), f.values.end(), r.get());
  fftw_execute_dft_r2c(plan.forward, r.get(), c.get());
  Spectrum s{f.grid, std::vector<cplx>(plan.complex_size)};
  for (std::size_t i = 0; i < plan.complex_size; ++i) s.c[i] = cplx(c.get()[i][0], c.get()[i][1]);
  return s;
}

ScalarField inverse(const Spectrum& s) {
  const Plan& plan = plan_for(s.grid);
  std::unique_ptr<double, FftwFree> r(fftw_alloc_real(plan.real_size));
  std::unique_ptr<fftw_complex, FftwFree> c(fftw_alloc_complex(plan.complex_size));
  for (std::size_t i = 0; i < plan.complex_size; ++i) {
    c.get()[i][0] = s.c[i].real();
    c.get()[i][1] = s.c[i].imag();
  }
  fftw_execute_dft_c2r(plan.backward, c.get(), r.get());
  ScalarField out(s.grid);
  double scale = 1.0 / static_cast<double>(plan.real_size);
  for (std::size_t i = 0; i < plan.real_size; ++i) out[i] = r.get()[i] * scale;
  return out;
}

struct Mode {
  std::array<double, 3> k{0, 0, 0};
  std::array<int, 3> m{0, 0, 0};
  std::array<bool, 3> nyq{false, false, false};
};

// Visits every stored r2c coefficient with its wavevector.
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  int d = g.dim;
  std::array<int, 3> shape{1, 1, 1};
  for (int a = 0; a < d; ++a) shape[a] = g.points[a];
  shape[d - 1] = g.points[d - 1] / 2 + 1;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= shape[a];
  for (std::size_t idx = 0; idx < total; ++idx) {
    Mode mode;
    std::size_t q = idx;
    for (int a = d - 1; a >= 0; --a) {
      int i = static_cast<int>(q % shape[a]);
      q /= shape[a];
      int n = g.points[a];
      int m = (a == d - 1 || i <= n / 2) ? i : i - n;
      mode.m[a] = m;
      mode.nyq[a] = (std::abs(m) == n / 2);
      mode.k[a] = 2.0 * std::numbers::pi / g.extent[a] * m;
    }
    fn(idx, mode);
  }
}

template <class Mult>
ScalarField apply_multiplier(const Spectrum& s, Mult&& mult) {
  Spectrum t = s;
  for_each_mode(s.grid, [&](std::size_t idx, const Mode& mode) { t.c[idx] *= mult(mode); });
  return inverse(t);
}

cplx derivative_symbol(const Mode& mode, int i) {
  if (mode.nyq[i]) return 0.0;
  return cplx(0.0, mode.k[i]);
}

cplx second_symbol(const Mode& mode, int i, int j) {
  if (i == j) return -mode.k[i] * mode.k[i];
  if (mode.nyq[i] || mode.nyq[j]) return 0.0;
  return -mode.k[i] * mode.k[j];
}

}  // namespace

VectorField gradient(const ScalarField& f) {
  Spectrum s = forward(f);
  VectorField out(f.grid);
  for (int a = 0; a < f.grid.dim; ++a)
    out.comp[a] = apply_multiplier(s, [a](const Mode& m) { return derivative_symbol(m, a); }).values;
  return out;
}

SymField hessian(const ScalarField& f) {
  Spectrum s = forward(f);
  int n = f.grid.dim;
  SymField out(f.grid);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      out.comp[sym_index(i, j, n)] =
          apply_multiplier(s, [i, j](const Mode& m) { return second_symbol(m, i, j); }).values;
  return out;
}

ScalarField divergence(const VectorField& v) {
  const Grid& g = v.grid;
  Spectrum acc{g, std::vector<cplx>()};
  for (int a = 0; a < g.dim; ++a) {
    Spectrum s = forward(ScalarField(g, v.comp[a]));
    for_each_mode(g, [&](std::size_t idx, const Mode& m) { s.c[idx] *= derivative_symbol(m, a); });
    if (a == 0) {
      acc = std::move(s);
    } else {
      for (std::size_t i = 0; i < acc.c.size(); ++i) acc.c[i] += s.c[i];
    }
  }
  return inverse(acc);
}

ScalarField laplacian(const ScalarField& f) {
  return apply_multiplier(forward(f), [](const Mode& m) {
    double k2 = 0.0;
    for (int a = 0; a < 3; ++a) k2 += m.k[a] * m.k[a];
    return cplx(-k2, 0.0);
  });
}

ScalarField heat_propagate(const ScalarField& f, double t, double sigma) {
  if (t < 0.0) throw Error(ErrorKind::InvalidArgument, "heat_propagate needs t >= 0");
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "heat_propagate needs sigma > 0");
  if (t == 0.0) return f;
  return apply_multiplier(forward(f), [t, sigma](const Mode& m) {
    double k2 = 0.0;
    for (int a = 0; a < 3; ++a) k2 += m.k[a] * m.k[a];
    return cplx(std::exp(-0.5 * sigma * k2 * t), 0.0);
  });
}

ScalarField dealias(const ScalarField& f) {
  const Grid& g = f.grid;
  return apply_multiplier(forward(f), [&g](const Mode& m) {
    for (int a = 0; a < g.dim; ++a)
      if (3 * std::abs(m.m[a]) > g.points[a]) return cplx(0.0, 0.0);
    return cplx(1.0, 0.0);
  });
}

double spectral_tail_fraction(const ScalarField& f) {
  const Grid& g = f.grid;
  Spectrum s = forward(f);
  double total = 0.0, tail = 0.0;
  for_each_mode(g, [&](std::size_t idx, const Mode& m) {
    double e = std::norm(s.c[idx]);
    total += e;
    for (int a = 0; a < g.dim; ++a)
      if (3 * std::abs(m.m[a]) > g.points[a]) {
        tail += e;
        break;
      }
  });
  return total > 0.0 ? tail / total : 0.0;
}

ScalarField circular_convolve(const ScalarField& kernel, const ScalarField& f) {
  require_same_grid(kernel.grid, f.grid);
  const Grid& g = f.grid;
  // Re-index the kernel so that index 0 holds displacement zero.
  ScalarField shifted(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    std::size_t q = p, src = 0, stride = 1;
    for (int a = g.dim - 1; a >= 0; --a) {
      int n = g.points[a];
      int i = static_cast<int>(q % n);
      q /= n;
      src += static_cast<std::size_t>((i + n / 2) % n) * stride;
      stride *= n;
    }
    shifted[p] = kernel[src];
  }
  Spectrum a = forward(shifted);
  Spectrum b = forward(f);
  for (std::size_t i = 0; i < a.c.size(); ++i) a.c[i] *= b.c[i];
  ScalarField out = inverse(a);
  double h = g.cell_volume();
  for (double& v : out.values) v *= h;
  return out;
}

}  // namespace dflow
