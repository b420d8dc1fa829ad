#include <algorithm>
#include <cmath>

#include "dflow/error.hpp"
#include "dflow/grid_calculus.hpp"

namespace dflow {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid Grid::make(int dim, const std::array<double, 3>& extent, const std::array<int, 3>& points,
                std::size_t cap) {
  if (dim < 1 || dim > 3) throw Error(ErrorKind::InvalidArgument, "grid dim must be 1, 2 or 3");
  Grid g;
  g.dim = dim;
  std::size_t total = 1;
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
        throw Error(ErrorKind::InvalidArgument, "grid extent must be positive");
      if (points[a] < 8 || !power_of_two(points[a]))
        throw Error(ErrorKind::InvalidArgument, "grid points must be a power of two >= 8");
      g.extent[a] = extent[a];
      g.points[a] = points[a];
      total *= static_cast<std::size_t>(points[a]);
    } else {
      g.extent[a] = 1.0;
      g.points[a] = 1;
    }
  }
  if (total > cap) throw Error(ErrorKind::InvalidArgument, "grid exceeds the point cap");
  return g;
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points[a]);
  return s;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing(a);
  return v;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent[a];
  return v;
}

Vec Grid::point(std::size_t p) const {
  Vec x(dim);
  for (int a = dim - 1; a >= 0; --a) {
    int n = points[a];
    x[a] = coord(a, static_cast<int>(p % n));
    p /= n;
  }
  return x;
}

Grid Grid::refined(int factor) const {
  Grid g = *this;
  for (int a = 0; a < dim; ++a) g.points[a] *= factor;
  return g;
}

bool Grid::operator==(const Grid& o) const {
  if (dim != o.dim) return false;
  for (int a = 0; a < dim; ++a)
    if (extent[a] != o.extent[a] || points[a] != o.points[a]) return false;
  return true;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw Error(ErrorKind::GridMismatch, "fields live on different grids");
}

ScalarField::ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw Error(ErrorKind::InvalidArgument, "value count != grid size");
}

ScalarField ScalarField::from_function(const Grid& g, const std::function<double(const Vec&)>& fn) {
  ScalarField f(g);
  for (std::size_t p = 0; p < f.size(); ++p) f[p] = fn(g.point(p));
  return f;
}

double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }
double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

bool ScalarField::finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

VectorField::VectorField(const Grid& g) : grid(g) {
  for (int a = 0; a < g.dim; ++a) comp[a].assign(g.size(), 0.0);
}

Vec VectorField::at(std::size_t p) const {
  Vec v(grid.dim);
  for (int a = 0; a < grid.dim; ++a) v[a] = comp[a][p];
  return v;
}

SymField::SymField(const Grid& g) : grid(g) {
  for (int k = 0; k < sym_count(g.dim); ++k) comp[k].assign(g.size(), 0.0);
}

SymMatrix SymField::at(std::size_t p) const {
  SymMatrix m(grid.dim);
  for (int k = 0; k < sym_count(grid.dim); ++k) m.packed(k) = comp[k][p];
  return m;
}

void SymField::set(std::size_t p, const SymMatrix& m) {
  for (int k = 0; k < sym_count(grid.dim); ++k) comp[k][p] = m.packed(k);
}

Density Density::construct(const ScalarField& values, double floor) {
  if (!values.finite()) throw Error(ErrorKind::InvalidArgument, "density values not finite");
  if (!(floor > 0.0)) throw Error(ErrorKind::InvalidArgument, "density floor must be positive");
  Density d;
  d.floor_ = floor;
  d.field_ = values;
  for (double& v : d.field_.values) v = std::max(v, floor);
  double mass = integrate(d.field_);
  for (double& v : d.field_.values) v /= mass;
  return d;
}

Density Density::adopt(const ScalarField& values, double floor) {
  if (!values.finite()) throw Error(ErrorKind::InvalidArgument, "density values not finite");
  if (values.min() < floor)
    throw Error(ErrorKind::PositivityFloor, "density value " + std::to_string(values.min()) +
                                                " below floor " + std::to_string(floor));
  Density d;
  d.floor_ = floor;
  d.field_ = values;
  return d;
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double integrate_against(const ScalarField& f, const Density& rho) {
  require_same_grid(f.grid, rho.grid());
  double s = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) s += f[p] * rho[p];
  return s * f.grid.cell_volume();
}

SymMatrix integrate_tensor(const SymField& a, const Density& rho) {
  require_same_grid(a.grid, rho.grid());
  int n = a.grid.dim;
  SymMatrix m(n);
  for (int k = 0; k < sym_count(n); ++k) {
    double s = 0.0;
    for (std::size_t p = 0; p < rho.size(); ++p) s += a.comp[k][p] * rho[p];
    m.packed(k) = s * a.grid.cell_volume();
  }
  return m;
}

SymMatrix integrate_tensor_dx(const SymField& a) {
  int n = a.grid.dim;
  SymMatrix m(n);
  for (int k = 0; k < sym_count(n); ++k) {
    double s = 0.0;
    for (double v : a.comp[k]) s += v;
    m.packed(k) = s * a.grid.cell_volume();
  }
  return m;
}

double seam_mass(const Density& rho, int cells) {
  const Grid& g = rho.grid();
  double s = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) {
    std::size_t q = p;
    bool near = false;
    for (int a = g.dim - 1; a >= 0; --a) {
      int n = g.points[a];
      int i = static_cast<int>(q % n);
      q /= n;
      // The seam sits between index n-1 and index 0.
      int d = std::min(i + 1, n - i);
      if (d <= cells) near = true;
    }
    if (near) s += rho[p];
  }
  return s * g.cell_volume();
}

ScalarField bohm_potential(const Density& rho) {
  const ScalarField& r = rho.field();
  VectorField gr = gradient(r);
  ScalarField lap = laplacian(r);
  ScalarField out(r.grid);
  for (std::size_t p = 0; p < r.size(); ++p) {
    double g2 = 0.0;
    for (int a = 0; a < r.grid.dim; ++a) {
      double gl = gr.comp[a][p] / r[p];
      g2 += gl * gl;
    }
    // |grad log|^2 + 2 lap log = 2 lap(rho)/rho - |grad log|^2
    out[p] = 0.25 * (2.0 * lap[p] / r[p] - g2);
  }
  return out;
}

ScalarField bohm_direct(const Density& rho) {
  ScalarField s = rho.field();
  for (double& v : s.values) v = std::sqrt(v);
  ScalarField lap = laplacian(s);
  for (std::size_t p = 0; p < s.size(); ++p) lap[p] /= s[p];
  return lap;
}

}  // namespace dflow
