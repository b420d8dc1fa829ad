#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "dflow/sym_matrix.hpp"

namespace dflow {

constexpr std::size_t kDefaultPointCap = std::size_t{1} << 22;
constexpr double kDefaultFloor = 1e-30;

// Periodic box centred at the origin: axis i covers [-L_i/2, L_i/2).
struct Grid {
  int dim = 1;
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  std::array<int, 3> points{8, 1, 1};

  static Grid make(int dim, const std::array<double, 3>& extent, const std::array<int, 3>& points,
                   std::size_t cap = kDefaultPointCap);

  double spacing(int axis) const { return extent[axis] / points[axis]; }
  std::size_t size() const;
  double cell_volume() const;
  double volume() const;
  double coord(int axis, int index) const { return -0.5 * extent[axis] + index * spacing(axis); }
  // Coordinates of flat index p.
  Vec point(std::size_t p) const;
  Grid refined(int factor) const;
  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  ScalarField(const Grid& g, std::vector<double> v);
  static ScalarField from_function(const Grid& g, const std::function<double(const Vec&)>& fn);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double max() const;
  double min() const;
  double max_abs() const;
  bool finite() const;
};

struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 3> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g);
  Vec at(std::size_t p) const;
};

// Per-point symmetric matrices, stored as packed component fields.
struct SymField {
  Grid grid;
  std::array<std::vector<double>, 6> comp;

  SymField() = default;
  explicit SymField(const Grid& g);
  SymMatrix at(std::size_t p) const;
  void set(std::size_t p, const SymMatrix& m);
};

class Density {
 public:
  Density() = default;
  // Clamps to the floor and renormalizes to unit mass.
  static Density construct(const ScalarField& values, double floor = kDefaultFloor);
  // Strict: raises PositivityFloor if any value is below the floor; no renormalization.
  static Density adopt(const ScalarField& values, double floor = kDefaultFloor);

  const ScalarField& field() const { return field_; }
  const Grid& grid() const { return field_.grid; }
  double floor() const { return floor_; }
  double operator[](std::size_t i) const { return field_.values[i]; }
  std::size_t size() const { return field_.values.size(); }

 private:
  ScalarField field_;
  double floor_ = kDefaultFloor;
};

void require_same_grid(const Grid& a, const Grid& b);

// Spectral calculus.
VectorField gradient(const ScalarField& f);
SymField hessian(const ScalarField& f);
ScalarField divergence(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
ScalarField heat_propagate(const ScalarField& f, double t, double sigma);
// Zero every mode beyond two thirds of the Nyquist wavenumber on any axis.
ScalarField dealias(const ScalarField& f);
// Fraction of spectral energy in the upper third of the resolved band.
double spectral_tail_fraction(const ScalarField& f);
// Circular convolution sum_y k(x - y) f(y) h^n.
ScalarField circular_convolve(const ScalarField& kernel, const ScalarField& f);

// Quadrature.
double integrate(const ScalarField& f);
double integrate_against(const ScalarField& f, const Density& rho);
SymMatrix integrate_tensor(const SymField& a, const Density& rho);
SymMatrix integrate_tensor_dx(const SymField& a);

// Mass within `cells` lattice cells of the box seam.
double seam_mass(const Density& rho, int cells = 3);

// (1/4)(|grad log rho|^2 + 2 lap log rho) built from derivatives of rho.
ScalarField bohm_potential(const Density& rho);
// Lap sqrt(rho) / sqrt(rho), the direct form.
ScalarField bohm_direct(const Density& rho);

}  // namespace dflow
