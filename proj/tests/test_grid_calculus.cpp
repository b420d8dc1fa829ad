#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dflow/error.hpp"
#include "dflow/grid_calculus.hpp"
#include "oracles_support.hpp"

using namespace dflow;

namespace {

const double kPi = std::numbers::pi;

Grid line(double L, int N) { return Grid::make(1, {L, 1, 1}, {N, 1, 1}); }

Density gaussian_density(const Grid& g, double v) {
  auto vals = oracle::periodic_gaussian(g.points[0], g.extent[0], 0.0, v);
  return Density::construct(ScalarField(g, vals));
}

}  // namespace

TEST(GridCalculus, CoordinatesAreCentred) {
  Grid g = line(4.0, 8);
  EXPECT_DOUBLE_EQ(g.coord(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(g.coord(0, 4), 0.0);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 0.5);
  EXPECT_DOUBLE_EQ(g.volume(), 4.0);
}

TEST(GridCalculus, PointCapRejectsHugeGrids) {
  EXPECT_THROW(Grid::make(3, {1, 1, 1}, {512, 512, 512}, 1 << 20), Error);
}

TEST(GridCalculus, SpectralDerivativesOfAFourierMode) {
  Grid g = line(2.0 * kPi, 64);
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::sin(3.0 * x[0]); });
  VectorField d = gradient(f);
  ScalarField lap = laplacian(f);
  for (std::size_t p = 0; p < g.size(); ++p) {
    double x = g.point(p)[0];
    EXPECT_NEAR(d.comp[0][p], 3.0 * std::cos(3.0 * x), 1e-12);
    EXPECT_NEAR(lap[p], -9.0 * std::sin(3.0 * x), 1e-11);
  }
}

TEST(GridCalculus, HessianOfSeparableModeIn2D) {
  Grid g = Grid::make(2, {2.0 * kPi, 2.0 * kPi, 1}, {32, 32, 1});
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::sin(x[0]) * std::cos(2.0 * x[1]); });
  SymField H = hessian(f);
  for (std::size_t p = 0; p < g.size(); p += 37) {
    Vec x = g.point(p);
    SymMatrix h = H.at(p);
    EXPECT_NEAR(h(0, 0), -std::sin(x[0]) * std::cos(2 * x[1]), 1e-11);
    EXPECT_NEAR(h(0, 1), -2.0 * std::cos(x[0]) * std::sin(2 * x[1]), 1e-11);
    EXPECT_NEAR(h(1, 1), -4.0 * std::sin(x[0]) * std::cos(2 * x[1]), 1e-11);
  }
}

TEST(GridCalculus, DivergenceOfGradientIsLaplacian) {
  Grid g = Grid::make(2, {12.0, 12.0, 1}, {64, 64, 1});
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::exp(-x[0] * x[0] - 0.8 * x[1] * x[1]); });
  ScalarField a = divergence(gradient(f)), b = laplacian(f);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(a[p], b[p], 1e-9);
}

TEST(GridCalculus, HeatPropagatorDampsModes) {
  Grid g = line(2.0 * kPi, 32);
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::cos(2.0 * x[0]); });
  ScalarField out = heat_propagate(f, 0.3, 1.5);
  double decay = std::exp(-0.5 * 1.5 * 4.0 * 0.3);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(out[p], decay * f[p], 1e-13);
}

TEST(GridCalculus, DealiasRemovesHighModes) {
  Grid g = line(2.0 * kPi, 32);
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::sin(x[0]) + std::sin(14.0 * x[0]); });
  ScalarField d = dealias(f);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(d[p], std::sin(g.point(p)[0]), 1e-12);
  EXPECT_GT(spectral_tail_fraction(f), 0.4);
  EXPECT_LT(spectral_tail_fraction(d), 1e-20);
}

TEST(GridCalculus, ConvolutionWithDeltaIsIdentity) {
  Grid g = line(4.0, 16);
  ScalarField delta(g);
  delta[8] = 1.0 / g.cell_volume();  // x = 0
  auto f = ScalarField::from_function(g, [](const Vec& x) { return std::cos(kPi * x[0] / 2.0); });
  ScalarField c = circular_convolve(delta, f);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(c[p], f[p], 1e-12);
}

TEST(GridCalculus, DensityIsNormalisedAndFloored) {
  Grid g = line(4.0, 16);
  ScalarField v(g, 2.0);
  v[3] = -1.0;
  Density rho = Density::construct(v);
  EXPECT_NEAR(integrate(rho.field()), 1.0, 1e-14);
  EXPECT_GT(rho[3], 0.0);
  EXPECT_THROW(Density::adopt(v), Error);
  try {
    Density::adopt(v);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PositivityFloor);
  }
}

TEST(GridCalculus, MismatchedGridsAreRejected) {
  Density a = Density::construct(ScalarField(line(4.0, 16), 1.0));
  ScalarField f(line(4.0, 32), 1.0);
  try {
    integrate_against(f, a);
    FAIL() << "expected a grid mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridMismatch);
  }
}

TEST(GridCalculus, GaussianMomentsAgainstClosedForm) {
  Grid g = line(16.0, 256);
  Density rho = gaussian_density(g, 1.3);
  auto x2 = ScalarField::from_function(g, [](const Vec& x) { return x[0] * x[0]; });
  EXPECT_NEAR(integrate_against(x2, rho), 1.3, 1e-10);
  EXPECT_LT(seam_mass(rho), 1e-10);
}

TEST(GridCalculus, BohmFormsAgree) {
  Grid g = line(16.0, 256);
  Density rho = gaussian_density(g, 1.0);
  ScalarField a = bohm_potential(rho), b = bohm_direct(rho);
  // sqrt(rho) ~ exp(-x^2/4)
  for (std::size_t p = 64; p < 192; ++p) {
    double x = g.point(p)[0];
    EXPECT_NEAR(b[p], 0.25 * x * x - 0.5, 1e-8);
    EXPECT_NEAR(a[p], b[p], 1e-8);
  }
}
