#pragma once

// Closed forms written out independently of the library.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// N(0, v) evaluated through its periodic image sum on [-L/2, L/2).
inline std::vector<double> periodic_gaussian(int N, double L, double mean, double v) {
  std::vector<double> out(N);
  double h = L / N, s = 0.0;
  for (int i = 0; i < N; ++i) {
    double x = -0.5 * L + i * h, acc = 0.0;
    for (int k = -3; k <= 3; ++k) {
      double d = x - mean + k * L;
      acc += std::exp(-0.5 * d * d / v);
    }
    out[i] = acc;
    s += acc * h;
  }
  for (auto& x : out) x /= s;
  return out;
}

// Entropy int rho log rho of N(0, v) in one dimension.
inline double gaussian_entropy(double v) { return -0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * v); }

// Heat semigroup with generator (sigma/2) d^2/dx^2 from N(0, v0).
inline double heat_variance(double v0, double sigma, double t) { return v0 + sigma * t; }

// Scalar Riccati m' = m^2 from m0.
inline double riccati(double m0, double t) { return m0 / (1.0 - t * m0); }

}  // namespace oracle
