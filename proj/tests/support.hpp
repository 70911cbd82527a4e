#pragma once

#include <cmath>
#include <random>

#include "bps/discretization.hpp"
#include "bps/model.hpp"

namespace bps::testing {

inline const PhysicalCouplings reference_pc{1.0, -1.0, 0.0, 1.0};
inline const CouplingMatrix coupled{8.0, -4.0, -4.0, 4.0};
inline const CouplingMatrix decoupled_cm{4.0, 0.0, 0.0, 4.0};

// Smooth random field: a few random Gaussian bumps (plane) or Fourier modes (torus).
inline ScalarField smooth_random(const DomainSpec& d, std::mt19937& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(d);
  for (int m = 0; m < 6; ++m) {
    const double a = amplitude * u(rng);
    if (d.is_torus()) {
      const int kx = int(std::floor(3.0 * (u(rng) + 1.0)));
      const int ky = int(std::floor(3.0 * (u(rng) + 1.0)));
      const double phase = pi * u(rng);
      for (int j = 0; j < d.ny(); ++j)
        for (int i = 0; i < d.nx(); ++i)
          f(i, j) += a * std::cos(2 * pi * (kx * d.x(i) / d.L1 + ky * d.y(j) / d.L2) + phase);
    } else {
      const double cx = 0.5 * d.R * u(rng), cy = 0.5 * d.R * u(rng);
      const double w = 0.5 + 0.25 * d.R * (u(rng) + 1.0);
      for (int j = 0; j < d.ny(); ++j)
        for (int i = 0; i < d.nx(); ++i) {
          const double r2 = (d.x(i) - cx) * (d.x(i) - cx) + (d.y(j) - cy) * (d.y(j) - cy);
          f(i, j) += a * std::exp(-r2 / (w * w));
        }
    }
  }
  return f;
}

inline ScalarField white_noise(const DomainSpec& d, std::mt19937& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  ScalarField f(d);
  for (auto& v : f.values()) v = u(rng);
  return f;
}

inline VortexConfiguration single_zero(Point at) {
  VortexConfiguration vc;
  vc.zeros1.push_back({at, 1});
  return vc;
}

} // namespace bps::testing
