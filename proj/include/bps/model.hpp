#pragma once

// Coupling parameters, vortex data, and the closed-form predictions of the
// dually gauged BPS vortex-antivortex system
//
//   Δu₁ = a11 tanh(u₁/2) + a12 tanh(u₂/2) + 4π Σ δ(zeros of q) − 4π Σ δ(poles of q)
//   Δu₂ = a21 tanh(u₁/2) + a22 tanh(u₂/2) + 4π Σ δ(zeros of p) − 4π Σ δ(poles of p)
//
// with u₁ = ln|q|², u₂ = ln|p|².

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bps/error.hpp"

namespace bps {

inline constexpr double pi = std::numbers::pi;

struct PhysicalCouplings {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double det() const { return a * d - b * c; }

  void validate() const {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d)))
      throw InvalidArgument("physical couplings must be finite");
    if (det() == 0.0)
      throw InvalidArgument("degenerate physical couplings: ad - bc = 0");
  }

  bool operator==(const PhysicalCouplings&) const = default;
};

struct CouplingMatrix {
  double a11 = 0.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 0.0;

  double det() const { return a11 * a22 - a12 * a21; }

  // Two independent scalar problems.
  bool decoupled() const { return a12 == 0.0 && a21 == 0.0; }

  // a12/a21, the weight that symmetrizes the system; 1 in decoupled mode.
  double ratio() const { return decoupled() ? 1.0 : a12 / a21; }

  void validate() const {
    if (!(std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22)))
      throw InvalidArgument("coupling matrix entries must be finite");
    if (!(a11 > 0.0))
      throw InvalidArgument("coupling matrix requires a11 > 0");
    if (!decoupled() && !(a12 * a21 > 0.0))
      throw InvalidArgument("coupling matrix requires a12*a21 > 0 or a12 = a21 = 0");
    if (!(det() > 0.0))
      throw InvalidArgument("coupling matrix requires a11*a22 - a12*a21 > 0");
  }

  bool operator==(const CouplingMatrix&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

struct Vortex {
  Point at;
  int multiplicity = 1;

  bool operator==(const Vortex&) const = default;
};

// Prescribed zeros and poles of q (species 1) and p (species 2).
struct VortexConfiguration {
  std::vector<Vortex> zeros1;
  std::vector<Vortex> poles1;
  std::vector<Vortex> zeros2;
  std::vector<Vortex> poles2;

  static int total(const std::vector<Vortex>& list) {
    int n = 0;
    for (const auto& v : list) n += v.multiplicity;
    return n;
  }

  int N1() const { return total(zeros1); }
  int P1() const { return total(poles1); }
  int N2() const { return total(zeros2); }
  int P2() const { return total(poles2); }

  // Net vortex numbers N_i − P_i.
  int net1() const { return N1() - P1(); }
  int net2() const { return N2() - P2(); }

  bool empty() const {
    return zeros1.empty() && poles1.empty() && zeros2.empty() && poles2.empty();
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto* list : {&zeros1, &poles1, &zeros2, &poles2})
      for (const auto& v : *list) f(v);
  }

  double max_radius() const {
    double r = 0.0;
    for_each([&](const Vortex& v) { r = std::max(r, std::hypot(v.at.x, v.at.y)); });
    return r;
  }

  void validate() const {
    for_each([](const Vortex& v) {
      if (v.multiplicity < 1)
        throw InvalidArgument("vortex multiplicity must be >= 1");
      if (!std::isfinite(v.at.x) || !std::isfinite(v.at.y))
        throw InvalidArgument("vortex position must be finite");
    });
  }

  // Zeros and poles exchanged; maps the lower BPS branch onto the upper one.
  VortexConfiguration swapped() const { return {poles1, zeros1, poles2, zeros2}; }

  bool operator==(const VortexConfiguration&) const = default;
};

// Disjoint union of two configurations.
inline VortexConfiguration merged(const VortexConfiguration& lhs, const VortexConfiguration& rhs) {
  auto cat = [](std::vector<Vortex> a, const std::vector<Vortex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return {cat(lhs.zeros1, rhs.zeros1), cat(lhs.poles1, rhs.poles1), cat(lhs.zeros2, rhs.zeros2),
          cat(lhs.poles2, rhs.poles2)};
}

struct FeasibilityReport {
  double lhs1 = 0.0;
  double lhs2 = 0.0;
  double rhs = 0.0;
  bool feasible = true;
};

struct DecayRates {
  double lambda1 = 0.0; // smaller eigenvalue of the symmetrized matrix
  double lambda0 = 0.0; // lambda1 * min(1, a21/a12)
  std::optional<double> sigma;
  // Decay rate of u itself from the linearization Δu = (A/2) u: the square
  // root of the smallest eigenvalue of A/2.
  double field_rate = 0.0;
};

struct FluxPrediction {
  double T1 = 0.0;
  double T2 = 0.0;
  std::optional<double> chern1;
  std::optional<double> chern2;
  std::optional<double> charge1;
  std::optional<double> charge2;
  double energy = 0.0;
};

inline CouplingMatrix couplings_from_physical(const PhysicalCouplings& pc) {
  pc.validate();
  const double off = 4.0 * (pc.a * pc.c + pc.b * pc.d);
  return {4.0 * (pc.a * pc.a + pc.b * pc.b), off, off, 4.0 * (pc.c * pc.c + pc.d * pc.d)};
}

inline FeasibilityReport check_torus_feasibility(const CouplingMatrix& cm,
                                                 const VortexConfiguration& vc, double area) {
  cm.validate();
  if (!(area > 0.0)) throw InvalidArgument("surface area must be positive");
  const double dn1 = vc.net1();
  const double dn2 = vc.net2();
  FeasibilityReport rep;
  rep.lhs1 = std::abs(cm.a22 * dn1 - cm.a12 * dn2);
  rep.lhs2 = std::abs(cm.a11 * dn2 - cm.a21 * dn1);
  rep.rhs = cm.det() * area / (4.0 * pi);
  rep.feasible = std::max(rep.lhs1, rep.lhs2) < rep.rhs;
  return rep;
}

// Real 2x2 eigen-decomposition for matrices with real eigenvalues.
// Eigenvalues ascending; columns of `vectors` are unit eigenvectors.
struct Eigen2 {
  std::array<double, 2> values{};
  std::array<std::array<double, 2>, 2> vectors{}; // vectors[row][col]
};

inline Eigen2 eigen2(double m11, double m12, double m21, double m22) {
  const double tr = m11 + m22;
  const double det = m11 * m22 - m12 * m21;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  Eigen2 e;
  // Smaller root via the product of roots to avoid cancellation.
  const double big = tr / 2.0 + (tr >= 0 ? disc : -disc);
  const double small = big != 0.0 ? det / big : tr / 2.0 - disc;
  e.values = {std::min(big, small), std::max(big, small)};
  for (int k = 0; k < 2; ++k) {
    const double lam = e.values[k];
    // (M − λ) x = 0; pick the better-conditioned row.
    double x, y;
    if (std::abs(m12) + std::abs(m11 - lam) >= std::abs(m21) + std::abs(m22 - lam)) {
      x = m12;
      y = lam - m11;
    } else {
      x = lam - m22;
      y = m21;
    }
    if (x == 0.0 && y == 0.0) {
      // M is a multiple of the identity
      x = k == 0 ? 1.0 : 0.0;
      y = k == 0 ? 0.0 : 1.0;
    }
    const double n = std::hypot(x, y);
    e.vectors[0][k] = x / n;
    e.vectors[1][k] = y / n;
  }
  return e;
}

// The symmetrized matrix [[a11, a12], [a12, (a12/a21) a22]] governing the
// far-field behaviour of (u₁, (a12/a21) u₂).
inline std::array<double, 4> symmetrized_matrix(const CouplingMatrix& cm) {
  const double r = cm.ratio();
  return {cm.a11, cm.a12, cm.a12, r * cm.a22};
}

inline DecayRates decay_rates(const CouplingMatrix& cm,
                              const std::optional<PhysicalCouplings>& pc = std::nullopt) {
  cm.validate();
  DecayRates dr;
  if (cm.decoupled()) {
    dr.lambda1 = dr.lambda0 = std::min(cm.a11, cm.a22);
  } else {
    const double r = cm.ratio();
    const double s = cm.a11 + r * cm.a22;
    const double q = r * cm.det();
    // Smaller root of x² − s x + q written as 2q / (s + √(s² − 4q)).
    dr.lambda1 = 2.0 * q / (s + std::sqrt(s * s - 4.0 * q));
    dr.lambda0 = dr.lambda1 * std::min(1.0, cm.a21 / cm.a12);
  }
  const Eigen2 half = eigen2(cm.a11 / 2, cm.a12 / 2, cm.a21 / 2, cm.a22 / 2);
  dr.field_rate = std::sqrt(half.values[0]);
  if (pc) {
    pc->validate();
    const double s = pc->a * pc->a + pc->b * pc->b + pc->c * pc->c + pc->d * pc->d;
    const double D = pc->det();
    const double root = std::sqrt(s * s - 4.0 * D * D);
    // s − root = 4D²/(s + root)
    dr.sigma = std::sqrt(8.0 * 4.0 * D * D / (s + root));
  }
  return dr;
}

inline FluxPrediction predicted_fluxes(const CouplingMatrix& cm, const VortexConfiguration& vc,
                                       const std::optional<PhysicalCouplings>& pc = std::nullopt) {
  cm.validate();
  const double dn1 = vc.net1();
  const double dn2 = vc.net2();
  const double k = 4.0 * pi / cm.det();
  FluxPrediction fp;
  fp.T1 = k * (cm.a22 * -dn1 - cm.a12 * -dn2);
  fp.T2 = k * (cm.a11 * -dn2 - cm.a21 * -dn1);
  fp.energy = 4.0 * pi * (vc.N1() + vc.N2() + vc.P1() + vc.P2());
  if (pc) {
    pc->validate();
    const auto& [a, b, c, d] = *pc;
    const double D = pc->det();
    fp.chern1 = (d * dn1 - b * dn2) / D;
    fp.chern2 = (a * dn2 - c * dn1) / D;
    fp.charge1 = 2.0 * pi * ((c * c + d * d) * dn1 - (a * c + b * d) * dn2) / D;
    fp.charge2 = 2.0 * pi * ((a * a + b * b) * dn2 - (a * c + b * d) * dn1) / D;
  }
  return fp;
}

} // namespace bps
