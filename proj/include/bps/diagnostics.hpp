#pragma once

// Physical observables of a converged solution and their closed-form
// counterparts: quantized integrals of tanh(uᵢ/2), curvature and induced
// magnetic field maps, the topological energy, and the far-field decay rate.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "bps/model.hpp"
#include "bps/solver.hpp"

namespace bps {

enum class SignBranch { Upper, Lower };

inline double branch_sign(SignBranch s) { return s == SignBranch::Upper ? 1.0 : -1.0; }

// Stored in |q|², |p|² maps where e^u overflows.
inline constexpr double overflow_marker = std::numeric_limits<double>::max();

struct MeasuredFluxes {
  double T1 = 0.0;
  double T2 = 0.0;
  std::string warning; // empty unless the input was not converged
};

struct FieldMaps {
  ScalarField q2, p2;
  ScalarField B1, B2;
  ScalarField Fhat, Ftilde;
};

struct DecayWindow {
  double r_lo = 6.0;
  double r_hi = 10.0;
};

inline ScalarField half_tanh(const ScalarField& u) {
  ScalarField t(u.domain());
  for (std::size_t k = 0; k < u.size(); ++k) t[k] = std::tanh(0.5 * u[k]);
  return t;
}

inline MeasuredFluxes measure_fluxes(const Solution& sol, const CouplingMatrix& cm,
                                     const VortexConfiguration& vc) {
  cm.validate();
  vc.validate();
  MeasuredFluxes m{integrate(half_tanh(sol.u1)), integrate(half_tanh(sol.u2)), {}};
  if (!sol.converged) m.warning = "fluxes measured on a non-converged solution";
  return m;
}

inline FieldMaps reconstruct_fields(const Solution& sol, const PhysicalCouplings& pc,
                                    SignBranch sign = SignBranch::Upper) {
  pc.validate();
  const auto& d = sol.u1.domain();
  const double s = branch_sign(sign);
  const double det = pc.det();
  FieldMaps m{ScalarField(d), ScalarField(d), ScalarField(d),
              ScalarField(d), ScalarField(d), ScalarField(d)};
  for (std::size_t k = 0; k < sol.u1.size(); ++k) {
    const double u1 = sol.u1[k], u2 = sol.u2[k];
    const double e1 = std::exp(u1), e2 = std::exp(u2);
    m.q2[k] = std::isfinite(e1) ? e1 : overflow_marker;
    m.p2[k] = std::isfinite(e2) ? e2 : overflow_marker;
    const double t1 = std::tanh(0.5 * u1), t2 = std::tanh(0.5 * u2);
    m.Fhat[k] = -s * 2.0 * (pc.a * t1 + pc.c * t2);
    m.Ftilde[k] = -s * 2.0 * (pc.b * t1 + pc.d * t2);
    m.B1[k] = -s * 2.0 * det * t1;
    m.B2[k] = -s * 2.0 * det * t2;
  }
  return m;
}

// 2[(a+c)∫F̂ + (b+d)∫F̃] + 8π(P₁+P₂), with the pole counts standing in for the
// Thom-class integrals.
inline double topological_energy(const Solution& sol, const PhysicalCouplings& pc,
                                 const VortexConfiguration& vc) {
  const auto maps = reconstruct_fields(sol, pc, SignBranch::Upper);
  const double fhat = integrate(maps.Fhat);
  const double ftilde = integrate(maps.Ftilde);
  return 2.0 * ((pc.a + pc.c) * fhat + (pc.b + pc.d) * ftilde) + 8.0 * pi * (vc.P1() + vc.P2());
}

// Least-squares rate κ in ln(u₁² + (a12/a21)u₂²) ≈ const − κ|x| over the nodes
// of the annulus r_lo ≤ |x| ≤ r_hi around the origin.
inline double fit_decay_rate(const Solution& sol, const CouplingMatrix& cm,
                             const VortexConfiguration& vc, const DecayWindow& window) {
  const auto& d = sol.u1.domain();
  if (d.is_torus()) throw InvalidArgument("decay fits need a plane solution");
  if (!(window.r_lo >= 0 && window.r_lo < window.r_hi))
    throw InvalidArgument("decay window needs 0 <= r_lo < r_hi");
  if (window.r_hi > d.R)
    throw InvalidArgument("decay window reaches outside the truncation square");
  if (window.r_lo <= vc.max_radius())
    throw InvalidArgument("decay window must lie beyond all vortex points");
  const double ratio = cm.ratio();
  double sr = 0, sy = 0, srr = 0, sry = 0;
  long count = 0;
  for (int j = 0; j < d.ny(); ++j)
    for (int i = 0; i < d.nx(); ++i) {
      const double r = std::hypot(d.x(i), d.y(j));
      if (r < window.r_lo || r > window.r_hi) continue;
      const double u1 = sol.u1(i, j), u2 = sol.u2(i, j);
      const double w = u1 * u1 + ratio * u2 * u2;
      if (!(w >= 1e-300)) continue;
      const double y = std::log(w);
      sr += r;
      sy += y;
      srr += r * r;
      sry += r * y;
      ++count;
    }
  if (count < 100)
    throw InvalidArgument("decay window holds " + std::to_string(count) +
                          " usable nodes; at least 100 are required");
  const double n = double(count);
  const double slope = (n * sry - sr * sy) / (n * srr - sr * sr);
  return -slope;
}

struct DiagnosticsReport {
  double measured_T1 = 0.0, measured_T2 = 0.0;
  double predicted_T1 = 0.0, predicted_T2 = 0.0;
  std::array<double, 2> flux_errors{};
  std::optional<std::array<double, 2>> chern_measured;
  std::optional<std::array<double, 2>> chern_predicted;
  std::optional<std::array<double, 2>> charges_measured;
  std::optional<std::array<double, 2>> charges_predicted;
  std::optional<double> energy_topological;
  double energy_predicted = 0.0;
  std::optional<double> decay_rate_measured;
  std::optional<DecayWindow> decay_window;
  DecayRates rates;
  std::map<std::string, ScalarField> field_maps;
  std::string warning;
};

inline DiagnosticsReport diagnose(const Problem& p, const Solution& sol,
                                  const std::optional<PhysicalCouplings>& pc = std::nullopt,
                                  SignBranch sign = SignBranch::Upper,
                                  const std::optional<DecayWindow>& window = std::nullopt) {
  DiagnosticsReport rep;
  const auto m = measure_fluxes(sol, p.cm, p.vc);
  const auto pred = predicted_fluxes(p.cm, p.vc, pc);
  rep.warning = m.warning;
  rep.measured_T1 = m.T1;
  rep.measured_T2 = m.T2;
  rep.predicted_T1 = pred.T1;
  rep.predicted_T2 = pred.T2;
  rep.flux_errors = {std::abs(m.T1 - pred.T1), std::abs(m.T2 - pred.T2)};
  rep.energy_predicted = pred.energy;
  rep.rates = decay_rates(p.cm, pc);
  rep.field_maps.emplace("u1", sol.u1);
  rep.field_maps.emplace("u2", sol.u2);
  if (pc) {
    const double s = branch_sign(sign);
    auto maps = reconstruct_fields(sol, *pc, sign);
    rep.chern_measured = std::array{integrate(maps.Fhat) / (2 * pi),
                                    integrate(maps.Ftilde) / (2 * pi)};
    rep.chern_predicted = std::array{s * *pred.chern1, s * *pred.chern2};
    rep.charges_measured = std::array{integrate(maps.B1), integrate(maps.B2)};
    rep.charges_predicted = std::array{s * *pred.charge1, s * *pred.charge2};
    rep.energy_topological = topological_energy(sol, *pc, p.vc);
    rep.field_maps.emplace("q2", std::move(maps.q2));
    rep.field_maps.emplace("p2", std::move(maps.p2));
    rep.field_maps.emplace("B1", std::move(maps.B1));
    rep.field_maps.emplace("B2", std::move(maps.B2));
    rep.field_maps.emplace("Fhat", std::move(maps.Fhat));
    rep.field_maps.emplace("Ftilde", std::move(maps.Ftilde));
  }
  if (window && !p.domain.is_torus()) {
    rep.decay_window = window;
    rep.decay_rate_measured = fit_decay_rate(sol, p.cm, p.vc, *window);
  }
  return rep;
}

} // namespace bps
