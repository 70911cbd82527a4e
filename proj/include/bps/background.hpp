#pragma once

// Singular background functions absorbing the point sources, and the smooth
// source fields left over:
//
//   u₀,ᵢ = −½ Σ_zeros m ln(1 + λ|x−z|⁻⁴) + ½ Σ_poles m ln(1 + λ|x−z|⁻⁴)
//   Δu₀,ᵢ = 4π Σ_zeros m δ_z − 4π Σ_poles m δ_z − fᵢ
//   fᵢ = 8 Σ_zeros m λ|x−z|²/(λ+|x−z|⁴)² − 8 Σ_poles (same)
//
// so ∫fᵢ = 4π(Nᵢ − Pᵢ). On the torus both are periodized by a truncated
// lattice sum around the minimum image of each point.

#include <cmath>
#include <sstream>
#include <vector>

#include "bps/discretization.hpp"
#include "bps/model.hpp"

namespace bps {

inline constexpr double default_lambda = 10.0;
inline constexpr int default_copies = 3;

struct BackgroundData {
  ScalarField u01, u02;
  ScalarField f1, f2;
  double lambda = default_lambda;
  int copies = 0;
};

// How the torus source is represented.
enum class TorusSource {
  // Lattice sum of the plane source, shifted by the constant that restores
  // ∫f = 4π(N−P) exactly on the grid (the truncated tail is, to leading
  // order, a constant over the cell).
  LatticeSum,
  // u₀ solves Δu₀ = 4πΣδ − 4π(N−P)/|S| with zero mean; f is that constant.
  Constant,
};

namespace detail {

// ln(1 + λ/r⁴) from r², without overflow as r → 0.
inline double log_core(double r2, double lambda) {
  const double r4 = r2 * r2;
  if (r4 >= lambda) return std::log1p(lambda / r4);
  return std::log(lambda + r4) - 2.0 * std::log(r2);
}

inline double source_core(double r2, double lambda) {
  const double den = lambda + r2 * r2;
  return lambda * r2 / (den * den);
}

struct Sample {
  double u0 = 0.0;
  double f = 0.0;
};

// Plane background of one species at a point.
inline Sample plane_species(const std::vector<Vortex>& zeros, const std::vector<Vortex>& poles,
                            double lambda, double x, double y) {
  Sample z, p;
  for (const auto& v : zeros) {
    const double r2 = (x - v.at.x) * (x - v.at.x) + (y - v.at.y) * (y - v.at.y);
    z.u0 += v.multiplicity * log_core(r2, lambda);
    z.f += v.multiplicity * source_core(r2, lambda);
  }
  for (const auto& v : poles) {
    const double r2 = (x - v.at.x) * (x - v.at.x) + (y - v.at.y) * (y - v.at.y);
    p.u0 += v.multiplicity * log_core(r2, lambda);
    p.f += v.multiplicity * source_core(r2, lambda);
  }
  return {0.5 * (p.u0 - z.u0), 8.0 * (z.f - p.f)};
}

inline double wrap(double d, double L) { return d - L * std::round(d / L); }

inline Sample torus_species(const std::vector<Vortex>& zeros, const std::vector<Vortex>& poles,
                            double lambda, int copies, double L1, double L2, double x, double y) {
  auto accumulate = [&](const std::vector<Vortex>& list, Sample& s) {
    for (const auto& v : list) {
      const double dx = wrap(x - v.at.x, L1);
      const double dy = wrap(y - v.at.y, L2);
      double lu = 0.0, lf = 0.0;
      for (int k2 = -copies; k2 <= copies; ++k2) {
        const double ey = dy + k2 * L2;
        for (int k1 = -copies; k1 <= copies; ++k1) {
          const double ex = dx + k1 * L1;
          const double r2 = ex * ex + ey * ey;
          lu += log_core(r2, lambda);
          lf += source_core(r2, lambda);
        }
      }
      s.u0 += v.multiplicity * lu;
      s.f += v.multiplicity * lf;
    }
  };
  Sample z, p;
  accumulate(zeros, z);
  accumulate(poles, p);
  return {0.5 * (p.u0 - z.u0), 8.0 * (z.f - p.f)};
}

inline void check_placement(const VortexConfiguration& vc, const DomainSpec& grid) {
  vc.validate();
  const double tol = 1e-6 * std::min(grid.hx(), grid.hy());
  vc.for_each([&](const Vortex& v) {
    std::ostringstream where;
    where.precision(17);
    where << "(" << v.at.x << ", " << v.at.y << ")";
    if (!grid.contains(v.at))
      throw PlacementError("vortex point " + where.str() + " lies outside the domain");
    if (grid.distance_to_node(v.at) <= tol)
      throw PlacementError("vortex point " + where.str() + " coincides with a grid node");
  });
}

} // namespace detail

// u₀,₁ and u₀,₂ of the plane ansatz at an arbitrary point.
inline std::array<double, 2> plane_background_at(const VortexConfiguration& vc, double lambda,
                                                 const Point& x) {
  return {detail::plane_species(vc.zeros1, vc.poles1, lambda, x.x, x.y).u0,
          detail::plane_species(vc.zeros2, vc.poles2, lambda, x.x, x.y).u0};
}

inline BackgroundData plane_background(const VortexConfiguration& vc, double lambda,
                                       const DomainSpec& grid) {
  if (grid.is_torus()) throw InvalidArgument("plane_background requires a plane domain");
  if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
  detail::check_placement(vc, grid);
  BackgroundData bd{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid),
                    lambda, 0};
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const auto s1 = detail::plane_species(vc.zeros1, vc.poles1, lambda, x, y);
      const auto s2 = detail::plane_species(vc.zeros2, vc.poles2, lambda, x, y);
      bd.u01(i, j) = s1.u0;
      bd.f1(i, j) = s1.f;
      bd.u02(i, j) = s2.u0;
      bd.f2(i, j) = s2.f;
    }
  return bd;
}

inline BackgroundData torus_background(const VortexConfiguration& vc, double lambda, int copies,
                                       const DomainSpec& grid,
                                       TorusSource source = TorusSource::LatticeSum) {
  if (!grid.is_torus()) throw InvalidArgument("torus_background requires a torus domain");
  if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
  if (copies < 1) throw InvalidArgument("torus background needs copies >= 1");
  detail::check_placement(vc, grid);
  BackgroundData bd{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid),
                    lambda, copies};
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const auto s1 = detail::torus_species(vc.zeros1, vc.poles1, lambda, copies, grid.L1, grid.L2, x, y);
      const auto s2 = detail::torus_species(vc.zeros2, vc.poles2, lambda, copies, grid.L1, grid.L2, x, y);
      bd.u01(i, j) = s1.u0;
      bd.f1(i, j) = s1.f;
      bd.u02(i, j) = s2.u0;
      bd.f2(i, j) = s2.f;
    }

  const double area = grid.area();
  auto neutralize = [&](ScalarField& f, int net) {
    const double shift = (4.0 * pi * net - integrate(f)) / area;
    if (shift != 0.0)
      for (double& v : f.values()) v += shift;
  };
  neutralize(bd.f1, vc.net1());
  neutralize(bd.f2, vc.net2());

  if (source == TorusSource::Constant) {
    // Δ(u₀ + w) = 4πΣδ − mean(f) with Δw = f − mean(f).
    const TorusSpectral spectral(grid);
    auto to_constant = [&](ScalarField& u0, ScalarField& f) {
      u0 += spectral.solve_poisson(f);
      const double m = mean(u0);
      const double fm = mean(f);
      for (double& v : u0.values()) v -= m;
      for (double& v : f.values()) v = fm;
    };
    to_constant(bd.u01, bd.f1);
    to_constant(bd.u02, bd.f2);
  }
  return bd;
}

// ∫fᵢ − 4π(Nᵢ − Pᵢ) for each species.
inline std::array<double, 2> source_balance(const BackgroundData& bd,
                                            const VortexConfiguration& vc) {
  return {integrate(bd.f1) - 4.0 * pi * vc.net1(), integrate(bd.f2) - 4.0 * pi * vc.net2()};
}

} // namespace bps
