#pragma once

// Radially symmetric reference solver for configurations whose zeros and
// poles all sit at one point:
//
//   uᵢ'' + uᵢ'/r = Σⱼ aᵢⱼ tanh(uⱼ/2),   uᵢ ~ 2nᵢ ln r at 0,
//
// solved by Newton relaxation on a uniform mesh. The unknowns are
// wᵢ = uᵢ − sᵢ with sᵢ = 2nᵢ ln r · exp(−(r/2)⁴): the logarithm is carried
// analytically near the origin and wᵢ = uᵢ in the far field, so the tail
// is computed without cancellation. At r = R the solution is matched to the
// decaying solutions of the linearized system Δu = (A/2)u: in the
// eigenbasis of A/2 each mode behaves like K₀(κr), giving the Robin
// condition c' = −κ K₁(κR)/K₀(κR) c.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "bps/error.hpp"
#include "bps/model.hpp"

namespace bps {

struct RadialProblem {
  CouplingMatrix cm;
  int n1 = 0; // zeros minus poles of q at the centre
  int n2 = 0;
  double R = 20.0;
  int nodes = 2001;

  void validate() const {
    cm.validate();
    if (!(R > 0)) throw InvalidArgument("radial problem needs R > 0");
    if (nodes < 1000) throw InvalidArgument("radial problem needs at least 1000 nodes");
  }
};

struct RadialProfile {
  std::vector<double> r;
  std::vector<double> w1, w2;
  int n1 = 0, n2 = 0;
  double residual_sup = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  // Linear-tail continuation beyond R.
  Eigen::Matrix2d tail_basis = Eigen::Matrix2d::Identity();
  Eigen::Vector2d tail_rates = Eigen::Vector2d::Zero();

  double R() const { return r.back(); }

  // Part of u carried analytically: 2n ln r, cut off smoothly at r ≈ 2.
  static double singular_part(int n, double rho) {
    if (n == 0) return 0.0;
    const double q = rho / 2.0;
    return 2.0 * n * std::log(rho) * std::exp(-q * q * q * q);
  }

  // u_i(ρ) for 0 < ρ ≤ R by linear interpolation of w_i.
  double u(int species, double rho) const {
    if (!(rho > 0.0) || rho > R() * (1 + 1e-12))
      throw InvalidArgument("radial profile evaluated outside (0, R]");
    const auto& w = species == 1 ? w1 : w2;
    const int n = species == 1 ? n1 : n2;
    const double dr = r[1] - r[0];
    const std::size_t k = std::min(std::size_t(rho / dr), r.size() - 2);
    const double t = (rho - r[k]) / dr;
    return singular_part(n, rho) + (1 - t) * w[k] + t * w[k + 1];
  }

  double u1(double rho) const { return u(1, rho); }
  double u2(double rho) const { return u(2, rho); }

  // 2π∫₀^∞ tanh(u_i/2) r dr: trapezoid on the mesh plus the linear tail.
  std::array<double, 2> fluxes() const {
    std::array<double, 2> out{0.0, 0.0};
    const double dr = r[1] - r[0];
    for (int s = 1; s <= 2; ++s) {
      double acc = 0.0;
      for (std::size_t k = 1; k < r.size(); ++k) {
        const double wk = k + 1 == r.size() ? 0.5 : 1.0;
        acc += wk * std::tanh(0.5 * u(s, r[k])) * r[k];
      }
      out[s - 1] = 2 * pi * acc * dr;
    }
    const double Rr = R();
    const Eigen::Vector2d uR(u1(Rr), u2(Rr));
    const Eigen::Vector2d c = tail_basis.inverse() * uR;
    for (int j = 0; j < 2; ++j) {
      const double kap = tail_rates[j];
      const double weight = Rr * bessel_ratio(kap * Rr) / kap; // ∫_R^∞ K₀(κr) r dr / K₀(κR)
      for (int s = 0; s < 2; ++s) out[s] += 2 * pi * 0.5 * tail_basis(s, j) * c[j] * weight;
    }
    return out;
  }

  // K₁(x)/K₀(x)
  static double bessel_ratio(double x) {
    if (x > 600.0) return 1.0 + 1.0 / (2.0 * x) - 1.0 / (8.0 * x * x);
    return std::cyl_bessel_k(1.0, x) / std::cyl_bessel_k(0.0, x);
  }
};

inline RadialProfile solve_radial(const RadialProblem& rp, double tol = 1e-10, int max_iter = 60) {
  rp.validate();
  const auto& cm = rp.cm;
  const int M = rp.nodes - 1;
  const double dr = rp.R / M;
  const double R = rp.R;

  RadialProfile prof;
  prof.n1 = rp.n1;
  prof.n2 = rp.n2;
  prof.r.resize(M + 1);
  for (int k = 0; k <= M; ++k) prof.r[k] = k * dr;
  prof.w1.assign(M + 1, 0.0);
  prof.w2.assign(M + 1, 0.0);

  // Tail: A/2 = V diag(κ²) V⁻¹, Robin matrix Q = V diag(κ K₁/K₀) V⁻¹.
  const Eigen2 e = eigen2(cm.a11 / 2, cm.a12 / 2, cm.a21 / 2, cm.a22 / 2);
  Eigen::Matrix2d V;
  V << e.vectors[0][0], e.vectors[0][1], e.vectors[1][0], e.vectors[1][1];
  Eigen::Vector2d kappa(std::sqrt(e.values[0]), std::sqrt(e.values[1]));
  prof.tail_basis = V;
  prof.tail_rates = kappa;
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  for (int j = 0; j < 2; ++j) D(j, j) = kappa[j] * RadialProfile::bessel_ratio(kappa[j] * R);
  const Eigen::Matrix2d Q = V * D * V.inverse();

  const int n[2] = {rp.n1, rp.n2};
  const double A[2][2] = {{cm.a11, cm.a12}, {cm.a21, cm.a22}};

  // Stencil coefficients of the radial Laplacian at node k ≥ 1.
  auto coeffs = [&](int k, double& cm_, double& c0, double& cp) {
    const double rk = prof.r[k];
    cm_ = 1.0 / (dr * dr) - 1.0 / (2.0 * rk * dr);
    c0 = -2.0 / (dr * dr);
    cp = 1.0 / (dr * dr) + 1.0 / (2.0 * rk * dr);
  };

  // s at nodes 1..M+1 (M+1 is the Robin ghost), and the source
  // g = Δₕs − φ·Δₕ(2n ln r): the discrete Laplacian of the carried part
  // minus the stencil's truncation error on the exactly harmonic logarithm.
  std::vector<double> s[2], g[2];
  for (int j = 0; j < 2; ++j) {
    s[j].assign(M + 2, 0.0);
    g[j].assign(M + 1, 0.0);
    if (n[j] == 0) continue;
    for (int k = 1; k <= M + 1; ++k) s[j][k] = RadialProfile::singular_part(n[j], k * dr);
    for (int k = 1; k <= M; ++k) {
      const double q = prof.r[k] / 2.0;
      const double phi = std::exp(-q * q * q * q);
      double cm_, c0, cp;
      coeffs(k, cm_, c0, cp);
      const double c[3] = {cm_, c0, cp};
      double acc = 0.0;
      for (int m = k - 1; m <= k + 1; ++m) {
        if (m == 0) continue; // L·(φ(0) − φ) → 0 at the origin
        const double L = 2.0 * n[j] * std::log(m * dr);
        acc += c[m - k + 1] * (s[j][m] - phi * L);
      }
      g[j][k] = acc;
    }
  }

  // τ_j and dτ_j/dw_j at node k.
  auto tau = [&](int j, int k, const std::vector<double>& w, double& dtau) {
    if (k == 0 && n[j] != 0) {
      dtau = 0.0;
      return n[j] > 0 ? -1.0 : 1.0;
    }
    const double t = std::tanh(0.5 * (s[j][k] + w[k]));
    dtau = 0.5 * (1.0 - t * t);
    return t;
  };

  const int N = 2 * (M + 1);
  auto idx = [](int k, int sp) { return 2 * k + sp; };

  auto evaluate = [&](const std::vector<double>* w, Eigen::VectorXd& F,
                      std::vector<Eigen::Triplet<double>>* jac) {
    F.setZero(N);
    for (int k = 0; k <= M; ++k) {
      double t[2], dt[2];
      for (int j = 0; j < 2; ++j) t[j] = tau(j, k, w[j], dt[j]);
      for (int sp = 0; sp < 2; ++sp) {
        const auto& ws = w[sp];
        double lap;
        const int row = idx(k, sp);
        if (k == 0) {
          lap = 4.0 * (ws[1] - ws[0]) / (dr * dr);
          if (jac) {
            jac->emplace_back(row, idx(0, sp), -4.0 / (dr * dr));
            jac->emplace_back(row, idx(1, sp), 4.0 / (dr * dr));
          }
        } else {
          double cm_, c0, cp;
          coeffs(k, cm_, c0, cp);
          if (k < M) {
            lap = cm_ * ws[k - 1] + c0 * ws[k] + cp * ws[k + 1];
            if (jac) {
              jac->emplace_back(row, idx(k - 1, sp), cm_);
              jac->emplace_back(row, idx(k, sp), c0);
              jac->emplace_back(row, idx(k + 1, sp), cp);
            }
          } else {
            // Ghost from u_{M+1} = u_{M−1} − 2dr·(Q u(R))_s.
            double ghost = ws[M - 1] + s[sp][M - 1] - s[sp][M + 1];
            for (int j = 0; j < 2; ++j) ghost -= 2.0 * dr * Q(sp, j) * (w[j][M] + s[j][M]);
            lap = cm_ * ws[M - 1] + c0 * ws[M] + cp * ghost;
            if (jac) {
              jac->emplace_back(row, idx(M - 1, sp), cm_ + cp);
              jac->emplace_back(row, idx(M, sp), c0);
              for (int j = 0; j < 2; ++j)
                jac->emplace_back(row, idx(M, j), -cp * 2.0 * dr * Q(sp, j));
            }
          }
          lap += g[sp][k];
        }
        F[row] = lap - (A[sp][0] * t[0] + A[sp][1] * t[1]);
        if (jac)
          for (int j = 0; j < 2; ++j)
            if (A[sp][j] != 0.0 && dt[j] != 0.0) jac->emplace_back(row, idx(k, j), -A[sp][j] * dt[j]);
      }
    }
  };

  std::vector<double> w[2] = {prof.w1, prof.w2};
  Eigen::VectorXd F(N), Ftrial(N);
  evaluate(w, F, nullptr);
  prof.residual_sup = F.lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  while (prof.residual_sup > tol && prof.iterations < max_iter) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(N) * 6);
    evaluate(w, F, &trip);
    Eigen::SparseMatrix<double> J(N, N);
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd step = lu.solve(-F);

    // Backtrack on the residual 2-norm.
    const double f0 = F.norm();
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial[2];
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      trial[0] = w[0];
      trial[1] = w[1];
      for (int k = 0; k <= M; ++k)
        for (int s = 0; s < 2; ++s) trial[s][k] += t * step[idx(k, s)];
      evaluate(trial, Ftrial, nullptr);
      if (Ftrial.allFinite() && Ftrial.norm() <= (1.0 - 1e-4 * t) * f0 + 1e-13 * N) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    w[0] = std::move(trial[0]);
    w[1] = std::move(trial[1]);
    F = Ftrial;
    prof.residual_sup = F.lpNorm<Eigen::Infinity>();
    ++prof.iterations;
  }
  prof.w1 = std::move(w[0]);
  prof.w2 = std::move(w[1]);
  prof.converged = prof.residual_sup <= tol;
  return prof;
}

} // namespace bps
