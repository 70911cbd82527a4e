#pragma once

// Variational solver for the reduced system
//
//   Δvᵢ = Σⱼ aᵢⱼ tanh((u₀,ⱼ + vⱼ)/2) + fᵢ,   i = 1, 2.
//
// The system is the Euler–Lagrange equation of the strictly convex functional
//
//   J(v) = ½ Σᵢⱼ Wᵢⱼ ∫∇vᵢ·∇vⱼ + Σᵢ cᵢ ∫Λ(u₀,ᵢ + vᵢ) + Σᵢ ∫(W f)ᵢ vᵢ,
//   Λ(w) = ln((eʷ + e⁻ʷ + 2)/4) = 2 ln cosh(w/2),
//
// where W = diag(1, a12/a21)·adj(A) and W·A = diag(c₁, c₂); in decoupled mode
// W = I and c = (a11, a22). Its gradient is −W·(residual), its Hessian
// W⊗(−Δ) + diag(cᵢ Λ''(uᵢ)), which is symmetric positive definite. J is
// minimized by Newton's method with Armijo backtracking.
//
// On the plane square the unknown v is extended by v = −u₀ one spacing
// outside the square, i.e. u = 0 there, the finite-R version of u → 0 at
// infinity.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "bps/background.hpp"
#include "bps/discretization.hpp"
#include "bps/model.hpp"

namespace bps {

struct Problem {
  CouplingMatrix cm;
  VortexConfiguration vc;
  DomainSpec domain;
  BackgroundData bd;
  double tol_residual = 1e-10;
  int max_iter = 50;
  bool force = false;
  // Largest sup-norm change of v accepted in one Newton step.
  double step_cap = 50.0;
};

// Builds a problem with the default background for its domain.
inline Problem make_problem(const CouplingMatrix& cm, const VortexConfiguration& vc,
                            const DomainSpec& domain, double lambda = default_lambda,
                            int copies = default_copies) {
  cm.validate();
  Problem p{cm, vc, domain, {}};
  p.bd = domain.is_torus() ? torus_background(vc, lambda, copies, domain)
                           : plane_background(vc, lambda, domain);
  return p;
}

struct FieldPair {
  ScalarField v1, v2;
};

struct Solution {
  ScalarField v1, v2;
  ScalarField u1, u2;
  double residual_sup = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double J_value = 0.0;
  bool converged = false;
  bool stalled = false;
  std::string status;
  // Per accepted iterate, starting with the initial guess.
  std::vector<double> J_history;
  std::vector<double> residual_history;
  std::vector<double> mean_v1_history;
  std::vector<double> mean_v2_history;
};

// Λ(w) = |w| + 2 ln(1 + e^{−|w|}) − 2 ln 2.
inline double log_cosh_potential(double w) {
  const double a = std::abs(w);
  return a + 2.0 * std::log1p(std::exp(-a)) - 2.0 * std::numbers::ln2;
}

// Λ''(w) = ½ sech²(w/2).
inline double log_cosh_curvature(double w) {
  const double e = std::exp(-std::abs(w));
  return 2.0 * e / ((1.0 + e) * (1.0 + e));
}

struct FunctionalWeights {
  double w11 = 1, w12 = 0, w22 = 1; // symmetric W
  double c1 = 1, c2 = 1;            // W·A = diag(c1, c2)

  static FunctionalWeights of(const CouplingMatrix& cm) {
    FunctionalWeights w;
    if (cm.decoupled()) {
      w.c1 = cm.a11;
      w.c2 = cm.a22;
      return w;
    }
    const double r = cm.ratio();
    w.w11 = cm.a22;
    w.w12 = -cm.a12;
    w.w22 = r * cm.a11;
    w.c1 = cm.det();
    w.c2 = r * cm.det();
    return w;
  }
};

namespace detail {

inline void check_problem(const Problem& p) {
  p.cm.validate();
  p.domain.validate();
  for (const auto* f : {&p.bd.u01, &p.bd.u02, &p.bd.f1, &p.bd.f2})
    if (!(f->domain() == p.domain))
      throw InvalidArgument("background data lives on a different domain than the problem");
}

// ∫∇a·∇b: spectral on the torus, sum over grid edges (zero ghosts) on the plane.
inline double dirichlet_form(const ScalarField& a, const ScalarField& b,
                             const TorusSpectral* spectral) {
  const auto& d = a.domain();
  if (d.is_torus()) {
    const ScalarField lap = spectral ? spectral->laplacian(b) : laplacian(b);
    return -inner(a, lap);
  }
  const int n = d.n;
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double da = a(i, j), db = b(i, j);
      const double ea = i + 1 < n ? a(i + 1, j) : 0.0, eb = i + 1 < n ? b(i + 1, j) : 0.0;
      const double na = j + 1 < n ? a(i, j + 1) : 0.0, nb = j + 1 < n ? b(i, j + 1) : 0.0;
      s += (ea - da) * (eb - db) + (na - da) * (nb - db);
      if (i == 0) s += da * db;
      if (j == 0) s += da * db;
    }
  return s;
}

// Per-problem data shared by functional and residual evaluations.
struct Context {
  const TorusSpectral* spectral = nullptr;
  // Plane only: contribution of the ghost layer where u = 0 (v = −u₀) to the
  // 5-point Laplacian at boundary nodes, divided by h²; empty on the torus.
  std::optional<FieldPair> lift;
};

struct FunctionalValue {
  double value = 0.0;
  double magnitude = 0.0; // sum of absolute contributions, for roundoff bounds
};

inline FunctionalValue functional(const Problem& p, const ScalarField& v1, const ScalarField& v2,
                                  const Context& ctx) {
  const TorusSpectral* spectral = ctx.spectral;
  const auto w = FunctionalWeights::of(p.cm);
  const double cell = p.domain.hx() * p.domain.hy();
  const double d11 = dirichlet_form(v1, v1, spectral);
  const double d22 = dirichlet_form(v2, v2, spectral);
  const double d12 = w.w12 != 0.0 ? dirichlet_form(v1, v2, spectral) : 0.0;
  FunctionalValue out;
  out.value = 0.5 * (w.w11 * d11 + 2.0 * w.w12 * d12 + w.w22 * d22);
  out.magnitude = 0.5 * (std::abs(w.w11 * d11) + 2.0 * std::abs(w.w12 * d12) + std::abs(w.w22 * d22));
  double pot = 0.0, lin = 0.0, mag = 0.0;
  for (std::size_t k = 0; k < v1.size(); ++k) {
    const double l1 = w.c1 * log_cosh_potential(p.bd.u01[k] + v1[k]);
    const double l2 = w.c2 * log_cosh_potential(p.bd.u02[k] + v2[k]);
    double f1 = p.bd.f1[k], f2 = p.bd.f2[k];
    if (ctx.lift) {
      f1 -= ctx.lift->v1[k];
      f2 -= ctx.lift->v2[k];
    }
    const double g1 = w.w11 * f1 + w.w12 * f2;
    const double g2 = w.w12 * f1 + w.w22 * f2;
    const double li = g1 * v1[k] + g2 * v2[k];
    pot += l1 + l2;
    lin += li;
    mag += std::abs(l1) + std::abs(l2) + std::abs(g1 * v1[k]) + std::abs(g2 * v2[k]);
  }
  out.value += cell * (pot + lin);
  out.magnitude += cell * mag;
  return out;
}

inline FieldPair residual(const Problem& p, const ScalarField& v1, const ScalarField& v2,
                          const Context& ctx) {
  const TorusSpectral* spectral = ctx.spectral;
  FieldPair r;
  if (p.domain.is_torus()) {
    r.v1 = spectral ? spectral->laplacian(v1) : laplacian(v1);
    r.v2 = spectral ? spectral->laplacian(v2) : laplacian(v2);
  } else {
    r.v1 = plane_laplacian(v1);
    r.v2 = plane_laplacian(v2);
    if (ctx.lift) {
      r.v1 += ctx.lift->v1;
      r.v2 += ctx.lift->v2;
    }
  }
  const auto& cm = p.cm;
  for (std::size_t k = 0; k < v1.size(); ++k) {
    const double t1 = std::tanh(0.5 * (p.bd.u01[k] + v1[k]));
    const double t2 = std::tanh(0.5 * (p.bd.u02[k] + v2[k]));
    r.v1[k] -= cm.a11 * t1 + cm.a12 * t2 + p.bd.f1[k];
    r.v2[k] -= cm.a21 * t1 + cm.a22 * t2 + p.bd.f2[k];
  }
  return r;
}

inline FieldPair boundary_lift(const Problem& p) {
  const auto& d = p.domain;
  FieldPair lift{ScalarField(d), ScalarField(d)};
  const int n = d.n;
  const double h = d.hx();
  const double inv_h2 = 1.0 / (h * h);
  auto ghost = [&](int i, int j, double gx, double gy) {
    const auto u0 = plane_background_at(p.vc, p.bd.lambda, {gx, gy});
    lift.v1(i, j) -= u0[0] * inv_h2;
    lift.v2(i, j) -= u0[1] * inv_h2;
  };
  for (int k = 0; k < n; ++k) {
    ghost(0, k, d.x(0) - h, d.y(k));
    ghost(n - 1, k, d.x(n - 1) + h, d.y(k));
    ghost(k, 0, d.x(k), d.y(0) - h);
    ghost(k, n - 1, d.x(k), d.y(n - 1) + h);
  }
  return lift;
}

inline Context make_context(const Problem& p, const TorusSpectral* spectral) {
  Context ctx;
  ctx.spectral = spectral;
  if (!p.domain.is_torus() && !p.vc.empty()) ctx.lift = boundary_lift(p);
  return ctx;
}

inline double sup2(const FieldPair& r) { return std::max(r.v1.sup_norm(), r.v2.sup_norm()); }

// Newton systems H δ = W·R with H = W⊗(−Δ) + diag(c₁S₁, c₂S₂).
class NewtonSystem {
public:
  explicit NewtonSystem(const Problem& p) : problem_(p), w_(FunctionalWeights::of(p.cm)) {
    if (p.domain.is_torus()) {
      spectral_.emplace(p.domain);
    } else {
      assemble_plane_pattern();
    }
  }

  const TorusSpectral* spectral() const { return spectral_ ? &*spectral_ : nullptr; }

  FieldPair solve(const FieldPair& residual, const ScalarField& s1, const ScalarField& s2) {
    return spectral_ ? solve_torus(residual, s1, s2) : solve_plane(residual, s1, s2);
  }

  int last_inner_iterations() const { return inner_iterations_; }

private:
  static constexpr double curvature_floor = 1e-14;

  std::pair<double, double> weighted(double r1, double r2) const {
    return {w_.w11 * r1 + w_.w12 * r2, w_.w12 * r1 + w_.w22 * r2};
  }

  void assemble_plane_pattern() {
    const int n = problem_.domain.n;
    const std::size_t N = problem_.domain.size();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(N * 14);
    const double W[2][2] = {{w_.w11, w_.w12}, {w_.w12, w_.w22}};
    auto node = [n](int i, int j) { return std::size_t(j) * n + i; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t k = node(i, j);
        std::size_t nb[4];
        int count = 0;
        if (i > 0) nb[count++] = node(i - 1, j);
        if (i + 1 < n) nb[count++] = node(i + 1, j);
        if (j > 0) nb[count++] = node(i, j - 1);
        if (j + 1 < n) nb[count++] = node(i, j + 1);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            // Diagonal entries are always stored so the curvature can be added in place.
            if (W[a][b] == 0.0 && a != b) continue;
            const auto row = Eigen::Index(2 * k + a);
            t.emplace_back(row, Eigen::Index(2 * k + b), 4.0 * W[a][b]);
            for (int q = 0; q < count; ++q)
              t.emplace_back(row, Eigen::Index(2 * nb[q] + b), -W[a][b]);
          }
      }
    base_.resize(Eigen::Index(2 * N), Eigen::Index(2 * N));
    base_.setFromTriplets(t.begin(), t.end());
    base_.makeCompressed();
    hessian_ = base_;
    chol_.analyzePattern(hessian_);
  }

  FieldPair solve_plane(const FieldPair& r, const ScalarField& s1, const ScalarField& s2) {
    const std::size_t N = problem_.domain.size();
    const double h2 = problem_.domain.hx() * problem_.domain.hy();
    hessian_ = base_;
    Eigen::VectorXd rhs(2 * N);
    auto diag = hessian_.diagonal();
    for (std::size_t k = 0; k < N; ++k) {
      diag[Eigen::Index(2 * k)] += h2 * w_.c1 * std::max(s1[k], curvature_floor);
      diag[Eigen::Index(2 * k + 1)] += h2 * w_.c2 * std::max(s2[k], curvature_floor);
      const auto [g1, g2] = weighted(r.v1[k], r.v2[k]);
      rhs[Eigen::Index(2 * k)] = h2 * g1;
      rhs[Eigen::Index(2 * k + 1)] = h2 * g2;
    }
    chol_.factorize(hessian_);
    if (chol_.info() != Eigen::Success) throw Error("Newton system factorization failed");
    const Eigen::VectorXd x = chol_.solve(rhs);
    FieldPair out{ScalarField(problem_.domain), ScalarField(problem_.domain)};
    for (std::size_t k = 0; k < N; ++k) {
      out.v1[k] = x[Eigen::Index(2 * k)];
      out.v2[k] = x[Eigen::Index(2 * k + 1)];
    }
    inner_iterations_ = 1;
    return out;
  }

  // Preconditioned conjugate gradients; the preconditioner is the operator
  // with the curvature replaced by its grid mean, diagonal in Fourier space.
  FieldPair solve_torus(const FieldPair& r, const ScalarField& s1, const ScalarField& s2) {
    const auto& d = problem_.domain;
    const std::size_t N = d.size();
    const TorusSpectral& sp = *spectral_;
    std::vector<double> c1(N), c2(N);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      c1[k] = w_.c1 * std::max(s1[k], curvature_floor);
      c2[k] = w_.c2 * std::max(s2[k], curvature_floor);
      m1 += c1[k];
      m2 += c2[k];
    }
    m1 /= double(N);
    m2 /= double(N);

    auto apply = [&](const std::vector<double>& x1, const std::vector<double>& x2,
                     std::vector<double>& y1, std::vector<double>& y2) {
      auto X1 = sp.forward(x1);
      auto X2 = sp.forward(x2);
      const auto k2 = sp.wavenumber_sq();
      for (std::size_t m = 0; m < X1.size(); ++m) {
        const std::complex<double> a = X1[m] * k2[m], b = X2[m] * k2[m];
        X1[m] = w_.w11 * a + w_.w12 * b;
        X2[m] = w_.w12 * a + w_.w22 * b;
      }
      y1 = sp.backward(std::move(X1));
      y2 = sp.backward(std::move(X2));
      for (std::size_t k = 0; k < N; ++k) {
        y1[k] += c1[k] * x1[k];
        y2[k] += c2[k] * x2[k];
      }
    };
    auto precondition = [&](const std::vector<double>& x1, const std::vector<double>& x2,
                            std::vector<double>& y1, std::vector<double>& y2) {
      auto X1 = sp.forward(x1);
      auto X2 = sp.forward(x2);
      const auto k2 = sp.wavenumber_sq();
      for (std::size_t m = 0; m < X1.size(); ++m) {
        const double p11 = w_.w11 * k2[m] + m1, p12 = w_.w12 * k2[m], p22 = w_.w22 * k2[m] + m2;
        const double det = p11 * p22 - p12 * p12;
        const std::complex<double> a = X1[m], b = X2[m];
        X1[m] = (p22 * a - p12 * b) / det;
        X2[m] = (p11 * b - p12 * a) / det;
      }
      y1 = sp.backward(std::move(X1));
      y2 = sp.backward(std::move(X2));
    };
    auto dot = [N](const std::vector<double>& a1, const std::vector<double>& a2,
                   const std::vector<double>& b1, const std::vector<double>& b2) {
      double s = 0.0;
      for (std::size_t k = 0; k < N; ++k) s += a1[k] * b1[k] + a2[k] * b2[k];
      return s;
    };

    std::vector<double> b1(N), b2(N);
    for (std::size_t k = 0; k < N; ++k) std::tie(b1[k], b2[k]) = weighted(r.v1[k], r.v2[k]);
    std::vector<double> x1(N, 0.0), x2(N, 0.0), r1 = b1, r2 = b2, z1, z2, q1, q2;
    precondition(r1, r2, z1, z2);
    std::vector<double> p1 = z1, p2 = z2;
    double rz = dot(r1, r2, z1, z2);
    const double bnorm = std::sqrt(dot(b1, b2, b1, b2));
    int it = 0;
    if (bnorm > 0.0) {
      for (; it < max_inner; ++it) {
        apply(p1, p2, q1, q2);
        const double alpha = rz / dot(p1, p2, q1, q2);
        for (std::size_t k = 0; k < N; ++k) {
          x1[k] += alpha * p1[k];
          x2[k] += alpha * p2[k];
          r1[k] -= alpha * q1[k];
          r2[k] -= alpha * q2[k];
        }
        if (std::sqrt(dot(r1, r2, r1, r2)) <= inner_rtol * bnorm) {
          ++it;
          break;
        }
        precondition(r1, r2, z1, z2);
        const double rz_new = dot(r1, r2, z1, z2);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < N; ++k) {
          p1[k] = z1[k] + beta * p1[k];
          p2[k] = z2[k] + beta * p2[k];
        }
      }
    }
    inner_iterations_ = it;
    return {ScalarField(d, std::move(x1)), ScalarField(d, std::move(x2))};
  }

  static constexpr int max_inner = 2000;
  static constexpr double inner_rtol = 1e-13;

  const Problem& problem_;
  FunctionalWeights w_;
  std::optional<TorusSpectral> spectral_;
  Eigen::SparseMatrix<double> base_, hessian_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> chol_;
  int inner_iterations_ = 0;
};

} // namespace detail

// Discrete J at (v1, v2).
inline double evaluate_functional(const Problem& p, const ScalarField& v1, const ScalarField& v2) {
  detail::check_problem(p);
  return detail::functional(p, v1, v2, detail::make_context(p, nullptr)).value;
}

// Residuals of both reduced equations at the nodes.
inline FieldPair residual(const Problem& p, const ScalarField& v1, const ScalarField& v2) {
  detail::check_problem(p);
  return detail::residual(p, v1, v2, detail::make_context(p, nullptr));
}

// ∂J/∂vᵢ at each node (derivative of the discrete sum with respect to the
// nodal value): −cell·(W·R)ᵢ.
inline FieldPair functional_gradient(const Problem& p, const ScalarField& v1,
                                     const ScalarField& v2) {
  auto r = residual(p, v1, v2);
  const auto w = FunctionalWeights::of(p.cm);
  const double cell = p.domain.hx() * p.domain.hy();
  for (std::size_t k = 0; k < r.v1.size(); ++k) {
    const double g1 = w.w11 * r.v1[k] + w.w12 * r.v2[k];
    const double g2 = w.w12 * r.v1[k] + w.w22 * r.v2[k];
    r.v1[k] = -cell * g1;
    r.v2[k] = -cell * g2;
  }
  return r;
}

inline Solution solve(const Problem& p, const std::optional<FieldPair>& initial = std::nullopt) {
  detail::check_problem(p);
  if (p.domain.is_torus()) {
    const auto feas = check_torus_feasibility(p.cm, p.vc, p.domain.area());
    if (!feas.feasible && !p.force)
      throw InfeasibleError("torus configuration violates the solvability condition");
  }

  detail::NewtonSystem system(p);
  const detail::Context ctx = detail::make_context(p, system.spectral());

  Solution sol;
  sol.v1 = initial ? initial->v1 : ScalarField(p.domain);
  sol.v2 = initial ? initial->v2 : ScalarField(p.domain);
  sol.v1.check_same(p.bd.u01);
  sol.v2.check_same(p.bd.u02);

  constexpr double armijo = 1e-4;
  constexpr int max_halvings = 30;
  const double cell = p.domain.hx() * p.domain.hy();

  auto fval = detail::functional(p, sol.v1, sol.v2, ctx);
  auto res = detail::residual(p, sol.v1, sol.v2, ctx);
  sol.residual_sup = detail::sup2(res);
  auto record = [&] {
    sol.J_history.push_back(fval.value);
    sol.residual_history.push_back(sol.residual_sup);
    sol.mean_v1_history.push_back(mean(sol.v1));
    sol.mean_v2_history.push_back(mean(sol.v2));
  };
  record();

  const auto w = FunctionalWeights::of(p.cm);
  ScalarField s1(p.domain), s2(p.domain);
  while (true) {
    if (sol.residual_sup <= p.tol_residual) {
      sol.converged = true;
      sol.status = "converged";
      break;
    }
    if (sol.iterations >= p.max_iter) {
      sol.status = "maximum iterations reached";
      break;
    }
    for (std::size_t k = 0; k < s1.size(); ++k) {
      s1[k] = log_cosh_curvature(p.bd.u01[k] + sol.v1[k]);
      s2[k] = log_cosh_curvature(p.bd.u02[k] + sol.v2[k]);
    }
    FieldPair step = system.solve(res, s1, s2);
    const double len = std::max(step.v1.sup_norm(), step.v2.sup_norm());
    if (!std::isfinite(len)) {
      sol.stalled = true;
      sol.status = "non-finite Newton step";
      break;
    }
    if (len > p.step_cap) {
      step.v1 *= p.step_cap / len;
      step.v2 *= p.step_cap / len;
    }

    // Directional derivative ⟨∇J, δ⟩ = −cell·⟨W·R, δ⟩.
    double slope = 0.0;
    for (std::size_t k = 0; k < res.v1.size(); ++k) {
      const double g1 = w.w11 * res.v1[k] + w.w12 * res.v2[k];
      const double g2 = w.w12 * res.v1[k] + w.w22 * res.v2[k];
      slope -= g1 * step.v1[k] + g2 * step.v2[k];
    }
    slope *= cell;
    // Differences of J below this are rounding noise.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * fval.magnitude;

    double t = 1.0;
    bool accepted = false;
    ScalarField trial1, trial2;
    detail::FunctionalValue trial;
    for (int halving = 0; halving <= max_halvings; ++halving, t *= 0.5) {
      trial1 = sol.v1;
      trial2 = sol.v2;
      for (std::size_t k = 0; k < trial1.size(); ++k) {
        trial1[k] += t * step.v1[k];
        trial2[k] += t * step.v2[k];
      }
      trial = detail::functional(p, trial1, trial2, ctx);
      if (std::isfinite(trial.value) &&
          trial.value <= fval.value + armijo * t * std::min(slope, 0.0) + noise) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      sol.stalled = true;
      sol.status = "line search stalled";
      break;
    }
    sol.v1 = std::move(trial1);
    sol.v2 = std::move(trial2);
    fval = trial;
    res = detail::residual(p, sol.v1, sol.v2, ctx);
    sol.residual_sup = detail::sup2(res);
    ++sol.iterations;
    record();
  }

  sol.J_value = fval.value;
  sol.u1 = p.bd.u01 + sol.v1;
  sol.u2 = p.bd.u02 + sol.v2;
  return sol;
}

} // namespace bps
