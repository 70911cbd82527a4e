#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bps/model.hpp"
#include "support.hpp"

using namespace bps;
using namespace bps::testing;

namespace {

VortexConfiguration counts(int N1, int N2, int P1, int P2) {
  VortexConfiguration vc;
  if (N1) vc.zeros1.push_back({{0.1, 0.2}, N1});
  if (N2) vc.zeros2.push_back({{-0.3, 0.4}, N2});
  if (P1) vc.poles1.push_back({{0.5, -0.6}, P1});
  if (P2) vc.poles2.push_back({{-0.7, -0.8}, P2});
  return vc;
}

} // namespace

TEST(Couplings, FromPhysical) {
  EXPECT_EQ(couplings_from_physical(reference_pc), (CouplingMatrix{8, -4, -4, 4}));
  EXPECT_DOUBLE_EQ(couplings_from_physical(reference_pc).det(), 16.0);

  const auto diag = couplings_from_physical({1, 0, 0, 1});
  EXPECT_EQ(diag, (CouplingMatrix{4, 0, 0, 4}));
  EXPECT_TRUE(diag.decoupled());
  EXPECT_DOUBLE_EQ(diag.det(), 16.0);

  const auto m = couplings_from_physical({2, 1, 1, 2});
  EXPECT_EQ(m, (CouplingMatrix{20, 16, 16, 20}));
  EXPECT_DOUBLE_EQ(m.det(), 144.0);
}

TEST(Couplings, DeterminantIsSixteenTimesSquare) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 100; ++k) {
    PhysicalCouplings pc{u(rng), u(rng), u(rng), u(rng)};
    const auto cm = couplings_from_physical(pc);
    EXPECT_EQ(cm.a12, cm.a21);
    EXPECT_NEAR(cm.det(), 16 * pc.det() * pc.det(), 1e-9 * (1 + cm.a11 * cm.a22));
  }
}

TEST(Couplings, Rejected) {
  EXPECT_THROW(couplings_from_physical({1, 2, 2, 4}), InvalidArgument);
  EXPECT_THROW((CouplingMatrix{0, 0, 0, 1}.validate()), InvalidArgument);
  EXPECT_THROW((CouplingMatrix{4, 1, -1, 4}.validate()), InvalidArgument);
  EXPECT_THROW((CouplingMatrix{1, 2, 2, 1}.validate()), InvalidArgument);
  EXPECT_THROW((CouplingMatrix{4, 1, 0, 4}.validate()), InvalidArgument);
  EXPECT_NO_THROW((CouplingMatrix{6, 2, 1, 3}.validate()));
}

TEST(Feasibility, Examples) {
  const double area = 4 * pi * pi;
  auto ok = check_torus_feasibility(coupled, counts(1, 0, 0, 0), area);
  EXPECT_DOUBLE_EQ(ok.lhs1, 4.0);
  EXPECT_DOUBLE_EQ(ok.lhs2, 4.0);
  EXPECT_NEAR(ok.rhs, 16 * pi, 1e-12);
  EXPECT_TRUE(ok.feasible);

  auto bad = check_torus_feasibility({4, 1, 1, 4}, counts(12, 0, 0, 0), area);
  EXPECT_DOUBLE_EQ(std::max(bad.lhs1, bad.lhs2), 48.0);
  EXPECT_DOUBLE_EQ(std::min(bad.lhs1, bad.lhs2), 12.0);
  EXPECT_NEAR(bad.rhs, 15 * pi, 1e-12);
  EXPECT_FALSE(bad.feasible);

  auto empty = check_torus_feasibility({4, 1, 1, 4}, {}, 1e-6);
  EXPECT_EQ(empty.lhs1, 0.0);
  EXPECT_TRUE(empty.feasible);

  EXPECT_THROW(check_torus_feasibility(coupled, {}, 0.0), InvalidArgument);
}

TEST(Feasibility, MatrixAndPhysicalFormsAgree) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_real_distribution<double> area_dist(1, 80);
  for (int sample = 0; sample < 100; ++sample) {
    PhysicalCouplings pc{u(rng), u(rng), u(rng), u(rng)};
    if (std::abs(pc.det()) < 1e-3) continue;
    const auto cm = couplings_from_physical(pc);
    const double area = area_dist(rng);
    const auto& [a, b, c, d] = pc;
    for (int dn1 = -20; dn1 <= 20; ++dn1)
      for (int dn2 = -20; dn2 <= 20; ++dn2) {
        VortexConfiguration vc;
        if (dn1 > 0) vc.zeros1.push_back({{0, 0}, dn1});
        if (dn1 < 0) vc.poles1.push_back({{0, 0}, -dn1});
        if (dn2 > 0) vc.zeros2.push_back({{0, 0}, dn2});
        if (dn2 < 0) vc.poles2.push_back({{0, 0}, -dn2});
        const double l1 = std::abs((c * c + d * d) * dn1 - (a * c + b * d) * dn2);
        const double l2 = std::abs((a * a + b * b) * dn2 - (a * c + b * d) * dn1);
        const bool physical = std::max(l1, l2) < pc.det() * pc.det() * area / pi;
        ASSERT_EQ(check_torus_feasibility(cm, vc, area).feasible, physical)
            << "sample " << sample << " dN=(" << dn1 << "," << dn2 << ")";
      }
  }
}

TEST(DecayRates, Examples) {
  const auto r = decay_rates(coupled, reference_pc);
  EXPECT_NEAR(r.lambda1, 6 - 2 * std::sqrt(5.0), 1e-14);
  EXPECT_DOUBLE_EQ(r.lambda0, r.lambda1);
  ASSERT_TRUE(r.sigma);
  EXPECT_NEAR(*r.sigma * *r.sigma, 24 - 8 * std::sqrt(5.0), 1e-13);
  EXPECT_NEAR(*r.sigma, 2.472, 1e-3);

  const auto s = decay_rates({20, 16, 16, 20});
  EXPECT_NEAR(s.lambda1, 4.0, 1e-13);
  EXPECT_NEAR(s.lambda0, 4.0, 1e-13);
  EXPECT_FALSE(s.sigma);

  const auto dcp = decay_rates(decoupled_cm);
  EXPECT_EQ(dcp.lambda1, 4.0);
  EXPECT_EQ(dcp.lambda0, 4.0);
  EXPECT_NEAR(dcp.field_rate, std::sqrt(2.0), 1e-15);
}

TEST(DecayRates, NonSymmetricMatrix) {
  const CouplingMatrix cm{6, 2, 1, 3};
  const auto r = decay_rates(cm);
  const double ratio = 2.0;
  const double s = 6 + ratio * 3, q = ratio * cm.det();
  EXPECT_NEAR(r.lambda1, 0.5 * (s - std::sqrt(s * s - 4 * q)), 1e-12);
  EXPECT_NEAR(r.lambda0, 0.5 * r.lambda1, 1e-15);
  EXPECT_GT(r.lambda0, 0.0);
}

TEST(DecayRates, LambdaOneIsEigenvalueOfSymmetrizedMatrix) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int k = 0; k < 200; ++k) {
    const double a12 = u(rng) * (k % 2 ? 1 : -1);
    const double a21 = a12 * u(rng) / 2.5;
    const double a11 = u(rng) + std::abs(a12);
    const double a22 = (std::abs(a12 * a21) + u(rng)) / a11 + u(rng);
    const CouplingMatrix cm{a11, a12, a21, a22};
    ASSERT_NO_THROW(cm.validate());
    const auto r = decay_rates(cm);
    const auto m = symmetrized_matrix(cm);
    const auto e = eigen2(m[0], m[1], m[2], m[3]);
    const double v1 = e.vectors[0][0], v2 = e.vectors[1][0];
    const double scale = std::abs(m[0]) + std::abs(m[1]) + std::abs(m[3]);
    EXPECT_NEAR(m[0] * v1 + m[1] * v2, r.lambda1 * v1, 1e-12 * scale);
    EXPECT_NEAR(m[2] * v1 + m[3] * v2, r.lambda1 * v2, 1e-12 * scale);
    EXPECT_GT(r.lambda1, 0.0);
  }
}

TEST(Fluxes, Examples) {
  const auto f = predicted_fluxes(coupled, counts(1, 0, 0, 0));
  EXPECT_NEAR(f.T1, -pi, 1e-14);
  EXPECT_NEAR(f.T2, -pi, 1e-14);
  EXPECT_FALSE(f.chern1);

  EXPECT_NEAR(predicted_fluxes(coupled, counts(2, 1, 0, 3)).energy, 24 * pi, 1e-12);

  const auto g = predicted_fluxes(decoupled_cm, counts(1, 0, 0, 0));
  EXPECT_NEAR(g.T1, -pi, 1e-14);
  EXPECT_EQ(g.T2, 0.0);

  const auto h = predicted_fluxes(coupled, counts(1, 0, 0, 0), reference_pc);
  EXPECT_NEAR(*h.chern1, 1.0, 1e-15);
  EXPECT_NEAR(*h.chern2, 0.0, 1e-15);
}

TEST(Fluxes, EnergyBookkeeping) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_int_distribution<int> n(0, 6);
  for (int k = 0; k < 200; ++k) {
    PhysicalCouplings pc{u(rng), u(rng), u(rng), u(rng)};
    if (std::abs(pc.det()) < 1e-2) continue;
    const auto vc = counts(n(rng), n(rng), n(rng), n(rng));
    const auto f = predicted_fluxes(couplings_from_physical(pc), vc, pc);
    const double lhs = 2 * ((pc.a + pc.c) * 2 * pi * *f.chern1 + (pc.b + pc.d) * 2 * pi * *f.chern2) +
                       8 * pi * (vc.P1() + vc.P2());
    EXPECT_NEAR(lhs, f.energy, 1e-9 * (1 + f.energy));
  }
}

TEST(Fluxes, LinearInVortexCounts) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> n(0, 5);
  const CouplingMatrix cm{6, 2, 1, 3};
  for (int k = 0; k < 50; ++k) {
    const auto a = counts(n(rng), n(rng), n(rng), n(rng));
    const auto b = counts(n(rng), n(rng), n(rng), n(rng));
    const auto fa = predicted_fluxes(cm, a), fb = predicted_fluxes(cm, b);
    const auto fab = predicted_fluxes(cm, merged(a, b));
    EXPECT_NEAR(fab.T1, fa.T1 + fb.T1, 1e-12);
    EXPECT_NEAR(fab.T2, fa.T2 + fb.T2, 1e-12);
  }
}

TEST(Fluxes, SatisfyIntegratedSystem) {
  const CouplingMatrix cm{6, 2, 1, 3};
  const auto vc = counts(3, 1, 1, 4);
  const auto f = predicted_fluxes(cm, vc);
  EXPECT_NEAR(cm.a11 * f.T1 + cm.a12 * f.T2, 4 * pi * (vc.P1() - vc.N1()), 1e-12);
  EXPECT_NEAR(cm.a21 * f.T1 + cm.a22 * f.T2, 4 * pi * (vc.P2() - vc.N2()), 1e-12);
}

TEST(Vortices, Validation) {
  VortexConfiguration vc;
  vc.zeros1.push_back({{0, 0}, 0});
  EXPECT_THROW(vc.validate(), InvalidArgument);
  const auto ok = counts(1, 2, 3, 4);
  EXPECT_EQ(ok.N1(), 1);
  EXPECT_EQ(ok.N2(), 2);
  EXPECT_EQ(ok.P1(), 3);
  EXPECT_EQ(ok.P2(), 4);
  const auto sw = ok.swapped();
  EXPECT_EQ(sw.N1(), 3);
  EXPECT_EQ(sw.P2(), 2);
}
