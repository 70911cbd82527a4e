#include <cmath>

#include <gtest/gtest.h>

#include "bps/background.hpp"
#include "support.hpp"

using namespace bps;
using namespace bps::testing;

namespace {

VortexConfiguration mixed() {
  VortexConfiguration vc;
  vc.zeros1.push_back({{0.31, -0.17}, 2});
  vc.poles1.push_back({{-1.13, 0.52}, 1});
  vc.zeros2.push_back({{1.07, 1.29}, 1});
  vc.poles2.push_back({{-0.43, -1.61}, 3});
  return vc;
}

VortexConfiguration shifted(VortexConfiguration vc, double dx, double dy) {
  for (auto* list : {&vc.zeros1, &vc.poles1, &vc.zeros2, &vc.poles2})
    for (auto& v : *list) v.at = {v.at.x + dx, v.at.y + dy};
  return vc;
}

double sup_diff(const ScalarField& a, const ScalarField& b) { return (a - b).sup_norm(); }

} // namespace

TEST(PlaneBackground, PointValue) {
  const auto u = plane_background_at(single_zero({0, 0}), 1.0, {1.0, 0.0});
  EXPECT_NEAR(u[0], -0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(u[0], -0.34657, 1e-5);
  EXPECT_EQ(u[1], 0.0);
}

TEST(PlaneBackground, SourceIntegral) {
  const auto d = DomainSpec::plane(12.0, 257);
  const double h = d.hx();
  for (double lambda : {1.0, 10.0}) {
    const auto vc = single_zero({0.37 * h, 0.21 * h});
    const auto bd = plane_background(vc, lambda, d);
    EXPECT_NEAR(integrate(bd.f1), 4 * pi, 1e-2 * 4 * pi);
    EXPECT_LT(std::abs(source_balance(bd, vc)[0]), 1e-2 * 4 * pi);
    EXPECT_EQ(source_balance(bd, vc)[1], 0.0);
  }
}

TEST(PlaneBackground, ZeroPoleCancellation) {
  const auto d = DomainSpec::plane(4.0, 33);
  VortexConfiguration vc;
  vc.zeros1.push_back({{0.1, 0.1}, 1});
  vc.poles1.push_back({{0.1, 0.1}, 1});
  const auto bd = plane_background(vc, 10.0, d);
  EXPECT_EQ(bd.u01.sup_norm(), 0.0);
  EXPECT_EQ(bd.f1.sup_norm(), 0.0);
}

TEST(PlaneBackground, SourceBound) {
  const auto d = DomainSpec::plane(5.0, 101);
  const auto vc = mixed();
  for (double lambda : {0.1, 1.0, 10.0, 1e3}) {
    const auto bd = plane_background(vc, lambda, d);
    EXPECT_LE(bd.f1.sup_norm(), 8.0 * 3 * std::pow(lambda, -1.0 / 3));
    EXPECT_LE(bd.f2.sup_norm(), 8.0 * 4 * std::pow(lambda, -1.0 / 3));
    EXPECT_TRUE(bd.u01.all_finite());
  }
  const auto lo = plane_background(vc, 1.0, d), hi = plane_background(vc, 1e3, d);
  EXPECT_LT(hi.f1.sup_norm(), lo.f1.sup_norm());
  EXPECT_LT(hi.f2.sup_norm(), lo.f2.sup_norm());
}

TEST(PlaneBackground, PointOnNodeRejected) {
  const auto d = DomainSpec::plane(4.0, 33);
  try {
    plane_background(single_zero({0.25, -0.5}), 10.0, d);
    FAIL() << "expected PlacementError";
  } catch (const PlacementError& e) {
    EXPECT_NE(std::string(e.what()).find("0.25"), std::string::npos) << e.what();
  }
  EXPECT_THROW(plane_background(single_zero({7.0, 0.1}), 10.0, d), PlacementError);
  EXPECT_THROW(plane_background(single_zero({0.1, 0.1}), 0.0, d), InvalidArgument);
}

TEST(PlaneBackground, AntisymmetryAndAdditivity) {
  const auto d = DomainSpec::plane(4.0, 65);
  const auto vc = mixed();
  const auto bd = plane_background(vc, 10.0, d);
  const auto sw = plane_background(vc.swapped(), 10.0, d);
  EXPECT_LT(sup_diff(sw.u01, -1.0 * bd.u01), 1e-13);
  EXPECT_LT(sup_diff(sw.f1, -1.0 * bd.f1), 1e-13);
  EXPECT_LT(sup_diff(sw.u02, -1.0 * bd.u02), 1e-13);
  EXPECT_LT(sup_diff(sw.f2, -1.0 * bd.f2), 1e-13);

  const auto other = shifted(vc, 0.61, -0.29);
  const auto sum = plane_background(merged(vc, other), 10.0, d);
  const auto b2 = plane_background(other, 10.0, d);
  EXPECT_LT(sup_diff(sum.u01, bd.u01 + b2.u01), 1e-12);
  EXPECT_LT(sup_diff(sum.f2, bd.f2 + b2.f2), 1e-12);
}

TEST(TorusBackground, Empty) {
  const auto d = DomainSpec::torus(2 * pi, 2 * pi, 32, 32);
  const auto bd = torus_background({}, 10.0, 3, d);
  EXPECT_EQ(bd.u01.sup_norm(), 0.0);
  EXPECT_EQ(bd.f2.sup_norm(), 0.0);
  EXPECT_EQ(source_balance(bd, {})[0], 0.0);
  EXPECT_THROW(torus_background({}, 10.0, 0, d), InvalidArgument);
}

TEST(TorusBackground, ZeroPoleCancellation) {
  const auto d = DomainSpec::torus(2 * pi, 2 * pi, 32, 32);
  VortexConfiguration vc;
  vc.zeros2.push_back({{1.01, 2.02}, 2});
  vc.poles2.push_back({{1.01, 2.02}, 2});
  const auto bd = torus_background(vc, 10.0, 3, d);
  EXPECT_EQ(bd.u02.sup_norm(), 0.0);
  EXPECT_EQ(bd.f2.sup_norm(), 0.0);
}

TEST(TorusBackground, LatticeTruncation) {
  const double L = 2 * pi, lambda = 10.0;
  const auto d = DomainSpec::torus(L, L, 128, 128);
  const auto vc = single_zero({L / 2 + 0.013, L / 2 + 0.007});
  const auto b3 = torus_background(vc, lambda, 3, d);
  const auto b6 = torus_background(vc, lambda, 6, d);
  EXPECT_LT(sup_diff(b3.f1, b6.f1), 10 * lambda * std::pow(3 * L, -4));
  EXPECT_LT(std::abs(source_balance(b3, vc)[0]), 1e-6 * 4 * pi);
}

TEST(TorusBackground, TranslationByNodesRollsField) {
  const double L = 2 * pi;
  const int n = 64;
  const auto d = DomainSpec::torus(L, L, n, n);
  const int si = 5, sj = -7;
  const auto vc = shifted(mixed(), 3.0, 3.0);
  auto moved = vc;
  for (auto* list : {&moved.zeros1, &moved.poles1, &moved.zeros2, &moved.poles2})
    for (auto& v : *list)
      v.at = {std::fmod(v.at.x + si * d.hx() + L, L), std::fmod(v.at.y + sj * d.hy() + L, L)};
  const auto a = torus_background(vc, 10.0, 3, d);
  const auto b = torus_background(moved, 10.0, 3, d);
  double diff = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int ii = ((i + si) % n + n) % n, jj = ((j + sj) % n + n) % n;
      diff = std::max({diff, std::abs(b.u01(ii, jj) - a.u01(i, j)), std::abs(b.f2(ii, jj) - a.f2(i, j))});
    }
  EXPECT_LT(diff, 1e-11);
}

TEST(TorusBackground, AntisymmetryAndAdditivity) {
  const auto d = DomainSpec::torus(2 * pi, 2 * pi, 64, 64);
  const auto vc = shifted(mixed(), 3.0, 3.0);
  const auto bd = torus_background(vc, 10.0, 3, d);
  const auto sw = torus_background(vc.swapped(), 10.0, 3, d);
  EXPECT_LT(sup_diff(sw.u01, -1.0 * bd.u01), 1e-12);
  EXPECT_LT(sup_diff(sw.f2, -1.0 * bd.f2), 1e-12);
  const auto other = shifted(vc, 0.7, 1.3);
  const auto sum = torus_background(merged(vc, other), 10.0, 3, d);
  const auto b2 = torus_background(other, 10.0, 3, d);
  EXPECT_LT(sup_diff(sum.u02, bd.u02 + b2.u02), 1e-11);
  EXPECT_LT(sup_diff(sum.f1, bd.f1 + b2.f1), 1e-11);
}

TEST(TorusBackground, ConstantSourceMode) {
  const auto d = DomainSpec::torus(2 * pi, 2 * pi, 128, 128);
  const auto vc = shifted(mixed(), 3.0, 3.0);
  const auto bd = torus_background(vc, 10.0, 3, d, TorusSource::Constant);
  EXPECT_NEAR(bd.f1[0], 4 * pi * vc.net1() / d.area(), 1e-13);
  EXPECT_NEAR(mean(bd.u01), 0.0, 1e-12);
  const auto bal = source_balance(bd, vc);
  EXPECT_NEAR(bal[0], 0.0, 1e-11);
  EXPECT_NEAR(bal[1], 0.0, 1e-11);
}
