#include <cmath>

#include <gtest/gtest.h>

#include "bps/config.hpp"
#include "support.hpp"

using namespace bps;
using namespace bps::testing;

namespace {

const char* plane_text = R"(# single vortex
domain.kind = plane
domain.R = 12
domain.n = 257
couplings.a = 1
couplings.b = -1
couplings.c = 0
couplings.d = 1
vortices.zero1 = 0.01, 0.02
vortices.pole2 = -1.5, 2.5, 3   # trailing comment
solver.sign = lower
output.dump = u1,B1
)";

int error_line(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

} // namespace

TEST(Config, ParsesPlane) {
  const auto c = parse_config_string(plane_text);
  EXPECT_FALSE(c.domain.is_torus());
  EXPECT_EQ(c.domain.R, 12.0);
  EXPECT_EQ(c.domain.n, 257);
  ASSERT_TRUE(c.physical);
  EXPECT_FALSE(c.matrix);
  EXPECT_EQ(c.coupling_matrix(), coupled);
  ASSERT_EQ(c.vortices.zeros1.size(), 1u);
  EXPECT_EQ(c.vortices.zeros1[0].at, (Point{0.01, 0.02}));
  EXPECT_EQ(c.vortices.poles2[0].multiplicity, 3);
  EXPECT_EQ(c.sign, SignBranch::Lower);
  EXPECT_EQ(c.dump, (std::vector<std::string>{"u1", "B1"}));
  EXPECT_EQ(c.lambda, default_lambda);
  EXPECT_EQ(c.copies, default_copies);
  EXPECT_EQ(c.tol, 1e-10);
  EXPECT_EQ(c.max_iter, 50);
}

TEST(Config, ParsesTorusWithDefaults) {
  const auto c = parse_config_string(
      "domain.kind = torus\ncouplings.a11 = 8\ncouplings.a12 = -4\ncouplings.a21 = -4\n"
      "couplings.a22 = 4\nsolver.torus_source = constant\nsolver.force = true\n");
  EXPECT_TRUE(c.domain.is_torus());
  EXPECT_EQ(c.domain.n1, 256);
  EXPECT_DOUBLE_EQ(c.domain.L1, 2 * pi);
  EXPECT_EQ(*c.matrix, coupled);
  EXPECT_EQ(c.torus_source, TorusSource::Constant);
  EXPECT_TRUE(c.force);
}

TEST(Config, DefaultPlaneRadius) {
  const auto c = parse_config_string(
      "domain.kind = plane\ncouplings.a11 = 8\ncouplings.a12 = -4\ncouplings.a21 = -4\n"
      "couplings.a22 = 4\nvortices.zero1 = 3, 4\n");
  EXPECT_NEAR(c.domain.R, 5.0 + 10.0 / std::sqrt(6 - 2 * std::sqrt(5.0)), 1e-12);
  EXPECT_EQ(c.domain.n, 257);
}

TEST(Config, Errors) {
  const std::string base = "domain.kind = torus\ncouplings.a11 = 8\ncouplings.a12 = -4\n"
                           "couplings.a21 = -4\ncouplings.a22 = 4\n";
  EXPECT_EQ(error_line(base + "couplings.a = 1\ncouplings.b = 0\ncouplings.c = 0\ncouplings.d = 1\n"), 9);
  EXPECT_EQ(error_line(base + "solver.tol = abc\n"), 6);
  EXPECT_EQ(error_line(base + "solver.lambda = 10\nsolver.lambda = 11\n"), 7);
  EXPECT_EQ(error_line(base + "solver.bogus = 1\n"), 6);
  EXPECT_EQ(error_line(base + "just some words\n"), 6);
  EXPECT_EQ(error_line(base + "vortices.zero1 = 1\n"), 6);
  EXPECT_EQ(error_line(base + "vortices.zero1 = 1, 1, 0\n"), 6);
  EXPECT_EQ(error_line(base + "output.dump = u1,psi\n"), 6);
  EXPECT_EQ(error_line(base + "solver.sign = sideways\n"), 6);
  EXPECT_EQ(error_line(base + "domain.n1 = 31\n"), 0);
  EXPECT_EQ(error_line(base + "domain.R = 3\n"), 6);
  EXPECT_EQ(error_line("couplings.a11 = 8\n"), 1);
  EXPECT_EQ(error_line(base.substr(base.find('\n') + 1)), 0);
  EXPECT_EQ(error_line("domain.kind = plane\ncouplings.a11 = 1\ncouplings.a12 = 2\n"
                       "couplings.a21 = 2\ncouplings.a22 = 1\n"),
            5);
  EXPECT_EQ(error_line("domain.kind = plane\ncouplings.a = 1\ncouplings.b = 2\n"), 3);
  EXPECT_THROW(parse_config_file("/nonexistent/run.conf"), ConfigError);
  try {
    parse_config_string(base + "solver.max_iter = 2.5\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 6: ", 0), 0u) << e.what();
  }
}

TEST(Config, EchoRoundTrip) {
  auto c = parse_config_string(plane_text);
  c.decay_window = DecayWindow{5.5, 9.25};
  c.lambda = 1.0 / 3.0;
  c.vortices.zeros1[0].at.x = 0.1 + 0.2;
  const auto text = echo_config(c);
  const auto back = parse_config_string(text);
  EXPECT_TRUE(back == c) << text;
  EXPECT_EQ(echo_config(back), text);

  const auto t = parse_config_string("domain.kind = torus\ndomain.L1 = 3.3\ncouplings.a11 = 6\n"
                                     "couplings.a12 = 2\ncouplings.a21 = 1\ncouplings.a22 = 3\n");
  EXPECT_TRUE(parse_config_string(echo_config(t)) == t);
}

TEST(Config, AutoOffset) {
  auto c = parse_config_string("domain.kind = plane\ndomain.R = 4\ndomain.n = 33\n"
                               "couplings.a11 = 4\ncouplings.a12 = 0\ncouplings.a21 = 0\n"
                               "couplings.a22 = 4\nvortices.zero1 = 0, 0\nvortices.zero2 = 0.1, 0.1\n");
  EXPECT_THROW(build_problem(c), PlacementError);
  c.auto_offset = true;
  const auto vc = placed_vortices(c);
  EXPECT_EQ(vc.zeros1[0].at, (Point{0.125, 0.125}));
  EXPECT_EQ(vc.zeros2[0].at, (Point{0.1, 0.1}));
  const auto p = build_problem(c);
  EXPECT_TRUE(p.bd.u01.all_finite());
}
