#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bps/config.hpp"
#include "bps/diagnostics.hpp"
#include "bps/io.hpp"
#include "bps/oracle.hpp"
#include "bps/solver.hpp"

namespace fs = std::filesystem;
using namespace bps;

namespace {

enum Exit { Ok = 0, ConfigFailure = 1, Infeasible = 2, NoConvergence = 3 };

struct Options {
  std::string config;
  std::string out;
  bool force = false;
  bool echo = false;
  std::string compare;
  std::vector<std::string> dump;
};

RunConfig load(const Options& o) {
  RunConfig cfg = parse_config_file(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.force) cfg.force = true;
  if (!o.dump.empty()) {
    cfg.dump.clear();
    for (const auto& name : o.dump) {
      const auto& ok = dumpable_fields();
      if (std::find(ok.begin(), ok.end(), name) == ok.end())
        throw ConfigError(0, "unknown dump field '" + name + "'");
      cfg.dump.push_back(name);
    }
  }
  return cfg;
}

void print(const char* key, double v) { std::printf("%s=%s\n", key, format_number(v).c_str()); }
void print(const char* key, const std::optional<double>& v) {
  std::printf("%s=%s\n", key, optional_number(v).c_str());
}

int cmd_check(const Options& o) {
  const RunConfig cfg = load(o);
  if (o.echo) {
    std::fputs(echo_config(cfg).c_str(), stdout);
    return Ok;
  }
  const auto cm = cfg.coupling_matrix();
  const auto& vc = cfg.vortices;
  std::printf("domain=%s\n", cfg.domain.is_torus() ? "torus" : "plane");
  print("a11", cm.a11);
  print("a12", cm.a12);
  print("a21", cm.a21);
  print("a22", cm.a22);
  std::printf("N1=%d\nP1=%d\nN2=%d\nP2=%d\n", vc.N1(), vc.P1(), vc.N2(), vc.P2());
  bool feasible = true;
  if (cfg.domain.is_torus()) {
    const auto rep = check_torus_feasibility(cm, vc, cfg.domain.area());
    feasible = rep.feasible;
    print("area", cfg.domain.area());
    print("feasibility_lhs1", rep.lhs1);
    print("feasibility_lhs2", rep.lhs2);
    print("feasibility_rhs", rep.rhs);
  }
  std::printf("feasible=%s\n", feasible ? "true" : "false");
  const auto rates = decay_rates(cm, cfg.physical);
  print("lambda0", rates.lambda0);
  print("lambda1", rates.lambda1);
  print("sigma", rates.sigma);
  print("field_rate", rates.field_rate);
  const auto pred = predicted_fluxes(cm, vc, cfg.physical);
  const double s = branch_sign(cfg.sign);
  auto signed_opt = [s](const std::optional<double>& v) {
    return v ? std::optional<double>(s * *v) : std::nullopt;
  };
  print("predicted_T1", pred.T1);
  print("predicted_T2", pred.T2);
  print("chern1", signed_opt(pred.chern1));
  print("chern2", signed_opt(pred.chern2));
  print("charge1", signed_opt(pred.charge1));
  print("charge2", signed_opt(pred.charge2));
  print("energy_predicted", pred.energy);
  if (!feasible) {
    std::fprintf(stderr, "infeasible: vortex numbers violate the torus area condition\n");
    return Infeasible;
  }
  return Ok;
}

std::optional<DecayWindow> decay_window_for(const RunConfig& cfg, const Problem& p) {
  if (p.domain.is_torus()) return std::nullopt;
  if (cfg.decay_window) return cfg.decay_window;
  const DecayWindow w;
  if (w.r_hi <= p.domain.R && w.r_lo > p.vc.max_radius()) return w;
  return std::nullopt;
}

int cmd_solve(const Options& o) {
  const RunConfig cfg = load(o);
  for (const auto& name : cfg.dump)
    if (!cfg.physical && name != "u1" && name != "u2" && name != "f1" && name != "f2" &&
        name != "u01" && name != "u02")
      throw ConfigError(0, "dump field '" + name + "' needs physical couplings (a, b, c, d)");
  const Problem p = build_problem(cfg);
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  const Solution sol = solve(p);
  const auto window = decay_window_for(cfg, p);
  const auto rep = diagnose(p, sol, cfg.physical, cfg.sign, window);

  Summary s;
  s.emplace_back("converged", sol.converged ? "true" : "false");
  s.emplace_back("iterations", std::to_string(sol.iterations));
  s.emplace_back("residual_sup", format_number(sol.residual_sup));
  s.emplace_back("J_value", format_number(sol.J_value));
  s.emplace_back("measured_T1", format_number(rep.measured_T1));
  s.emplace_back("measured_T2", format_number(rep.measured_T2));
  s.emplace_back("predicted_T1", format_number(rep.predicted_T1));
  s.emplace_back("predicted_T2", format_number(rep.predicted_T2));
  s.emplace_back("energy_topological", optional_number(rep.energy_topological));
  s.emplace_back("energy_predicted", format_number(rep.energy_predicted));
  const auto chern = rep.chern_measured;
  s.emplace_back("chern1", optional_number(chern ? std::optional((*chern)[0]) : std::nullopt));
  s.emplace_back("chern2", optional_number(chern ? std::optional((*chern)[1]) : std::nullopt));
  s.emplace_back("decay_rate", optional_number(rep.decay_rate_measured));
  s.emplace_back("lambda0", format_number(rep.rates.lambda0));
  s.emplace_back("lambda1", format_number(rep.rates.lambda1));
  s.emplace_back("sigma", optional_number(rep.rates.sigma));
  write_summary(out / "summary.txt", s);

  for (const auto& name : cfg.dump) {
    const ScalarField* f = nullptr;
    if (name == "f1") f = &p.bd.f1;
    else if (name == "f2") f = &p.bd.f2;
    else if (name == "u01") f = &p.bd.u01;
    else if (name == "u02") f = &p.bd.u02;
    else f = &rep.field_maps.at(name);
    write_field_csv(out / (name + ".csv"), *f);
  }

  std::printf("status=%s\n", sol.status.c_str());
  for (const auto& [k, v] : s) std::printf("%s=%s\n", k.c_str(), v.c_str());
  if (!rep.warning.empty()) std::fprintf(stderr, "warning: %s\n", rep.warning.c_str());
  return sol.converged ? Ok : NoConvergence;
}

double compare_field(const FieldGrid& g, const RadialProfile& prof, int species, Point centre) {
  const double r_hi = std::min(8.0, prof.R());
  double sup = 0.0;
  long used = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double r = std::hypot(g.x(i) - centre.x, g.y(j) - centre.y);
      if (r < 0.1 || r > r_hi) continue;
      sup = std::max(sup, std::abs(g(i, j) - prof.u(species, r)));
      ++used;
    }
  if (used == 0) throw InvalidArgument("no grid nodes in the comparison annulus 0.1 <= r <= 8");
  return sup;
}

int cmd_oracle(const Options& o) {
  const RunConfig cfg = load(o);
  const auto& vc = cfg.vortices;
  std::optional<Point> centre;
  vc.for_each([&](const Vortex& v) {
    if (!centre) centre = v.at;
    else if (!(v.at == *centre))
      throw ConfigError(0, "oracle needs all zeros and poles at one point");
  });
  const Point c = centre.value_or(Point{});
  RadialProblem rp{cfg.coupling_matrix(), vc.net1(), vc.net2(), cfg.oracle_R, cfg.oracle_nodes};
  const RadialProfile prof = solve_radial(rp, cfg.tol);

  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  {
    std::ofstream f(out / "oracle_profile.txt");
    if (!f) throw Error("cannot write oracle profile");
    f << "# r u1 u2\n";
    for (std::size_t k = 1; k < prof.r.size(); ++k)
      f << format_number(prof.r[k]) << " " << format_number(prof.u1(prof.r[k])) << " "
        << format_number(prof.u2(prof.r[k])) << "\n";
  }
  const auto fl = prof.fluxes();
  std::printf("converged=%s\n", prof.converged ? "true" : "false");
  std::printf("iterations=%d\n", prof.iterations);
  print("residual_sup", prof.residual_sup);
  print("flux1", fl[0]);
  print("flux2", fl[1]);

  if (!o.compare.empty()) {
    const fs::path cmp(o.compare);
    double sup = 0.0;
    if (fs::is_directory(cmp)) {
      sup = std::max(compare_field(read_field_csv(cmp / "u1.csv"), prof, 1, c),
                     compare_field(read_field_csv(cmp / "u2.csv"), prof, 2, c));
    } else {
      const int species = cmp.stem() == "u2" ? 2 : 1;
      sup = compare_field(read_field_csv(cmp), prof, species, c);
    }
    print("sup_diff", sup);
  }
  return prof.converged ? Ok : NoConvergence;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"BPS vortex-antivortex solver"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run configuration file")->required();
    sub->add_option("--out", opt.out, "Output directory (overrides output.dir)");
    sub->add_flag("--force", opt.force, "Solve infeasible torus problems anyway");
    sub->add_option("--dump", opt.dump, "Field maps to write")->delimiter(',');
  };
  auto* check = app.add_subcommand("check", "Feasibility, decay rates and closed-form predictions");
  add_common(check);
  check->add_flag("--echo", opt.echo, "Print the canonical configuration and exit");
  auto* solve_cmd = app.add_subcommand("solve", "Solve and write summary and field dumps");
  add_common(solve_cmd);
  auto* oracle = app.add_subcommand("oracle", "Radial reference profile for coincident vortices");
  add_common(oracle);
  oracle->add_option("--compare", opt.compare, "Field dump directory or file to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Ok : ConfigFailure;
  }

  try {
    if (*check) return cmd_check(opt);
    if (*solve_cmd) return cmd_solve(opt);
    return cmd_oracle(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return ConfigFailure;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return Infeasible;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return ConfigFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ConfigFailure;
  }
}
