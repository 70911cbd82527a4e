#pragma once

// Run configuration: a flat, line-oriented `section.key = value` document.
// `#` starts a comment; list entries (vortices) repeat their key.
//
//   domain.kind = plane            # or torus
//   domain.R = 12                  # plane half-width (default r_max + 10/√λ₁)
//   domain.n = 257
//   couplings.a = 1                # either a, b, c, d ...
//   couplings.a11 = 8              # ... or a11, a12, a21, a22
//   vortices.zero1 = 0.01, 0.01, 1 # x, y[, multiplicity]
//   solver.lambda = 10
//   output.dump = u1,u2,B1

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bps/background.hpp"
#include "bps/diagnostics.hpp"
#include "bps/error.hpp"
#include "bps/model.hpp"
#include "bps/solver.hpp"

namespace bps {

inline const std::vector<std::string>& dumpable_fields() {
  static const std::vector<std::string> names = {"u1", "u2", "q2", "p2",  "B1",  "B2",
                                                 "Fhat", "Ftilde", "f1", "f2", "u01", "u02"};
  return names;
}

struct RunConfig {
  DomainSpec domain;
  std::optional<PhysicalCouplings> physical;
  std::optional<CouplingMatrix> matrix;
  VortexConfiguration vortices;
  bool auto_offset = false;
  double lambda = default_lambda;
  int copies = default_copies;
  double tol = 1e-10;
  int max_iter = 50;
  bool force = false;
  SignBranch sign = SignBranch::Upper;
  TorusSource torus_source = TorusSource::LatticeSum;
  std::string out_dir = ".";
  std::vector<std::string> dump;
  std::optional<DecayWindow> decay_window;
  double oracle_R = 20.0;
  int oracle_nodes = 2001;

  CouplingMatrix coupling_matrix() const {
    return physical ? couplings_from_physical(*physical) : *matrix;
  }

  bool operator==(const RunConfig& o) const {
    auto same_window = [](const std::optional<DecayWindow>& a, const std::optional<DecayWindow>& b) {
      if (a.has_value() != b.has_value()) return false;
      return !a || (a->r_lo == b->r_lo && a->r_hi == b->r_hi);
    };
    return domain == o.domain && physical == o.physical && matrix == o.matrix &&
           vortices == o.vortices && auto_offset == o.auto_offset && lambda == o.lambda &&
           copies == o.copies && tol == o.tol && max_iter == o.max_iter && force == o.force &&
           sign == o.sign && torus_source == o.torus_source && out_dir == o.out_dir &&
           dump == o.dump && same_window(decay_window, o.decay_window) &&
           oracle_R == o.oracle_R && oracle_nodes == o.oracle_nodes;
  }
};

// Shortest representation that reads back to the same double.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_real(std::string_view s, int line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(line, "expected a number, got '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s, int line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw ConfigError(line, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

inline bool parse_bool(std::string_view s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(line, "expected true or false, got '" + std::string(s) + "'");
}

inline Vortex parse_vortex(std::string_view s, int line) {
  const auto parts = split(s, ',');
  if (parts.size() != 2 && parts.size() != 3)
    throw ConfigError(line, "vortex entries are 'x, y' or 'x, y, multiplicity'");
  Vortex v{{parse_real(parts[0], line), parse_real(parts[1], line)}, 1};
  if (parts.size() == 3) v.multiplicity = parse_int(parts[2], line);
  if (v.multiplicity < 1) throw ConfigError(line, "vortex multiplicity must be >= 1");
  return v;
}

} // namespace detail

inline RunConfig parse_config(std::istream& in) {
  using namespace detail;
  RunConfig cfg;
  std::map<std::string, int> seen; // scalar key -> line
  std::optional<std::string> kind;
  std::optional<double> plane_R;
  std::map<std::string, double> phys, mat;
  int phys_line = 0, mat_line = 0;
  double lo = 0, hi = 0;
  int window_keys = 0, window_line = 0;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line, "expected 'section.key = value'");
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    if (key.find('.') == std::string::npos)
      throw ConfigError(line, "key '" + key + "' has no section");

    static const std::set<std::string> list_keys = {"vortices.zero1", "vortices.pole1",
                                                    "vortices.zero2", "vortices.pole2"};
    if (!list_keys.count(key)) {
      if (auto [it, fresh] = seen.emplace(key, line); !fresh)
        throw ConfigError(line, "duplicate key '" + key + "' (first set on line " +
                                    std::to_string(it->second) + ")");
    }

    if (key == "domain.kind") {
      if (value != "torus" && value != "plane")
        throw ConfigError(line, "domain.kind must be torus or plane");
      kind = std::string(value);
    } else if (key == "domain.L1") {
      cfg.domain.L1 = parse_real(value, line);
    } else if (key == "domain.L2") {
      cfg.domain.L2 = parse_real(value, line);
    } else if (key == "domain.n1") {
      cfg.domain.n1 = parse_int(value, line);
    } else if (key == "domain.n2") {
      cfg.domain.n2 = parse_int(value, line);
    } else if (key == "domain.R") {
      plane_R = parse_real(value, line);
    } else if (key == "domain.n") {
      cfg.domain.n = parse_int(value, line);
    } else if (key == "couplings.a" || key == "couplings.b" || key == "couplings.c" ||
               key == "couplings.d") {
      phys[key.substr(10)] = parse_real(value, line);
      phys_line = line;
    } else if (key == "couplings.a11" || key == "couplings.a12" || key == "couplings.a21" ||
               key == "couplings.a22") {
      mat[key.substr(10)] = parse_real(value, line);
      mat_line = line;
    } else if (key == "vortices.zero1") {
      cfg.vortices.zeros1.push_back(parse_vortex(value, line));
    } else if (key == "vortices.pole1") {
      cfg.vortices.poles1.push_back(parse_vortex(value, line));
    } else if (key == "vortices.zero2") {
      cfg.vortices.zeros2.push_back(parse_vortex(value, line));
    } else if (key == "vortices.pole2") {
      cfg.vortices.poles2.push_back(parse_vortex(value, line));
    } else if (key == "vortices.auto_offset") {
      cfg.auto_offset = parse_bool(value, line);
    } else if (key == "solver.lambda") {
      cfg.lambda = parse_real(value, line);
      if (!(cfg.lambda > 0)) throw ConfigError(line, "solver.lambda must be positive");
    } else if (key == "solver.copies") {
      cfg.copies = parse_int(value, line);
      if (cfg.copies < 1) throw ConfigError(line, "solver.copies must be >= 1");
    } else if (key == "solver.tol") {
      cfg.tol = parse_real(value, line);
      if (!(cfg.tol > 0)) throw ConfigError(line, "solver.tol must be positive");
    } else if (key == "solver.max_iter") {
      cfg.max_iter = parse_int(value, line);
      if (cfg.max_iter < 0) throw ConfigError(line, "solver.max_iter must be >= 0");
    } else if (key == "solver.force") {
      cfg.force = parse_bool(value, line);
    } else if (key == "solver.sign") {
      if (value == "upper") cfg.sign = SignBranch::Upper;
      else if (value == "lower") cfg.sign = SignBranch::Lower;
      else throw ConfigError(line, "solver.sign must be upper or lower");
    } else if (key == "solver.torus_source") {
      if (value == "lattice") cfg.torus_source = TorusSource::LatticeSum;
      else if (value == "constant") cfg.torus_source = TorusSource::Constant;
      else throw ConfigError(line, "solver.torus_source must be lattice or constant");
    } else if (key == "output.dir") {
      if (value.empty()) throw ConfigError(line, "output.dir must not be empty");
      cfg.out_dir = std::string(value);
    } else if (key == "output.dump") {
      cfg.dump.clear();
      if (!value.empty())
        for (auto f : split(value, ',')) {
          const std::string name(f);
          const auto& ok = dumpable_fields();
          if (std::find(ok.begin(), ok.end(), name) == ok.end())
            throw ConfigError(line, "unknown dump field '" + name + "'");
          cfg.dump.push_back(name);
        }
    } else if (key == "diagnostics.r_lo") {
      lo = parse_real(value, line);
      ++window_keys;
      window_line = line;
    } else if (key == "diagnostics.r_hi") {
      hi = parse_real(value, line);
      ++window_keys;
      window_line = line;
    } else if (key == "oracle.R") {
      cfg.oracle_R = parse_real(value, line);
    } else if (key == "oracle.nodes") {
      cfg.oracle_nodes = parse_int(value, line);
    } else {
      throw ConfigError(line, "unknown key '" + key + "'");
    }
  }

  if (!phys.empty() && !mat.empty())
    throw ConfigError(std::max(phys_line, mat_line),
                      "both physical (a, b, c, d) and matrix (a11..a22) couplings given");
  if (phys.empty() && mat.empty()) throw ConfigError(0, "no couplings given");
  try {
    if (!phys.empty()) {
      if (phys.size() != 4) throw ConfigError(phys_line, "physical couplings need a, b, c and d");
      cfg.physical = PhysicalCouplings{phys["a"], phys["b"], phys["c"], phys["d"]};
      cfg.physical->validate();
    } else {
      if (mat.size() != 4)
        throw ConfigError(mat_line, "matrix couplings need a11, a12, a21 and a22");
      cfg.matrix = CouplingMatrix{mat["a11"], mat["a12"], mat["a21"], mat["a22"]};
      cfg.matrix->validate();
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(cfg.physical ? phys_line : mat_line, e.what());
  }

  if (window_keys == 1) throw ConfigError(window_line, "diagnostics needs both r_lo and r_hi");
  if (window_keys == 2) cfg.decay_window = DecayWindow{lo, hi};

  if (!kind) throw ConfigError(0, "domain.kind is required");
  cfg.domain.kind = *kind == "torus" ? DomainKind::Torus : DomainKind::PlaneSquare;
  if (cfg.domain.is_torus()) {
    if (plane_R) throw ConfigError(seen["domain.R"], "domain.R applies to plane domains only");
  } else {
    if (seen.count("domain.L1") || seen.count("domain.L2") || seen.count("domain.n1") ||
        seen.count("domain.n2"))
      throw ConfigError(0, "domain.L1/L2/n1/n2 apply to torus domains only");
    cfg.domain.R = plane_R ? *plane_R
                           : cfg.vortices.max_radius() +
                                 10.0 / std::sqrt(decay_rates(cfg.coupling_matrix()).lambda1);
  }
  try {
    cfg.domain.validate();
    cfg.vortices.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(0, e.what());
  }
  if (!(cfg.oracle_R > 0) || cfg.oracle_nodes < 1000)
    throw ConfigError(0, "oracle needs R > 0 and nodes >= 1000");
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  return parse_config(in);
}

// Canonical text form; parse_config(echo_config(c)) == c.
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_number(v); };
  const auto& d = c.domain;
  o << "domain.kind = " << (d.is_torus() ? "torus" : "plane") << "\n";
  if (d.is_torus()) {
    o << "domain.L1 = " << num(d.L1) << "\ndomain.L2 = " << num(d.L2) << "\n";
    o << "domain.n1 = " << d.n1 << "\ndomain.n2 = " << d.n2 << "\n";
  } else {
    o << "domain.R = " << num(d.R) << "\ndomain.n = " << d.n << "\n";
  }
  if (c.physical) {
    o << "couplings.a = " << num(c.physical->a) << "\ncouplings.b = " << num(c.physical->b)
      << "\ncouplings.c = " << num(c.physical->c) << "\ncouplings.d = " << num(c.physical->d)
      << "\n";
  } else {
    o << "couplings.a11 = " << num(c.matrix->a11) << "\ncouplings.a12 = " << num(c.matrix->a12)
      << "\ncouplings.a21 = " << num(c.matrix->a21) << "\ncouplings.a22 = " << num(c.matrix->a22)
      << "\n";
  }
  auto list = [&](const char* key, const std::vector<Vortex>& vs) {
    for (const auto& v : vs)
      o << "vortices." << key << " = " << num(v.at.x) << ", " << num(v.at.y) << ", "
        << v.multiplicity << "\n";
  };
  list("zero1", c.vortices.zeros1);
  list("pole1", c.vortices.poles1);
  list("zero2", c.vortices.zeros2);
  list("pole2", c.vortices.poles2);
  o << "vortices.auto_offset = " << (c.auto_offset ? "true" : "false") << "\n";
  o << "solver.lambda = " << num(c.lambda) << "\n";
  o << "solver.copies = " << c.copies << "\n";
  o << "solver.tol = " << num(c.tol) << "\n";
  o << "solver.max_iter = " << c.max_iter << "\n";
  o << "solver.force = " << (c.force ? "true" : "false") << "\n";
  o << "solver.sign = " << (c.sign == SignBranch::Upper ? "upper" : "lower") << "\n";
  o << "solver.torus_source = "
    << (c.torus_source == TorusSource::LatticeSum ? "lattice" : "constant") << "\n";
  o << "output.dir = " << c.out_dir << "\n";
  o << "output.dump =";
  for (std::size_t k = 0; k < c.dump.size(); ++k) o << (k ? "," : " ") << c.dump[k];
  o << "\n";
  if (c.decay_window)
    o << "diagnostics.r_lo = " << num(c.decay_window->r_lo)
      << "\ndiagnostics.r_hi = " << num(c.decay_window->r_hi) << "\n";
  o << "oracle.R = " << num(c.oracle_R) << "\n";
  o << "oracle.nodes = " << c.oracle_nodes << "\n";
  return o.str();
}

// Vortex data with node-coincident points moved by half a cell when the
// configuration asks for it.
inline VortexConfiguration placed_vortices(const RunConfig& c) {
  VortexConfiguration vc = c.vortices;
  if (!c.auto_offset) return vc;
  const auto& d = c.domain;
  const double tol = 1e-6 * std::min(d.hx(), d.hy());
  for (auto* list : {&vc.zeros1, &vc.poles1, &vc.zeros2, &vc.poles2})
    for (auto& v : *list)
      if (d.distance_to_node(v.at) <= tol) {
        v.at.x += 0.5 * d.hx();
        v.at.y += 0.5 * d.hy();
      }
  return vc;
}

inline Problem build_problem(const RunConfig& c) {
  const auto cm = c.coupling_matrix();
  const auto vc = placed_vortices(c);
  Problem p{cm, vc, c.domain, {}};
  p.bd = c.domain.is_torus() ? torus_background(vc, c.lambda, c.copies, c.domain, c.torus_source)
                             : plane_background(vc, c.lambda, c.domain);
  p.tol_residual = c.tol;
  p.max_iter = c.max_iter;
  p.force = c.force;
  return p;
}

} // namespace bps
