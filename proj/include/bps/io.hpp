#pragma once

// Plain-text field dumps and the flat key=value summary document.
//
// Field files:  "# nx ny x0 y0 hx hy" header, then ny rows of nx
// comma-separated values (row j holds y = y0 + j·hy).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bps/config.hpp"
#include "bps/discretization.hpp"
#include "bps/error.hpp"

namespace bps {

struct FieldGrid {
  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, hx = 0, hy = 0;
  std::vector<double> values; // row-major

  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return y0 + j * hy; }
  double operator()(int i, int j) const { return values[std::size_t(j) * nx + i]; }
};

inline std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "nan";
}

inline void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  const auto& d = f.domain();
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "# " << d.nx() << " " << d.ny() << " " << format_number(d.x0()) << " "
      << format_number(d.y0()) << " " << format_number(d.hx()) << " " << format_number(d.hy())
      << "\n";
  for (int j = 0; j < d.ny(); ++j) {
    for (int i = 0; i < d.nx(); ++i) {
      if (i) out << ",";
      out << format_number(f(i, j));
    }
    out << "\n";
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline FieldGrid read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open field file '" + path.string() + "'");
  std::string line;
  FieldGrid g;
  char hash = 0;
  if (!std::getline(in, line)) throw InvalidArgument("empty field file '" + path.string() + "'");
  std::istringstream head(line);
  if (!(head >> hash >> g.nx >> g.ny >> g.x0 >> g.y0 >> g.hx >> g.hy) || hash != '#' || g.nx < 1 ||
      g.ny < 1)
    throw InvalidArgument("bad header in '" + path.string() + "'");
  g.values.reserve(std::size_t(g.nx) * g.ny);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int cols = 0;
    for (auto cell : detail::split(line, ',')) {
      g.values.push_back(detail::parse_real(cell, rows + 2));
      ++cols;
    }
    if (cols != g.nx) throw InvalidArgument("ragged row in '" + path.string() + "'");
    ++rows;
  }
  if (rows != g.ny) throw InvalidArgument("row count mismatch in '" + path.string() + "'");
  return g;
}

using Summary = std::vector<std::pair<std::string, std::string>>;

inline void write_summary(const std::filesystem::path& path, const Summary& s) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& [k, v] : s) out << k << "=" << v << "\n";
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline Summary read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open summary '" + path.string() + "'");
  Summary s;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    s.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return s;
}

} // namespace bps
