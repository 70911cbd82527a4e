#pragma once

// Grids, Laplacians and quadrature on a flat torus and on a truncated square
// of the plane.
//
// Torus: nodes x_i = i·L1/n1, y_j = j·L2/n2 on [0,L1)×[0,L2); derivatives are
// spectral (FFTW real-to-complex transforms).
// Plane: nodes x_i = −R + i·h, h = 2R/(n−1); the 5-point stencil sees zero
// values one spacing outside the square.
//
// Field values are stored row-major: index = j·nx + i.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "bps/error.hpp"
#include "bps/model.hpp"

namespace bps {

enum class DomainKind { Torus, PlaneSquare };

struct DomainSpec {
  DomainKind kind = DomainKind::Torus;
  // torus
  double L1 = 2 * pi;
  double L2 = 2 * pi;
  int n1 = 256;
  int n2 = 256;
  // plane
  double R = 12.0;
  int n = 257;

  static DomainSpec torus(double L1, double L2, int n1, int n2) {
    DomainSpec d;
    d.kind = DomainKind::Torus;
    d.L1 = L1;
    d.L2 = L2;
    d.n1 = n1;
    d.n2 = n2;
    d.validate();
    return d;
  }

  static DomainSpec plane(double R, int n) {
    DomainSpec d;
    d.kind = DomainKind::PlaneSquare;
    d.R = R;
    d.n = n;
    d.validate();
    return d;
  }

  bool is_torus() const { return kind == DomainKind::Torus; }

  int nx() const { return is_torus() ? n1 : n; }
  int ny() const { return is_torus() ? n2 : n; }
  std::size_t size() const { return std::size_t(nx()) * std::size_t(ny()); }

  double hx() const { return is_torus() ? L1 / n1 : 2 * R / (n - 1); }
  double hy() const { return is_torus() ? L2 / n2 : 2 * R / (n - 1); }

  double x0() const { return is_torus() ? 0.0 : -R; }
  double y0() const { return is_torus() ? 0.0 : -R; }
  double x(int i) const { return x0() + i * hx(); }
  double y(int j) const { return y0() + j * hy(); }

  double area() const { return is_torus() ? L1 * L2 : 4 * R * R; }

  // Point strictly inside: [0,L) for the torus, open square for the plane.
  bool contains(const Point& p) const {
    if (is_torus()) return p.x >= 0 && p.x < L1 && p.y >= 0 && p.y < L2;
    return std::abs(p.x) < R && std::abs(p.y) < R;
  }

  // Distance from p to the nearest node (periodic on the torus).
  double distance_to_node(const Point& p) const {
    auto axis = [&](double v, double v0, double h, int count, bool periodic) {
      double s = (v - v0) / h;
      double k = std::round(s);
      if (!periodic) k = std::clamp(k, 0.0, double(count - 1));
      return std::abs(s - k) * h;
    };
    return std::hypot(axis(p.x, x0(), hx(), nx(), is_torus()),
                      axis(p.y, y0(), hy(), ny(), is_torus()));
  }

  void validate() const {
    if (is_torus()) {
      if (!(L1 > 0 && L2 > 0)) throw InvalidArgument("torus side lengths must be positive");
      if (n1 < 2 || n2 < 2 || n1 % 2 || n2 % 2)
        throw InvalidArgument("torus node counts must be even and >= 2");
    } else {
      if (!(R > 0)) throw InvalidArgument("plane half-width must be positive");
      if (n < 3) throw InvalidArgument("plane node count must be >= 3");
    }
  }

  bool operator==(const DomainSpec& o) const {
    if (kind != o.kind) return false;
    if (is_torus()) return L1 == o.L1 && L2 == o.L2 && n1 == o.n1 && n2 == o.n2;
    return R == o.R && n == o.n;
  }
};

class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(const DomainSpec& d, double value = 0.0)
      : domain_(d), values_(d.size(), value) {}
  ScalarField(const DomainSpec& d, std::vector<double> values)
      : domain_(d), values_(std::move(values)) {
    if (values_.size() != d.size()) throw InvalidArgument("field size does not match domain");
  }

  template <class F>
  static ScalarField sample(const DomainSpec& d, F&& f) {
    ScalarField out(d);
    for (int j = 0; j < d.ny(); ++j)
      for (int i = 0; i < d.nx(); ++i) out(i, j) = f(d.x(i), d.y(j));
    return out;
  }

  const DomainSpec& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[std::size_t(j) * domain_.nx() + i]; }
  double operator()(int i, int j) const { return values_[std::size_t(j) * domain_.nx() + i]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  ScalarField& operator+=(const ScalarField& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  ScalarField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

  void check_same(const ScalarField& o) const {
    if (!(domain_ == o.domain_)) throw InvalidArgument("fields live on different domains");
  }

private:
  DomainSpec domain_;
  std::vector<double> values_;
};

// Quadrature weights: h1·h2 on the torus (exact for trigonometric
// polynomials), composite trapezoidal on the plane square.
inline double integrate(const ScalarField& f) {
  const auto& d = f.domain();
  const double cell = d.hx() * d.hy();
  if (d.is_torus()) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * cell;
  }
  double s = 0.0;
  const int n = d.n;
  for (int j = 0; j < n; ++j) {
    const double wy = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    for (int i = 0; i < n; ++i) {
      const double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      s += wx * wy * f(i, j);
    }
  }
  return s * cell;
}

inline double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / double(f.size());
}

// 5-point Laplacian with zero values outside the square.
inline ScalarField plane_laplacian(const ScalarField& f) {
  const auto& d = f.domain();
  const int n = d.n;
  const double inv_h2 = 1.0 / (d.hx() * d.hx());
  ScalarField out(d);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double c = f(i, j);
      const double w = i > 0 ? f(i - 1, j) : 0.0;
      const double e = i < n - 1 ? f(i + 1, j) : 0.0;
      const double s = j > 0 ? f(i, j - 1) : 0.0;
      const double nn = j < n - 1 ? f(i, j + 1) : 0.0;
      out(i, j) = (w + e + s + nn - 4.0 * c) * inv_h2;
    }
  return out;
}

// Spectral operators on one torus grid. Plans are created once; execution
// uses the new-array interface and is safe from several threads as long as
// each thread passes its own buffers (every public method allocates its own).
class TorusSpectral {
public:
  explicit TorusSpectral(const DomainSpec& d) : domain_(d) {
    if (!d.is_torus()) throw InvalidArgument("TorusSpectral requires a torus domain");
    const int nx = d.n1, ny = d.n2;
    nxc_ = nx / 2 + 1;
    std::vector<double> real(d.size());
    std::vector<std::complex<double>> spec(modes());
    {
      std::lock_guard lock(plan_mutex());
      forward_.reset(fftw_plan_dft_r2c_2d(ny, nx, real.data(),
                                          reinterpret_cast<fftw_complex*>(spec.data()),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED));
      backward_.reset(fftw_plan_dft_c2r_2d(ny, nx, reinterpret_cast<fftw_complex*>(spec.data()),
                                           real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    k2_.resize(modes());
    kx_.resize(nxc_);
    ky_.resize(ny);
    for (int i = 0; i < nxc_; ++i) kx_[i] = 2 * pi * i / d.L1;
    for (int j = 0; j < ny; ++j) ky_[j] = 2 * pi * (j <= ny / 2 ? j : j - ny) / d.L2;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nxc_; ++i) k2_[std::size_t(j) * nxc_ + i] = kx_[i] * kx_[i] + ky_[j] * ky_[j];
  }

  const DomainSpec& domain() const { return domain_; }
  std::size_t modes() const { return std::size_t(domain_.n2) * nxc_; }

  // |k|² per retained mode, same ordering as transform output.
  std::span<const double> wavenumber_sq() const { return k2_; }

  std::vector<std::complex<double>> forward(std::span<const double> values) const {
    std::vector<double> in(values.begin(), values.end());
    std::vector<std::complex<double>> out(modes());
    fftw_execute_dft_r2c(forward_.get(), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  // Inverse transform including the 1/(n1·n2) normalization.
  std::vector<double> backward(std::vector<std::complex<double>> spec) const {
    std::vector<double> out(domain_.size());
    fftw_execute_dft_c2r(backward_.get(), reinterpret_cast<fftw_complex*>(spec.data()),
                         out.data());
    const double norm = 1.0 / double(domain_.size());
    for (double& v : out) v *= norm;
    return out;
  }

  // Applies the Fourier multiplier m(|k|²) to a field.
  template <class M>
  ScalarField apply(const ScalarField& f, M&& multiplier) const {
    auto spec = forward(f.values());
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= multiplier(k2_[k]);
    return ScalarField(domain_, backward(std::move(spec)));
  }

  ScalarField laplacian(const ScalarField& f) const {
    return apply(f, [](double k2) { return -k2; });
  }

  // Zero-mean w with Δw = rhs − mean(rhs).
  ScalarField solve_poisson(const ScalarField& rhs) const {
    return apply(rhs, [](double k2) { return k2 > 0 ? -1.0 / k2 : 0.0; });
  }

private:
  struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
      std::lock_guard lock(plan_mutex());
      fftw_destroy_plan(p);
    }
  };

  static std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
  }

  DomainSpec domain_;
  int nxc_ = 0;
  std::unique_ptr<fftw_plan_s, PlanDeleter> forward_;
  std::unique_ptr<fftw_plan_s, PlanDeleter> backward_;
  std::vector<double> k2_;
  std::vector<double> kx_;
  std::vector<double> ky_;
};

inline ScalarField laplacian(const ScalarField& f) {
  if (f.domain().is_torus()) return TorusSpectral(f.domain()).laplacian(f);
  return plane_laplacian(f);
}

inline ScalarField solve_poisson_torus(const ScalarField& rhs) {
  return TorusSpectral(rhs.domain()).solve_poisson(rhs);
}

// Euclidean inner product weighted by the cell area.
inline double inner(const ScalarField& a, const ScalarField& b) {
  a.check_same(b);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.domain().hx() * a.domain().hy();
}

} // namespace bps
