#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "mvem/errors.hpp"
#include "mvem/mesh.hpp"

namespace mvem {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;
using TensorField = std::function<Eigen::Matrix2d(const Point&)>;

/// Data of  div(-D grad p + b p) + gamma p = f,  p = g_D on Gamma_D,
/// (-D grad p + b p) . n = g_N on Gamma_N.
///
/// The mixed form works with K = D^{-1} and beta = K b, so that K u = -grad p + beta p.
struct ProblemData {
  TensorField diffusion;
  VectorField advection;
  ScalarField reaction;
  ScalarField forcing;
  ScalarField dirichlet;
  ScalarField neumann;
  /// Optional, for error diagnostics.
  ScalarField exact_pressure;
  VectorField exact_velocity;

  Eigen::Matrix2d inverse_diffusion(const Point& x) const { return diffusion(x).inverse(); }

  Point beta(const Point& x) const { return diffusion(x).ldlt().solve(advection(x)); }

  bool has_exact_solution() const { return bool(exact_pressure) && bool(exact_velocity); }
};

/// p = x^2 y + sin(2 pi x) sin(2 pi y) + 2 on the unit square with
/// D = [y^2+1, -xy; -xy, x^2+1], b = (x, y), gamma = x^2 + y^3.
/// Neumann data is the outward flux on y = 0.
inline ProblemData test1_problem() {
  using std::cos;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  constexpr double tau = 2.0 * pi;

  struct Derivatives {
    double p, px, py, pxx, pyy, pxy;
  };
  auto eval = [=](const Point& q) {
    const double x = q.x();
    const double y = q.y();
    const double sx = sin(tau * x), cx = cos(tau * x);
    const double sy = sin(tau * y), cy = cos(tau * y);
    return Derivatives{
        x * x * y + sx * sy + 2.0,
        2.0 * x * y + tau * cx * sy,
        x * x + tau * sx * cy,
        2.0 * y - tau * tau * sx * sy,
        -tau * tau * sx * sy,
        2.0 * x + tau * tau * cx * cy,
    };
  };
  auto D = [](const Point& q) {
    Eigen::Matrix2d m;
    m << q.y() * q.y() + 1.0, -q.x() * q.y(), -q.x() * q.y(), q.x() * q.x() + 1.0;
    return m;
  };
  auto b = [](const Point& q) { return Point(q.x(), q.y()); };
  auto gamma = [](const Point& q) { return q.x() * q.x() + q.y() * q.y() * q.y(); };
  auto velocity = [=](const Point& q) {
    const auto d = eval(q);
    return Point(-D(q) * Point(d.px, d.py) + b(q) * d.p);
  };

  ProblemData data;
  data.diffusion = D;
  data.advection = b;
  data.reaction = gamma;
  data.exact_pressure = [=](const Point& q) { return eval(q).p; };
  data.exact_velocity = velocity;
  data.dirichlet = data.exact_pressure;
  // Outward normal on y = 0 is (0, -1).
  data.neumann = [=](const Point& q) { return -velocity(q).y(); };
  data.forcing = [=](const Point& q) {
    const double x = q.x();
    const double y = q.y();
    const auto d = eval(q);
    // div(D grad p) with D_11,x = D_22,y = 0, D_12,x = -y, D_12,y = -x.
    const double div_d_grad =
        (y * y + 1.0) * d.pxx - 2.0 * x * y * d.pxy + (x * x + 1.0) * d.pyy - y * d.py - x * d.px;
    // div(b p) = 2 p + b . grad p.
    const double div_bp = 2.0 * d.p + x * d.px + y * d.py;
    return -div_d_grad + div_bp + gamma(q) * d.p;
  };
  return data;
}

/// D = I, b = 0, gamma = 0 and a harmonic polynomial pressure of degree k
/// (Dirichlet everywhere, f = 0).
inline ProblemData patch_problem(int k) {
  if (k < 0) throw InvalidArgument("patch problem degree must be non-negative");
  ProblemData data;
  data.diffusion = [](const Point&) { return Eigen::Matrix2d::Identity().eval(); };
  data.advection = [](const Point&) { return Point::Zero().eval(); };
  data.reaction = [](const Point&) { return 0.0; };
  data.forcing = [](const Point&) { return 0.0; };
  data.neumann = [](const Point&) { return 0.0; };

  // Re((x + i y)^k) for k >= 2, plus low-order fallbacks.
  ScalarField p;
  VectorField grad;
  switch (k) {
  case 0:
    p = [](const Point&) { return 1.0; };
    grad = [](const Point&) { return Point::Zero().eval(); };
    break;
  case 1:
    p = [](const Point& q) { return q.x() + 2.0 * q.y(); };
    grad = [](const Point&) { return Point(1.0, 2.0); };
    break;
  default:
    p = [k](const Point& q) {
      return std::pow(std::complex<double>(q.x(), q.y()), k).real();
    };
    // d/dx Re(z^k) = Re(k z^{k-1}), d/dy Re(z^k) = -Im(k z^{k-1}).
    grad = [k](const Point& q) {
      const auto dz = static_cast<double>(k) * std::pow(std::complex<double>(q.x(), q.y()), k - 1);
      return Point(dz.real(), -dz.imag());
    };
    break;
  }
  data.exact_pressure = p;
  data.dirichlet = p;
  data.exact_velocity = [grad](const Point& q) { return Point(-grad(q)); };
  return data;
}

} // namespace mvem
