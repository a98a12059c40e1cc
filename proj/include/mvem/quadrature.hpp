#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "mvem/errors.hpp"
#include "mvem/mesh.hpp"

namespace mvem {

/// Rule on the reference interval [-1, 1].
struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const noexcept { return points.size(); }
};

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  /// Total polynomial degree integrated exactly.
  int degree = 0;

  std::size_t size() const noexcept { return points.size(); }

  Eigen::Map<const Eigen::VectorXd> weight_vector() const {
    return {weights.data(), static_cast<Eigen::Index>(weights.size())};
  }
};

namespace detail {

/// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], exact up to degree 2n-1.
inline QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs at least one point");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre(n, x).second;
    // Newton from the Tricomi guesses yields descending nodes.
    rule.points[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// (k+1)-point Gauss rule on the segment from a to b, points ordered from a to b.
/// These points are also the edge degrees of freedom for polynomial degree k.
inline QuadratureRule edge_rule(const Point& a, const Point& b, int k) {
  const double length = (b - a).norm();
  if (!(length > 0.0)) throw DegenerateEdge("zero-length edge");
  if (k < 0) throw InvalidArgument("negative polynomial degree");
  const auto ref = gauss_legendre(k + 1);
  QuadratureRule rule;
  rule.degree = 2 * k + 1;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = 0.5 * (ref.points[i] + 1.0);
    rule.points.push_back(a + t * (b - a));
    rule.weights.push_back(0.5 * length * ref.weights[i]);
  }
  return rule;
}

/// Collapsed (Duffy) tensor rule on triangle (a, b, c), exact up to `degree`.
inline void append_triangle_rule(const Point& a, const Point& b, const Point& c, int degree,
                                 QuadratureRule& out) {
  const double twice_area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  // The collapse contributes one extra power of the radial coordinate.
  const auto ref = gauss_legendre((degree + 3) / 2);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = 0.5 * (ref.points[i] + 1.0);
    const double wt = 0.5 * ref.weights[i];
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double s = 0.5 * (ref.points[j] + 1.0);
      const double ws = 0.5 * ref.weights[j];
      out.points.push_back(a + t * (b - a) + t * s * (c - b));
      out.weights.push_back(wt * ws * t * twice_area);
    }
  }
}

/// Interior rule on a polygon by fan triangulation from its centroid.
inline QuadratureRule polygon_rule(const ElementGeometry& geo, int degree) {
  if (degree < 0) throw InvalidArgument("negative quadrature degree");
  QuadratureRule rule;
  rule.degree = degree;
  const auto& loop = geo.vertices;
  const auto n = loop.size();
  for (std::size_t j = 0; j < n; ++j) {
    const Point& a = loop[j];
    const Point& b = loop[(j + 1) % n];
    const double twice_area = (a - geo.centroid).x() * (b - geo.centroid).y() -
                              (a - geo.centroid).y() * (b - geo.centroid).x();
    if (!(twice_area > 0.0))
      throw NotStarShaped("cell " + std::to_string(geo.cell) +
                          " is not star-shaped with respect to its centroid");
    append_triangle_rule(geo.centroid, a, b, degree, rule);
  }
  return rule;
}

/// Interior exactness used for a degree-k discretization.
constexpr int interior_degree(int k) { return 2 * (k + 1) + 2; }

} // namespace mvem
