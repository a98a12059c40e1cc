#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mvem/mvem.hpp"

namespace mvem::testing {

inline const std::vector<Approach> all_approaches{Approach::Monomial, Approach::Partial, Approach::Ortho};

/// Single-cell mesh [x0, x0+w] x [y0, y0+h].
inline PolygonalMesh rectangle(double w, double h, double x0 = 0.0, double y0 = 0.0,
                               const BoundaryPredicate& boundary = all_dirichlet()) {
  return make_mesh({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}}, {{0, 1, 2, 3}}, boundary);
}

inline PolygonalMesh unit_square() { return rectangle(1.0, 1.0); }

/// One column of the aspect-ratio meshes: cells of width 0.1 and height 0.1 / ar.
inline PolygonalMesh aspect_strip(double ar, int rows = 3) {
  return build_rectangle_grid(1, rows, 0.1, rows * 0.1 / ar, all_dirichlet());
}

/// int_0^1 int_0^1 x^a y^b.
inline double unit_square_moment(int a, int b) { return 1.0 / ((a + 1.0) * (b + 1.0)); }

/// Scaled monomial and its gradient, evaluated directly.
inline double scaled_monomial(const Point& x, const Point& c, double h, Exponent a) {
  return std::pow((x.x() - c.x()) / h, a.x) * std::pow((x.y() - c.y()) / h, a.y);
}

inline Point scaled_monomial_gradient(const Point& x, const Point& c, double h, Exponent a) {
  const double sx = (x.x() - c.x()) / h;
  const double sy = (x.y() - c.y()) / h;
  const double gx = a.x == 0 ? 0.0 : a.x * std::pow(sx, a.x - 1) * std::pow(sy, a.y) / h;
  const double gy = a.y == 0 ? 0.0 : a.y * std::pow(sx, a.x) * std::pow(sy, a.y - 1) / h;
  return {gx, gy};
}

/// Fourth-order central difference of f along direction d.
inline double central_difference(const std::function<double(const Point&)>& f, const Point& x, const Point& d,
                                 double h) {
  return (-f(x + 2 * h * d) + 8 * f(x + h * d) - 8 * f(x - h * d) + f(x - 2 * h * d)) / (12 * h);
}

inline std::vector<Point> random_points(const ElementGeometry& geo, int n, unsigned seed = 7) {
  // Points inside the bounding box shrunk towards the centroid; fine for convex cells.
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> t(0.05, 0.95);
  std::vector<Point> pts;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& v : geo.vertices) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  for (int i = 0; i < n; ++i) pts.emplace_back(xmin + t(gen) * (xmax - xmin), ymin + t(gen) * (ymax - ymin));
  return pts;
}

/// Degrees of freedom of a vector field, computed by quadrature from their definition:
/// normal values at the edge Gauss points, then (1/|E|) int q . g for the leading
/// gradient fields and the complement fields of the element's vector basis.
inline Eigen::VectorXd dofs_of_field(const ElementSpace& s, const std::function<Point(const Point&)>& q) {
  const auto& lay = s.layout;
  Eigen::VectorXd d(lay.total());
  for (std::size_t r = 0; r < s.boundary.size(); ++r)
    d(static_cast<Eigen::Index>(r)) = q(s.boundary.points[r]).dot(s.boundary_normals[r]);
  const Eigen::Index N = s.interior.size();
  Eigen::VectorXd qx(N), qy(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Point v = q(s.interior.points[i]);
    qx(i) = v.x() * s.interior.weights[i];
    qy(i) = v.y() * s.interior.weights[i];
  }
  const Eigen::VectorXd moments = (s.gV.topRows(N).transpose() * qx + s.gV.bottomRows(N).transpose() * qy) / s.area();
  d.segment(lay.nabla_offset(), lay.nabla_dofs()) = moments.head(lay.nabla_dofs());
  d.tail(lay.perp_dofs()) = moments.tail(lay.perp_dofs());
  return d;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double identity_error(const Eigen::MatrixXd& m) {
  return max_abs(m - Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

} // namespace mvem::testing
