#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvem/errors.hpp"
#include "mvem/mesh.hpp"
#include "mvem/quadrature.hpp"

namespace mvem {

/// dim P_k = (k+1)(k+2)/2, with dim P_{-1} = 0.
constexpr int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }
/// Dimension of grad P_{k+1} inside (P_k)^2.
constexpr int grad_dim(int k) { return k < 0 ? 0 : poly_dim(k) + k + 1; }
/// Dimension of the complement of grad P_{k+1} inside (P_k)^2.
constexpr int perp_dim(int k) { return k < 0 ? 0 : poly_dim(k) - (k + 1); }

struct Exponent {
  int x = 0;
  int y = 0;

  constexpr int degree() const noexcept { return x + y; }
  bool operator==(const Exponent&) const = default;
};

/// 1-based graded index: (0,0) -> 1, (1,0) -> 2, (0,1) -> 3, (2,0) -> 4, ...
/// Inside a degree block the x power descends.
constexpr int monomial_index(Exponent a) {
  const int d = a.degree();
  return d * (d + 1) / 2 + a.y + 1;
}

/// Inverse of monomial_index (1-based).
constexpr Exponent monomial_exponent(int index) {
  int d = 0;
  while (poly_dim(d) < index) ++d;
  const int y = index - 1 - poly_dim(d - 1);
  return {d - y, y};
}

/// Entry (i, a) = ((x_i - x_C) / h_E)^a in graded order, a up to degree k.
inline Eigen::MatrixXd monomial_vandermonde(const Point& center, double scale,
                                            std::span<const Point> points, int k) {
  const int n = poly_dim(k);
  Eigen::MatrixXd V(static_cast<Eigen::Index>(points.size()), n);
  if (k < 0) return V;
  std::vector<double> px(k + 1), py(k + 1);
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const Point s = (points[i] - center) / scale;
    px[0] = py[0] = 1.0;
    for (int d = 1; d <= k; ++d) {
      px[d] = px[d - 1] * s.x();
      py[d] = py[d - 1] * s.y();
    }
    int col = 0;
    for (int d = 0; d <= k; ++d)
      for (int y = 0; y <= d; ++y) V(i, col++) = px[d - y] * py[y];
  }
  return V;
}

inline Eigen::MatrixXd monomial_vandermonde(const ElementGeometry& geo,
                                            std::span<const Point> points, int k) {
  return monomial_vandermonde(geo.centroid, geo.diameter, points, k);
}

/// Expansion coefficients of d/dx and d/dy of the degree-(k+1) basis members in the
/// degree-k basis; both matrices are n_{k+1} x n_k.
struct DerivativeMatrices {
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};

inline DerivativeMatrices monomial_derivative_matrices(double scale, int k) {
  const int rows = poly_dim(k + 1);
  const int cols = poly_dim(k);
  DerivativeMatrices d{Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols)};
  for (int r = 1; r <= rows; ++r) {
    const Exponent a = monomial_exponent(r);
    if (a.x > 0) d.dx(r - 1, monomial_index({a.x - 1, a.y}) - 1) = a.x / scale;
    if (a.y > 0) d.dy(r - 1, monomial_index({a.x, a.y - 1}) - 1) = a.y / scale;
  }
  return d;
}

inline DerivativeMatrices monomial_derivative_matrices(const ElementGeometry& geo, int k) {
  return monomial_derivative_matrices(geo.diameter, k);
}

struct QrFactors {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

/// Modified Gram-Schmidt A = Q R (euclidean), one pass.
///
/// Throws RankDeficiency when a pivot drops below `rank_tol` times the norm of its
/// original column, i.e. when a column is numerically dependent on the previous ones.
inline QrFactors modified_gram_schmidt(Eigen::MatrixXd A, double rank_tol = 1e-14) {
  const Eigen::Index n = A.cols();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd norms = A.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rii = A.col(i).norm();
    if (!(rii > rank_tol * norms(i)) || !(rii > 0.0))
      throw RankDeficiency("Gram-Schmidt pivot " + std::to_string(i) + " is numerically zero");
    R(i, i) = rii;
    A.col(i) /= rii;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      R(i, j) = A.col(i).dot(A.col(j));
      A.col(j) -= R(i, j) * A.col(i);
    }
  }
  return {std::move(A), std::move(R)};
}

/// Twice-applied MGS of a Vandermonde matrix against quadrature weights.
///
/// V = Q1 R1, diag(sqrt(w)) Q1 = Q2 R2, L = (R2 R1)^{-T}. The working basis is
/// q_a = sum_b L(a,b) m_b, orthonormal in the discrete L2 product defined by w.
inline Eigen::MatrixXd mgs_orthonormalize(const Eigen::MatrixXd& V, std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != V.rows())
    throw InvalidArgument("weight count does not match Vandermonde rows");
  if (V.rows() < V.cols())
    throw InvalidArgument("fewer quadrature points than basis functions");
  const auto first = modified_gram_schmidt(V);
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const auto second = modified_gram_schmidt(w.cwiseSqrt().asDiagonal() * first.Q);
  const Eigen::MatrixXd R = second.R * first.R;
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(R.rows(), R.cols()));
  return Rinv.transpose();
}

enum class ScalarKind { Monomial, MGS };

/// Scalar polynomial basis on one element, built once at degree `degree` (= k+1).
/// Lower degrees are prefixes: the degree-j basis is the first poly_dim(j) members.
struct ScalarBasis {
  ScalarKind kind = ScalarKind::Monomial;
  int degree = 0;
  Point center = Point::Zero();
  double scale = 1.0;
  /// poly_dim(degree) square, lower triangular; identity for monomials.
  Eigen::MatrixXd L;

  /// Leading block of L for the degree-j prefix.
  Eigen::MatrixXd coefficients(int j) const {
    const int n = poly_dim(j);
    return L.topLeftCorner(n, n);
  }

  /// Converts a scaled-monomial Vandermonde (any prefix degree) to the working basis.
  Eigen::MatrixXd from_monomials(const Eigen::MatrixXd& mv) const {
    if (kind == ScalarKind::Monomial) return mv;
    const Eigen::Index n = mv.cols();
    return mv * L.topLeftCorner(n, n).triangularView<Eigen::Lower>().transpose();
  }

  /// Working-basis Vandermonde (points x poly_dim(j)).
  Eigen::MatrixXd vandermonde(std::span<const Point> points, int j) const {
    if (j > degree) throw InvalidArgument("requested degree exceeds the basis degree");
    return from_monomials(monomial_vandermonde(center, scale, points, j));
  }
};

/// `mV` is the scaled-monomial Vandermonde of degree `degree` at the points of `weights`.
inline ScalarBasis make_scalar_basis(const ElementGeometry& geo, const Eigen::MatrixXd& mV,
                                     std::span<const double> weights, int degree, ScalarKind kind) {
  ScalarBasis basis;
  basis.kind = kind;
  basis.degree = degree;
  basis.center = geo.centroid;
  basis.scale = geo.diameter;
  const int n = poly_dim(degree);
  if (mV.cols() != n) throw InvalidArgument("Vandermonde degree does not match the basis degree");
  if (kind == ScalarKind::Monomial)
    basis.L = Eigen::MatrixXd::Identity(n, n);
  else
    basis.L = mgs_orthonormalize(mV, weights);
  return basis;
}

inline ScalarBasis make_scalar_basis(const ElementGeometry& geo, const QuadratureRule& rule,
                                     int degree, ScalarKind kind) {
  if (kind == ScalarKind::Monomial) return make_scalar_basis(geo, Eigen::MatrixXd(0, poly_dim(degree)), {}, degree, kind);
  return make_scalar_basis(geo, monomial_vandermonde(geo, rule.points, degree), rule.weights, degree, kind);
}

/// qD = L_{k+1} mD (L_k)^{-1}, the derivative matrices in the transformed basis.
inline DerivativeMatrices transform_derivative_matrices(const Eigen::MatrixXd& L_next,
                                                        const Eigen::MatrixXd& L_cur,
                                                        const DerivativeMatrices& mono) {
  for (Eigen::Index i = 0; i < L_cur.rows(); ++i)
    if (L_cur(i, i) == 0.0) throw RankDeficiency("singular basis coefficient matrix");
  const auto Lk = L_cur.triangularView<Eigen::Lower>();
  auto apply = [&](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    // X = (L_next m) Lk^{-1}  <=>  Lk^T X^T = (L_next m)^T
    const Eigen::MatrixXd lm = L_next * m;
    return Lk.transpose().solve(lm.transpose()).transpose();
  };
  return {apply(mono.dx), apply(mono.dy)};
}

/// Derivative matrices of `basis` from degree basis.degree to basis.degree - 1.
inline DerivativeMatrices derivative_matrices(const ScalarBasis& basis) {
  const int k = basis.degree - 1;
  auto mono = monomial_derivative_matrices(basis.scale, k);
  if (basis.kind == ScalarKind::Monomial) return mono;
  return transform_derivative_matrices(basis.L, basis.coefficients(k), mono);
}

/// Gram matrix of the working basis at degree j under `rule`.
inline Eigen::MatrixXd scalar_mass_matrix(const ScalarBasis& basis, const QuadratureRule& rule, int j) {
  const Eigen::MatrixXd V = basis.vandermonde(rule.points, j);
  return V.transpose() * rule.weight_vector().asDiagonal() * V;
}

} // namespace mvem
