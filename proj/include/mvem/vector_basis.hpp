#pragma once

#include <string>

#include <Eigen/Dense>

#include "mvem/errors.hpp"
#include "mvem/quadrature.hpp"
#include "mvem/scalar_basis.hpp"

namespace mvem {

/// How the basis of (P_k)^2 is built.
///
/// Monomial: gradients of scaled monomials plus an SVD complement.
/// Partial:  same construction on top of the MGS scalar basis; the complement is
///           L2-orthonormal and orthogonal to the gradients.
/// Ortho:    additionally orthonormalizes the gradient rows, so G = I.
enum class Approach { Monomial, Partial, Ortho };

inline const char* to_string(Approach a) {
  switch (a) {
  case Approach::Monomial: return "monomial";
  case Approach::Partial: return "partial";
  case Approach::Ortho: return "ortho";
  }
  return "?";
}

inline Approach parse_approach(const std::string& s) {
  if (s == "monomial") return Approach::Monomial;
  if (s == "partial") return Approach::Partial;
  if (s == "ortho") return Approach::Ortho;
  throw InvalidArgument("unknown approach '" + s + "'");
}

constexpr ScalarKind scalar_kind(Approach a) {
  return a == Approach::Monomial ? ScalarKind::Monomial : ScalarKind::MGS;
}

/// Rows of the coefficient matrices expand each vector basis member in the
/// componentwise basis (p_1,0),...,(p_n,0),(0,p_1),...,(0,p_n) of (P_k)^2.
struct VectorBasisOperators {
  Approach approach = Approach::Monomial;
  int k = 0;
  Eigen::MatrixXd T_nabla;  // grad_dim(k) x 2 poly_dim(k)
  Eigen::MatrixXd T_perp;   // perp_dim(k) x 2 poly_dim(k)
  Eigen::MatrixXd L_nabla;  // grad_dim(k) square; identity unless Ortho
  Eigen::MatrixXd G;        // mass matrix, 2 poly_dim(k) square

  int n_poly() const noexcept { return poly_dim(k); }
  int n_grad() const noexcept { return grad_dim(k); }
  int n_perp() const noexcept { return perp_dim(k); }

  /// [T_nabla; T_perp].
  Eigen::MatrixXd coefficients() const {
    Eigen::MatrixXd T(T_nabla.rows() + T_perp.rows(), T_nabla.cols());
    T << T_nabla, T_perp;
    return T;
  }
};

/// Row a: concatenated x/y coefficients of grad p^{k+1}_{a+1}.
inline Eigen::MatrixXd build_t_nabla(const DerivativeMatrices& d) {
  const Eigen::Index rows = d.dx.rows() - 1;
  Eigen::MatrixXd T(rows, 2 * d.dx.cols());
  T << d.dx.bottomRows(rows), d.dy.bottomRows(rows);
  return T;
}

/// Euclidean-orthonormal basis (as rows) of the nullspace of T_nabla.
inline Eigen::MatrixXd build_t_perp(const Eigen::MatrixXd& T_nabla, double null_tol = 1e-12) {
  const Eigen::Index rows = T_nabla.rows();
  const Eigen::Index cols = T_nabla.cols();
  if (rows > cols) throw InvalidArgument("T_nabla has more rows than columns");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(T_nabla, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  // The nullspace has exactly cols - rows directions iff every computed singular
  // value is above the threshold.
  if (rows > 0 && !(s(rows - 1) > null_tol * s(0)))
    throw RankDeficiency("T_nabla is numerically rank deficient (sigma_min/sigma_max = " +
                         std::to_string(s(rows - 1) / s(0)) + ")");
  return svd.matrixV().rightCols(cols - rows).transpose();
}

struct OrthonormalGradients {
  Eigen::MatrixXd L_nabla;
  Eigen::MatrixXd T_nabla;
  Eigen::MatrixXd T_perp;
};

/// One MGS pass on T_nabla^T: T_nabla' = Q^T = L_nabla T_nabla with L_nabla = R^{-T};
/// the complement is recomputed from T_nabla'.
inline OrthonormalGradients orthonormalize_gradients(const Eigen::MatrixXd& T_nabla) {
  const auto qr = modified_gram_schmidt(T_nabla.transpose());
  const Eigen::MatrixXd Rinv = qr.R.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(qr.R.rows(), qr.R.cols()));
  OrthonormalGradients out;
  out.L_nabla = Rinv.transpose();
  out.T_nabla = qr.Q.transpose();
  out.T_perp = build_t_perp(out.T_nabla);
  return out;
}

/// Vandermonde of the vector basis: x components stacked over y components,
/// columns ordered gradients first, then complement.
inline Eigen::MatrixXd gbasis_vandermonde(const VectorBasisOperators& ops, const Eigen::MatrixXd& scalarV) {
  const Eigen::Index n = ops.n_poly();
  if (scalarV.cols() != n) throw InvalidArgument("scalar Vandermonde has the wrong column count");
  const Eigen::MatrixXd T = ops.coefficients();
  const Eigen::Index N = scalarV.rows();
  Eigen::MatrixXd gV(2 * N, 2 * n);
  gV.topRows(N) = scalarV * T.leftCols(n).transpose();
  gV.bottomRows(N) = scalarV * T.rightCols(n).transpose();
  return gV;
}

/// G_IJ = int_E g_I . g_J from the scalar Gram matrix H of the degree-k working basis:
/// G = Tx H Tx^T + Ty H Ty^T, the same quadrature as gV^T blockdiag(W, W) gV.
inline Eigen::MatrixXd mass_matrix_g(const VectorBasisOperators& ops, const Eigen::MatrixXd& H) {
  const Eigen::Index n = ops.n_poly();
  if (H.rows() != n || H.cols() != n) throw InvalidArgument("scalar Gram matrix has the wrong size");
  const Eigen::MatrixXd T = ops.coefficients();
  const auto Tx = T.leftCols(n);
  const auto Ty = T.rightCols(n);
  const Eigen::MatrixXd G = Tx * H * Tx.transpose() + Ty * H * Ty.transpose();
  return 0.5 * (G + G.transpose());
}

/// G_IJ = int_E g_I . g_J under `rule`, `scalarV` being the degree-k Vandermonde at its points.
inline Eigen::MatrixXd mass_matrix_g(const VectorBasisOperators& ops, const QuadratureRule& rule,
                                     const Eigen::MatrixXd& scalarV) {
  if (scalarV.cols() != ops.n_poly()) throw InvalidArgument("scalar Vandermonde has the wrong column count");
  return mass_matrix_g(ops, scalarV.transpose() * rule.weight_vector().asDiagonal() * scalarV);
}

/// Builds T_nabla, T_perp, L_nabla and G for one element and approach.
/// `basis` must have degree k+1 and `scalarV` is its degree-k Vandermonde at `rule`.
inline VectorBasisOperators make_vector_basis(Approach approach, const ScalarBasis& basis,
                                              const QuadratureRule& rule, const Eigen::MatrixXd& scalarV) {
  if (basis.kind != scalar_kind(approach))
    throw InvalidArgument("scalar basis kind does not match the approach");
  VectorBasisOperators ops;
  ops.approach = approach;
  ops.k = basis.degree - 1;
  const auto T2 = build_t_nabla(derivative_matrices(basis));
  if (approach == Approach::Ortho) {
    auto ortho = orthonormalize_gradients(T2);
    ops.T_nabla = std::move(ortho.T_nabla);
    ops.T_perp = std::move(ortho.T_perp);
    ops.L_nabla = std::move(ortho.L_nabla);
  } else {
    ops.T_nabla = T2;
    ops.T_perp = build_t_perp(T2);
    ops.L_nabla = Eigen::MatrixXd::Identity(T2.rows(), T2.rows());
  }
  ops.G = mass_matrix_g(ops, rule, scalarV);
  return ops;
}

} // namespace mvem
