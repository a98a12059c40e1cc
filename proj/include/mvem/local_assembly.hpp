#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mvem/errors.hpp"
#include "mvem/mesh.hpp"
#include "mvem/problems.hpp"
#include "mvem/quadrature.hpp"
#include "mvem/scalar_basis.hpp"
#include "mvem/vector_basis.hpp"

namespace mvem {

/// Local velocity degrees of freedom: edge values first (per local edge, in global
/// edge direction), then internal gradient moments, then internal complement moments.
struct DofLayout {
  int k = 0;
  int num_edges = 0;

  int edge_dofs() const noexcept { return num_edges * (k + 1); }
  int nabla_dofs() const noexcept { return grad_dim(k - 1); }
  int perp_dofs() const noexcept { return perp_dim(k); }
  int internal_dofs() const noexcept { return nabla_dofs() + perp_dofs(); }
  int total() const noexcept { return edge_dofs() + internal_dofs(); }
  int nabla_offset() const noexcept { return edge_dofs(); }
  int perp_offset() const noexcept { return edge_dofs() + nabla_dofs(); }
};

/// Everything needed to assemble one element for one (approach, k).
struct ElementSpace {
  Approach approach = Approach::Monomial;
  int k = 0;
  ElementGeometry geometry;
  DofLayout layout;

  QuadratureRule interior;
  /// Edge rules of all local edges concatenated; point r is edge dof r.
  QuadratureRule boundary;
  /// Outward unit normal at each boundary point.
  std::vector<Point> boundary_normals;
  /// Local edge owning each boundary point.
  std::vector<int> boundary_edge;

  ScalarBasis scalar;
  VectorBasisOperators vec;

  Eigen::MatrixXd pV;        // interior, degree k
  Eigen::MatrixXd pV_next;   // interior, degree k+1
  Eigen::MatrixXd pVb;       // boundary, degree k
  Eigen::MatrixXd pVb_next;  // boundary, degree k+1
  Eigen::MatrixXd gV;        // interior vector basis, x rows over y rows
  Eigen::MatrixXd gVb;       // boundary vector basis

  double area() const noexcept { return geometry.area; }
  int n_poly() const noexcept { return poly_dim(k); }
};

inline ElementSpace make_element_space(const PolygonalMesh& mesh, int cell, Approach approach, int k) {
  if (k < 0) throw InvalidArgument("polynomial degree must be non-negative");
  ElementSpace s;
  s.approach = approach;
  s.k = k;
  s.geometry = element_geometry(mesh, cell);
  const auto& geo = s.geometry;
  s.layout = {k, geo.num_edges()};

  s.interior = polygon_rule(geo, interior_degree(k));
  s.boundary.degree = 2 * k + 1;
  const auto n = geo.vertices.size();
  for (std::size_t j = 0; j < n; ++j) {
    Point a = geo.vertices[j];
    Point b = geo.vertices[(j + 1) % n];
    if (geo.reversed[j]) std::swap(a, b);
    const auto edge = edge_rule(a, b, k);
    for (std::size_t i = 0; i < edge.size(); ++i) {
      s.boundary.points.push_back(edge.points[i]);
      s.boundary.weights.push_back(edge.weights[i]);
      s.boundary_normals.push_back(geo.outward_normals[j]);
      s.boundary_edge.push_back(static_cast<int>(j));
    }
  }

  const auto mV = monomial_vandermonde(geo, s.interior.points, k + 1);
  s.scalar = make_scalar_basis(geo, mV, s.interior.weights, k + 1, scalar_kind(approach));
  s.pV_next = s.scalar.from_monomials(mV);
  s.pV = s.pV_next.leftCols(poly_dim(k));
  s.pVb_next = s.scalar.vandermonde(s.boundary.points, k + 1);
  s.pVb = s.pVb_next.leftCols(poly_dim(k));

  s.vec = make_vector_basis(approach, s.scalar, s.interior, s.pV);
  s.gV = gbasis_vandermonde(s.vec, s.pV);
  s.gVb = gbasis_vandermonde(s.vec, s.pVb);
  return s;
}

/// W_{a i} = int_E div(phi_i) p_a, split by Gauss-Green into a volume part carried
/// by the internal gradient moments and an exact boundary part.
inline Eigen::MatrixXd assemble_W(const ElementSpace& s) {
  const auto& lay = s.layout;
  const int n = s.n_poly();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, lay.total());
  W.leftCols(lay.edge_dofs()) = s.pVb.transpose() * s.boundary.weight_vector().asDiagonal();

  const int m = lay.nabla_dofs();
  if (m == 0) return W;
  if (s.approach == Approach::Ortho) {
    if (s.vec.L_nabla.rows() < m) throw InvalidState("missing L_nabla for the orthonormal approach");
    const Eigen::MatrixXd block = s.vec.L_nabla.topLeftCorner(m, m);
    const Eigen::MatrixXd inv =
        block.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
    W.block(1, lay.nabla_offset(), m, m) = -s.area() * inv;
  } else {
    W.block(1, lay.nabla_offset(), m, m) = -s.area() * Eigen::MatrixXd::Identity(m, m);
  }
  return W;
}

/// Coefficients of div(phi_i) in the pressure basis: pH^k Lambda = W.
///
/// With an L2-orthonormal scalar basis pH^k = I, so Lambda = W unless `force_solve`.
inline Eigen::MatrixXd divergence_coefficients(const ElementSpace& s, const Eigen::MatrixXd& W,
                                               bool force_solve = false) {
  if (s.approach != Approach::Monomial && !force_solve) return W;
  const Eigen::MatrixXd H = s.pV.transpose() * s.interior.weight_vector().asDiagonal() * s.pV;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() == 0.0).any())
    throw RankDeficiency("scalar mass matrix is singular");
  return ldlt.solve(W);
}

struct ProjectionRhs {
  Eigen::MatrixXd B;       // 2 n_k x N_dof, gradient rows then complement rows
  Eigen::MatrixXd Lambda;  // n_k x N_dof
};

/// B_{J i} = int_E phi_i . g_J.
inline ProjectionRhs assemble_B(const ElementSpace& s, const Eigen::MatrixXd& W) {
  const auto& lay = s.layout;
  const int n = s.n_poly();
  const int ng = grad_dim(s.k);
  const int np = perp_dim(s.k);

  ProjectionRhs out;
  out.Lambda = divergence_coefficients(s, W);

  const Eigen::MatrixXd H_next =
      s.pV_next.transpose() * s.interior.weight_vector().asDiagonal() * s.pV_next;
  Eigen::MatrixXd Bnabla = -H_next.block(1, 0, ng, n) * out.Lambda;
  Bnabla.leftCols(lay.edge_dofs()) +=
      s.pVb_next.rightCols(ng).transpose() * s.boundary.weight_vector().asDiagonal();
  if (s.approach == Approach::Ortho) Bnabla = s.vec.L_nabla * Bnabla;

  out.B = Eigen::MatrixXd::Zero(2 * n, lay.total());
  out.B.topRows(ng) = Bnabla;
  out.B.block(ng, lay.perp_offset(), np, np) = s.area() * Eigen::MatrixXd::Identity(np, np);
  return out;
}

/// Solves G Pi = B; with `identity_mass` (orthonormal vector basis) Pi = B.
inline Eigen::MatrixXd assemble_Pi(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B,
                                   bool identity_mass = false) {
  if (identity_mass) return B;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  const auto d = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !d.allFinite() || d.minCoeff() == 0.0) {
    const double cond = d.minCoeff() > 0.0 ? d.maxCoeff() / d.minCoeff()
                                           : std::numeric_limits<double>::infinity();
    throw ConditioningError("vector mass matrix is numerically singular", cond);
  }
  return ldlt.solve(B);
}

/// D_{i I} = dof_i(g_I), edge rows with the element-outward normal.
inline Eigen::MatrixXd assemble_D(const ElementSpace& s) {
  const auto& lay = s.layout;
  const int n2 = 2 * s.n_poly();
  const Eigen::Index nb = s.boundary.size();
  Eigen::MatrixXd D(lay.total(), n2);
  for (Eigen::Index r = 0; r < nb; ++r) {
    const Point& nr = s.boundary_normals[r];
    D.row(r) = nr.x() * s.gVb.row(r) + nr.y() * s.gVb.row(nb + r);
  }
  const double inv_area = 1.0 / s.area();
  D.middleRows(lay.nabla_offset(), lay.nabla_dofs()) = inv_area * s.vec.G.topRows(lay.nabla_dofs());
  D.bottomRows(lay.perp_dofs()) = inv_area * s.vec.G.bottomRows(lay.perp_dofs());
  return D;
}

struct DiffusionMatrices {
  Eigen::MatrixXd consistency;
  Eigen::MatrixXd stability;
  double k_bar = 0.0;

  Eigen::MatrixXd total() const { return consistency + stability; }
};

/// Largest eigenvalue of a symmetric 2x2 matrix.
inline double max_eigenvalue(const Eigen::Matrix2d& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
  return mean + std::hypot(half_diff, m(0, 1));
}

/// Consistency (K Pi u, Pi v) and dof-based stabilization
/// K_bar |E| (I - D Pi)^T (I - D Pi), K = D^{-1} sampled at the interior rule.
inline DiffusionMatrices assemble_diffusion(const ElementSpace& s, const Eigen::MatrixXd& Pi,
                                            const Eigen::MatrixXd& D, const ProblemData& problem) {
  const Eigen::Index N = s.interior.size();
  Eigen::VectorXd kxx(N), kxy(N), kyy(N);
  double k_bar = 0.0;
  for (Eigen::Index q = 0; q < N; ++q) {
    const Point& x = s.interior.points[q];
    const Eigen::Matrix2d Dx = problem.diffusion(x);
    if (std::abs(Dx(0, 1) - Dx(1, 0)) > 1e-12 * Dx.cwiseAbs().maxCoeff() || !(Dx(0, 0) > 0.0) ||
        !(Dx.determinant() > 0.0))
      throw InvalidCoefficient("diffusion tensor is not symmetric positive definite");
    const Eigen::Matrix2d K = Dx.inverse();
    const double w = s.interior.weights[q];
    kxx(q) = K(0, 0) * w;
    kxy(q) = 0.5 * (K(0, 1) + K(1, 0)) * w;
    kyy(q) = K(1, 1) * w;
    k_bar = std::max(k_bar, max_eigenvalue(K));
  }
  const auto gx = s.gV.topRows(N);
  const auto gy = s.gV.bottomRows(N);
  const Eigen::MatrixXd cross = gx.transpose() * kxy.asDiagonal() * gy;
  const Eigen::MatrixXd GK = gx.transpose() * kxx.asDiagonal() * gx + cross + cross.transpose() +
                             gy.transpose() * kyy.asDiagonal() * gy;

  DiffusionMatrices out;
  out.k_bar = k_bar;
  const Eigen::MatrixXd Kc = Pi.transpose() * GK * Pi;
  out.consistency = 0.5 * (Kc + Kc.transpose());
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(D.rows(), D.rows()) - D * Pi;
  out.stability = k_bar * s.area() * (R.transpose() * R);
  return out;
}

/// int_E beta . (Pi phi_i) p_a  (N_dof x n_k). Enters the local system with a minus.
inline Eigen::MatrixXd assemble_advection(const ElementSpace& s, const Eigen::MatrixXd& Pi,
                                          const ProblemData& problem) {
  const Eigen::Index N = s.interior.size();
  Eigen::VectorXd bx(N), by(N);
  for (Eigen::Index q = 0; q < N; ++q) {
    const Point beta = problem.beta(s.interior.points[q]);
    bx(q) = beta.x() * s.interior.weights[q];
    by(q) = beta.y() * s.interior.weights[q];
  }
  const Eigen::MatrixXd M = s.gV.topRows(N).transpose() * bx.asDiagonal() * s.pV +
                            s.gV.bottomRows(N).transpose() * by.asDiagonal() * s.pV;
  return Pi.transpose() * M;
}

inline Eigen::MatrixXd assemble_reaction(const ElementSpace& s, const ProblemData& problem) {
  const Eigen::Index N = s.interior.size();
  Eigen::VectorXd g(N);
  for (Eigen::Index q = 0; q < N; ++q) g(q) = problem.reaction(s.interior.points[q]) * s.interior.weights[q];
  const Eigen::MatrixXd H = s.pV.transpose() * g.asDiagonal() * s.pV;
  return 0.5 * (H + H.transpose());
}

/// Projection-related local matrices (no problem data involved).
struct ProjectionMatrices {
  Eigen::MatrixXd W;
  Eigen::MatrixXd Lambda;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Pi;
  Eigen::MatrixXd D;
};

inline ProjectionMatrices assemble_projection(const ElementSpace& s) {
  ProjectionMatrices p;
  p.W = assemble_W(s);
  auto rhs = assemble_B(s, p.W);
  p.B = std::move(rhs.B);
  p.Lambda = std::move(rhs.Lambda);
  p.Pi = assemble_Pi(s.vec.G, p.B, s.approach == Approach::Ortho);
  p.D = assemble_D(s);
  return p;
}

struct LocalMatrices {
  ProjectionMatrices projection;
  DiffusionMatrices diffusion;
  Eigen::MatrixXd Tbeta;
  Eigen::MatrixXd Hgamma;
  /// [Ka, -W^T - Tbeta; W, Hgamma], velocity dofs first.
  Eigen::MatrixXd KE;
  Eigen::VectorXd rhs_velocity;
  Eigen::VectorXd rhs_pressure;
};

/// Places the blocks of the local saddle-point matrix and builds the local load:
/// velocity rows carry -int_{Gamma_D} g_D phi.n, pressure rows carry (f, p_a).
inline void local_system(const ElementSpace& s, const ProblemData& problem, LocalMatrices& m) {
  const int N = s.layout.total();
  const int n = s.n_poly();
  const auto& W = m.projection.W;
  m.KE.resize(N + n, N + n);
  m.KE.topLeftCorner(N, N) = m.diffusion.total();
  m.KE.topRightCorner(N, n) = -W.transpose() - m.Tbeta;
  m.KE.bottomLeftCorner(n, N) = W;
  m.KE.bottomRightCorner(n, n) = m.Hgamma;

  m.rhs_velocity = Eigen::VectorXd::Zero(N);
  for (std::size_t r = 0; r < s.boundary.size(); ++r) {
    const int j = s.boundary_edge[r];
    if (s.geometry.edge_tags[j] != BoundaryTag::Dirichlet) continue;
    m.rhs_velocity(static_cast<Eigen::Index>(r)) =
        -s.boundary.weights[r] * problem.dirichlet(s.boundary.points[r]);
  }
  Eigen::VectorXd fw(s.interior.size());
  for (std::size_t q = 0; q < s.interior.size(); ++q)
    fw(static_cast<Eigen::Index>(q)) = problem.forcing(s.interior.points[q]) * s.interior.weights[q];
  m.rhs_pressure = s.pV.transpose() * fw;
}

inline LocalMatrices assemble_local(const ElementSpace& s, const ProblemData& problem) {
  LocalMatrices m;
  m.projection = assemble_projection(s);
  m.diffusion = assemble_diffusion(s, m.projection.Pi, m.projection.D, problem);
  m.Tbeta = assemble_advection(s, m.projection.Pi, problem);
  m.Hgamma = assemble_reaction(s, problem);
  local_system(s, problem, m);
  return m;
}

} // namespace mvem
