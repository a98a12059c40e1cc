#include <gtest/gtest.h>

#include "support.hpp"

using namespace mvem;
using namespace mvem::testing;

namespace {

struct Built {
  ElementGeometry geo;
  QuadratureRule rule;
  ScalarBasis scalar;
  Eigen::MatrixXd pV;
  VectorBasisOperators ops;
};

Built build(const PolygonalMesh& mesh, int cell, Approach a, int k) {
  Built b;
  b.geo = element_geometry(mesh, cell);
  b.rule = polygon_rule(b.geo, interior_degree(k));
  b.scalar = make_scalar_basis(b.geo, b.rule, k + 1, scalar_kind(a));
  b.pV = b.scalar.vandermonde(b.rule.points, k);
  b.ops = make_vector_basis(a, b.scalar, b.rule, b.pV);
  return b;
}

} // namespace

TEST(VectorBasis, ApproachNames) {
  for (Approach a : all_approaches) EXPECT_EQ(parse_approach(to_string(a)), a);
  EXPECT_THROW(parse_approach("legendre"), InvalidArgument);
}

TEST(VectorBasis, TNablaLowestDegree) {
  const auto one = build_t_nabla(monomial_derivative_matrices(1.0, 0));
  EXPECT_EQ(identity_error(one), 0.0);
  const auto two = build_t_nabla(monomial_derivative_matrices(2.0, 0));
  EXPECT_EQ(max_abs(two - 0.5 * Eigen::MatrixXd::Identity(2, 2)), 0.0);
}

TEST(VectorBasis, TNablaRowsReproduceGradients) {
  const auto b = build(unit_square(), 0, Approach::Monomial, 1);
  ASSERT_EQ(b.ops.T_nabla.rows(), 5);
  ASSERT_EQ(b.ops.T_nabla.cols(), 6);
  const auto pts = random_points(b.geo, 20);
  const auto gV = gbasis_vandermonde(b.ops, b.scalar.vandermonde(pts, 1));
  const auto N = static_cast<Eigen::Index>(pts.size());
  for (Eigen::Index i = 0; i < N; ++i)
    for (int a = 0; a < 5; ++a) {
      const Point g = scaled_monomial_gradient(pts[i], b.geo.centroid, b.geo.diameter, monomial_exponent(a + 2));
      EXPECT_NEAR(gV(i, a), g.x(), 1e-10);
      EXPECT_NEAR(gV(N + i, a), g.y(), 1e-10);
    }
}

TEST(VectorBasis, TPerpShapes) {
  EXPECT_EQ(build(unit_square(), 0, Approach::Monomial, 0).ops.T_perp.rows(), 0);
  const auto b1 = build(unit_square(), 0, Approach::Monomial, 1);
  ASSERT_EQ(b1.ops.T_perp.rows(), 1);
  EXPECT_LE(max_abs(b1.ops.T_nabla * b1.ops.T_perp.transpose()), 1e-12);
  const auto b2 = build(unit_square(), 0, Approach::Monomial, 2);
  ASSERT_EQ(b2.ops.T_perp.rows(), 3);
  EXPECT_LE(identity_error(b2.ops.T_perp * b2.ops.T_perp.transpose()), 1e-12);
}

TEST(VectorBasis, TPerpRejectsRankDeficientInput) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Random(3, 6);
  T.row(2) = T.row(0) + T.row(1);
  EXPECT_THROW(build_t_perp(T), RankDeficiency);
  EXPECT_THROW(build_t_perp(Eigen::MatrixXd::Random(4, 3)), InvalidArgument);
}

// T_nabla T_perp^T = 0 and orthonormal complement rows, k <= 8.
TEST(VectorBasis, ComplementOrthogonalOnUnitSquare) {
  for (Approach a : all_approaches)
    for (int k = 0; k <= 8; ++k) {
      const auto b = build(unit_square(), 0, a, k);
      EXPECT_LE(max_abs(b.ops.T_nabla * b.ops.T_perp.transpose()), 1e-12) << to_string(a) << " k=" << k;
      EXPECT_LE(identity_error(b.ops.T_perp * b.ops.T_perp.transpose()), 1e-12);
    }
}

// On aspect-100 cells the Partial gradient rows carry entries of order 1e4, so the
// product T_nabla T_perp^T is itself rounded at eps * |T_nabla|; the tolerance is
// taken relative to that scale there.
TEST(VectorBasis, ComplementOrthogonalOnAspect100) {
  const auto mesh = aspect_strip(100.0, 1);
  for (Approach a : all_approaches)
    for (int k = 0; k <= 8; ++k) {
      const auto b = build(mesh, 0, a, k);
      const double scale = a == Approach::Partial ? std::max(1.0, max_abs(b.ops.T_nabla)) : 1.0;
      EXPECT_LE(max_abs(b.ops.T_nabla * b.ops.T_perp.transpose()), 1e-12 * scale) << to_string(a) << " k=" << k;
      EXPECT_LE(identity_error(b.ops.T_perp * b.ops.T_perp.transpose()), 1e-12);
    }
}

TEST(VectorBasis, OrthoMassMatrixIsIdentity) {
  for (const auto& mesh : {unit_square(), aspect_strip(100.0, 1)})
    for (int k = 0; k <= 8; ++k) {
      const auto b = build(mesh, 0, Approach::Ortho, k);
      EXPECT_LE(identity_error(b.ops.G), 1e-10) << "k=" << k;
      EXPECT_LE(condition_number(b.ops.G), 1.0 + 1e-8);
      EXPECT_LE(identity_error(b.ops.T_nabla * b.ops.T_nabla.transpose()), 1e-12);
    }
}

TEST(VectorBasis, PartialMassMatrixBlocks) {
  for (int k = 1; k <= 6; ++k) {
    const auto b = build(unit_square(), 0, Approach::Partial, k);
    const int ng = grad_dim(k);
    const int np = perp_dim(k);
    EXPECT_LE(max_abs(b.ops.G.block(0, ng, ng, np)), 1e-11);
    EXPECT_LE(identity_error(b.ops.G.block(ng, ng, np, np)), 1e-11);
  }
}

TEST(VectorBasis, MonomialMassMatrixLowestDegree) {
  const auto b = build(unit_square(), 0, Approach::Monomial, 0);
  EXPECT_LE(max_abs(b.ops.G - 0.5 * Eigen::MatrixXd::Identity(2, 2)), 1e-15);
}

TEST(VectorBasis, MassMatrixSymmetricPositiveDefinite) {
  for (Approach a : all_approaches)
    for (int k = 0; k <= 5; ++k) {
      const auto b = build(rectangle(0.4, 0.1, 1.0, 1.0), 0, a, k);
      EXPECT_LE(max_abs(b.ops.G - b.ops.G.transpose()), 1e-13 * max_abs(b.ops.G));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.ops.G);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(VectorBasis, MassMatrixMatchesQuadratureOfVandermonde) {
  for (Approach a : all_approaches) {
    const auto b = build(rectangle(0.4, 0.1, 1.0, 1.0), 0, a, 3);
    const auto gV = gbasis_vandermonde(b.ops, b.pV);
    const auto N = static_cast<Eigen::Index>(b.rule.size());
    const auto w = b.rule.weight_vector();
    const Eigen::MatrixXd G = gV.topRows(N).transpose() * w.asDiagonal() * gV.topRows(N) +
                              gV.bottomRows(N).transpose() * w.asDiagonal() * gV.bottomRows(N);
    EXPECT_LE(max_abs(G - b.ops.G), 1e-13 * max_abs(G));
  }
}

TEST(VectorBasis, GradientOrthonormalizationIsHierarchical) {
  const auto geo = element_geometry(rectangle(1.0, 0.3), 0);
  const int k = 4;
  const auto rule = polygon_rule(geo, interior_degree(k));
  const auto basis = make_scalar_basis(geo, rule, k + 1, ScalarKind::MGS);
  const auto high = orthonormalize_gradients(build_t_nabla(derivative_matrices(basis)));

  // Same scalar basis truncated to degree k.
  ScalarBasis low_basis = basis;
  low_basis.degree = k;
  low_basis.L = basis.coefficients(k);
  const auto low = orthonormalize_gradients(build_t_nabla(derivative_matrices(low_basis)));

  const int nl = grad_dim(k - 1);
  const int nk1 = poly_dim(k - 1);
  const int nk = poly_dim(k);
  // Rows of the degree-(k-1) fields restricted to the degree-(k-1) coefficient columns.
  Eigen::MatrixXd restricted(nl, 2 * nk1);
  restricted << high.T_nabla.topRows(nl).leftCols(nk1), high.T_nabla.topRows(nl).middleCols(nk, nk1);
  EXPECT_LE(max_abs(restricted - low.T_nabla), 1e-12);
  // And no contribution from the degree-k columns.
  EXPECT_LE(max_abs(high.T_nabla.topRows(nl).middleCols(nk1, nk - nk1)), 1e-12);
  EXPECT_LE(max_abs(high.T_nabla.topRows(nl).rightCols(nk - nk1)), 1e-12);
}

TEST(VectorBasis, OrthoRowsUnitNormAtLowestDegree) {
  const auto b = build(aspect_strip(50.0, 1), 0, Approach::Ortho, 0);
  for (int r = 0; r < b.ops.T_nabla.rows(); ++r) EXPECT_NEAR(b.ops.T_nabla.row(r).norm(), 1.0, 1e-14);
}

TEST(VectorBasis, RejectsMismatchedInputs) {
  const auto geo = element_geometry(unit_square(), 0);
  const auto rule = polygon_rule(geo, interior_degree(1));
  const auto mono = make_scalar_basis(geo, rule, 2, ScalarKind::Monomial);
  const auto pV = mono.vandermonde(rule.points, 1);
  EXPECT_THROW(make_vector_basis(Approach::Ortho, mono, rule, pV), InvalidArgument);
  const auto ops = make_vector_basis(Approach::Monomial, mono, rule, pV);
  EXPECT_THROW(gbasis_vandermonde(ops, Eigen::MatrixXd::Zero(3, 2)), InvalidArgument);
}

// Both representations span (P_k)^2: each monomial-approach field is reproduced
// by a least-squares fit onto the Ortho fields.
TEST(VectorBasis, SpanEquivalence) {
  for (int k = 0; k <= 3; ++k) {
    const auto mono = build(unit_square(), 0, Approach::Monomial, k);
    const auto ortho = build(unit_square(), 0, Approach::Ortho, k);
    const auto pts = random_points(mono.geo, 40, 11);
    const auto A = gbasis_vandermonde(ortho.ops, ortho.scalar.vandermonde(pts, k));
    const auto Y = gbasis_vandermonde(mono.ops, mono.scalar.vandermonde(pts, k));
    const Eigen::MatrixXd C = A.colPivHouseholderQr().solve(Y);
    EXPECT_LE(max_abs(A * C - Y), 1e-8 * max_abs(Y)) << "k=" << k;
  }
}

// Conditioning order on aspect-ratio cells for k >= 4.
TEST(VectorBasis, ConditioningOrderOnAspectCells) {
  for (double ar : {10.0, 50.0, 100.0}) {
    const auto mesh = aspect_strip(ar, 1);
    for (int k = 4; k <= 8; ++k) {
      const double o = condition_number(build(mesh, 0, Approach::Ortho, k).ops.G);
      const double p = condition_number(build(mesh, 0, Approach::Partial, k).ops.G);
      const double m = condition_number(build(mesh, 0, Approach::Monomial, k).ops.G);
      EXPECT_LE(o, p);
      EXPECT_LE(p, m) << "ar=" << ar << " k=" << k;
    }
  }
}
