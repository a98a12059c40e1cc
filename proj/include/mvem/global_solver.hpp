#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mvem/errors.hpp"
#include "mvem/local_assembly.hpp"
#include "mvem/mesh.hpp"
#include "mvem/problems.hpp"
#include "mvem/quadrature.hpp"

namespace mvem {

/// Global numbering of the unknowns.
///
/// Velocity: edge dofs first (edge-major, Gauss points along the global edge
/// direction), then internal dofs cell-major. Pressure dofs follow, cell-major.
struct DofMap {
  int k = 0;
  int num_cells = 0;
  int num_edges = 0;
  int edge_dofs_per_edge = 0;
  int internal_dofs_per_cell = 0;
  int pressure_dofs_per_cell = 0;
  /// Per cell: global index and sign of every local velocity dof.
  std::vector<std::vector<int>> velocity_index;
  std::vector<std::vector<int>> velocity_sign;
  /// Neumann edge dofs and their prescribed values (filled by assemble_global).
  std::vector<int> constrained;
  std::vector<double> constrained_values;

  int num_velocity() const noexcept {
    return num_edges * edge_dofs_per_edge + num_cells * internal_dofs_per_cell;
  }
  int num_pressure() const noexcept { return num_cells * pressure_dofs_per_cell; }
  int num_total() const noexcept { return num_velocity() + num_pressure(); }
  int pressure_index(int cell, int alpha) const noexcept {
    return num_velocity() + cell * pressure_dofs_per_cell + alpha;
  }
};

inline DofMap number_dofs(const PolygonalMesh& mesh, int k) {
  if (k < 0) throw InvalidArgument("polynomial degree must be non-negative");
  DofMap map;
  map.k = k;
  map.num_cells = mesh.num_cells();
  map.num_edges = mesh.num_edges();
  map.edge_dofs_per_edge = k + 1;
  map.internal_dofs_per_cell = grad_dim(k - 1) + perp_dim(k);
  map.pressure_dofs_per_cell = poly_dim(k);

  const int edge_block = map.num_edges * map.edge_dofs_per_edge;
  map.velocity_index.resize(map.num_cells);
  map.velocity_sign.resize(map.num_cells);
  for (int c = 0; c < map.num_cells; ++c) {
    auto& idx = map.velocity_index[c];
    auto& sgn = map.velocity_sign[c];
    for (std::size_t j = 0; j < mesh.cell_edges[c].size(); ++j) {
      const int e = mesh.cell_edges[c][j];
      for (int i = 0; i <= k; ++i) {
        idx.push_back(e * (k + 1) + i);
        sgn.push_back(mesh.cell_edge_signs[c][j]);
      }
    }
    for (int i = 0; i < map.internal_dofs_per_cell; ++i) {
      idx.push_back(edge_block + c * map.internal_dofs_per_cell + i);
      sgn.push_back(1);
    }
  }
  return map;
}

struct GlobalSystem {
  DofMap dofs;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  /// Global unknown -> row of the reduced system, or -1 for eliminated dofs.
  std::vector<int> reduced_index;
  std::vector<std::string> warnings;
};

/// Element-level callback used by assemble_global to expose local data
/// (e.g. for conditioning diagnostics) without assembling twice.
using ElementObserver = std::function<void(const ElementSpace&, const LocalMatrices&)>;

/// Scatters all local systems, eliminating Neumann edge dofs.
inline GlobalSystem assemble_global(const PolygonalMesh& mesh, const ProblemData& problem,
                                    Approach approach, int k, const ElementObserver& observer = {}) {
  GlobalSystem sys;
  sys.dofs = number_dofs(mesh, k);
  auto& dofs = sys.dofs;

  // Neumann values: g_N at the edge Gauss points, sign of the global normal
  // (which is outward on boundary edges).
  std::vector<double> fixed(dofs.num_total(), 0.0);
  std::vector<bool> is_fixed(dofs.num_total(), false);
  bool has_dirichlet = false;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges[e];
    if (edge.tag == BoundaryTag::Dirichlet) has_dirichlet = true;
    if (edge.tag != BoundaryTag::Neumann) continue;
    if (!problem.neumann) throw InvalidArgument("Neumann edges present but no Neumann data");
    const auto rule = edge_rule(mesh.vertices[edge.vertices[0]], mesh.vertices[edge.vertices[1]], k);
    for (int i = 0; i <= k; ++i) {
      const int g = e * (k + 1) + i;
      is_fixed[g] = true;
      fixed[g] = problem.neumann(rule.points[i]);
      dofs.constrained.push_back(g);
      dofs.constrained_values.push_back(fixed[g]);
    }
  }

  sys.reduced_index.assign(dofs.num_total(), -1);
  int next = 0;
  for (int g = 0; g < dofs.num_total(); ++g)
    if (!is_fixed[g]) sys.reduced_index[g] = next++;
  const int n = next;
  sys.rhs = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> triplets;
  bool reaction_vanishes = true;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto space = make_element_space(mesh, c, approach, k);
    const auto local = assemble_local(space, problem);
    if (observer) observer(space, local);
    if (local.Hgamma.cwiseAbs().maxCoeff() > 0.0) reaction_vanishes = false;

    const int nv = space.layout.total();
    const int np = space.n_poly();
    std::vector<int> gidx(nv + np);
    std::vector<double> sgn(nv + np, 1.0);
    for (int a = 0; a < nv; ++a) {
      gidx[a] = dofs.velocity_index[c][a];
      sgn[a] = dofs.velocity_sign[c][a];
    }
    for (int a = 0; a < np; ++a) gidx[nv + a] = dofs.pressure_index(c, a);

    Eigen::VectorXd rhs(nv + np);
    rhs << local.rhs_velocity, local.rhs_pressure;
    triplets.reserve(triplets.size() + static_cast<std::size_t>((nv + np) * (nv + np)));
    for (int a = 0; a < nv + np; ++a) {
      const int row = sys.reduced_index[gidx[a]];
      if (row < 0) continue;
      double r = sgn[a] * rhs(a);
      for (int b = 0; b < nv + np; ++b) {
        const double v = sgn[a] * sgn[b] * local.KE(a, b);
        if (v == 0.0) continue;
        const int col = sys.reduced_index[gidx[b]];
        if (col < 0)
          r -= v * fixed[gidx[b]];
        else
          triplets.emplace_back(row, col, v);
      }
      sys.rhs(row) += r;
    }
  }

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();

  if (!has_dirichlet && reaction_vanishes)
    sys.warnings.push_back("no Dirichlet boundary and zero reaction: pressure is determined only "
                           "up to a constant and the system is singular");
  return sys;
}

enum class SolverStatus { Ok, Inaccurate, Failed };

inline const char* to_string(SolverStatus s) {
  switch (s) {
  case SolverStatus::Ok: return "ok";
  case SolverStatus::Inaccurate: return "inaccurate";
  case SolverStatus::Failed: return "failed";
  }
  return "?";
}

/// Relative residual above which a solve is reported as inaccurate.
inline constexpr double residual_tolerance = 1e-10;

struct Solution {
  SolverStatus status = SolverStatus::Failed;
  std::string message;
  double residual = std::numeric_limits<double>::quiet_NaN();
  /// All velocity dofs, including eliminated Neumann values.
  Eigen::VectorXd velocity;
  /// Pressure coefficients, cell-major.
  Eigen::VectorXd pressure;

  bool usable() const noexcept { return status != SolverStatus::Failed; }

  /// Local velocity dofs of one cell, in element-outward convention.
  Eigen::VectorXd local_velocity(const DofMap& dofs, int cell) const {
    const auto& idx = dofs.velocity_index[cell];
    Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
      v(static_cast<Eigen::Index>(a)) = dofs.velocity_sign[cell][a] * velocity(idx[a]);
    return v;
  }

  Eigen::VectorXd local_pressure(const DofMap& dofs, int cell) const {
    return pressure.segment(static_cast<Eigen::Index>(cell) * dofs.pressure_dofs_per_cell,
                            dofs.pressure_dofs_per_cell);
  }
};

/// Sparse LU solve. Factorization failures and non-finite results are reported
/// through the status, never thrown.
inline Solution solve(const GlobalSystem& sys) {
  Solution sol;
  const auto& dofs = sys.dofs;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(sys.matrix);
  lu.factorize(sys.matrix);
  if (lu.info() != Eigen::Success) {
    sol.message = "factorization failed: " + lu.lastErrorMessage();
    return sol;
  }
  const Eigen::VectorXd x = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    sol.message = "solve produced non-finite values";
    return sol;
  }
  const double bnorm = sys.rhs.norm();
  const double rnorm = (sys.matrix * x - sys.rhs).norm();
  sol.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  sol.status = sol.residual <= residual_tolerance ? SolverStatus::Ok : SolverStatus::Inaccurate;

  Eigen::VectorXd full = Eigen::VectorXd::Zero(dofs.num_total());
  for (std::size_t i = 0; i < dofs.constrained.size(); ++i)
    full(dofs.constrained[i]) = dofs.constrained_values[i];
  for (int g = 0; g < dofs.num_total(); ++g)
    if (sys.reduced_index[g] >= 0) full(g) = x(sys.reduced_index[g]);
  sol.velocity = full.head(dofs.num_velocity());
  sol.pressure = full.tail(dofs.num_pressure());
  return sol;
}

} // namespace mvem
