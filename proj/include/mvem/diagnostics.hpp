#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvem/global_solver.hpp"
#include "mvem/local_assembly.hpp"
#include "mvem/mesh.hpp"
#include "mvem/problems.hpp"

namespace mvem {

/// sigma_max / sigma_min from a full SVD; +inf when sigma_min is zero.
inline double condition_number(const Eigen::MatrixXd& M) {
  if (M.size() == 0) throw InvalidArgument("condition number of an empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

/// Running maxima of local condition numbers.
struct ConditionStats {
  double G = 0.0;
  double W = 0.0;
  double B = 0.0;
  double Pi = 0.0;
  double D = 0.0;

  void update(const ElementSpace& s, const ProjectionMatrices& p) {
    G = std::max(G, condition_number(s.vec.G));
    W = std::max(W, condition_number(p.W));
    B = std::max(B, condition_number(p.B));
    Pi = std::max(Pi, condition_number(p.Pi));
    D = std::max(D, condition_number(p.D));
  }
};

/// Least-squares fit of `p` at the interior rule points in the degree-k pressure basis.
/// Sets `rank_deficient` when the Vandermonde is numerically rank deficient.
inline Eigen::VectorXd interpolant_coefficients(const ElementSpace& s, const ScalarField& p,
                                                bool* rank_deficient = nullptr) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(s.interior.size()));
  for (std::size_t q = 0; q < s.interior.size(); ++q) y(static_cast<Eigen::Index>(q)) = p(s.interior.points[q]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.pV);
  if (rank_deficient) *rank_deficient = qr.rank() < s.pV.cols();
  return qr.solve(y);
}

/// Squared L2 error contributions of one element.
struct ElementErrors {
  double p = 0.0;
  double u = 0.0;
  double pI = 0.0;
  bool rank_deficient_fit = false;
};

inline ElementErrors element_errors(const ElementSpace& s, const Eigen::MatrixXd& Pi,
                                    const Eigen::VectorXd& u_dofs, const Eigen::VectorXd& p_coeffs,
                                    const ProblemData& problem) {
  ElementErrors e;
  const Eigen::Index N = s.interior.size();
  const Eigen::VectorXd ph = s.pV * p_coeffs;
  const Eigen::VectorXd pi_u = s.gV * (Pi * u_dofs);
  const Eigen::VectorXd pI = s.pV * interpolant_coefficients(s, problem.exact_pressure, &e.rank_deficient_fit);
  for (Eigen::Index q = 0; q < N; ++q) {
    const Point& x = s.interior.points[q];
    const double w = s.interior.weights[q];
    const Point u = problem.exact_velocity(x);
    e.p += w * std::pow(problem.exact_pressure(x) - ph(q), 2);
    e.u += w * (std::pow(u.x() - pi_u(q), 2) + std::pow(u.y() - pi_u(N + q), 2));
    e.pI += w * std::pow(pI(q) - ph(q), 2);
  }
  return e;
}

/// p_err = ||p - p_h||, u_err = ||u - Pi u_h||, pI_err = ||p_I - p_h||.
struct SolutionErrors {
  double p_err = std::numeric_limits<double>::quiet_NaN();
  double u_err = std::numeric_limits<double>::quiet_NaN();
  double pI_err = std::numeric_limits<double>::quiet_NaN();
  /// Elements whose least-squares interpolant fit was rank deficient.
  int rank_deficient_fits = 0;
  /// Norms of the exact solution under the same quadrature.
  double p_norm = 0.0;
  double u_norm = 0.0;
};

inline SolutionErrors solution_errors(const PolygonalMesh& mesh, const ProblemData& problem,
                                      Approach approach, const DofMap& dofs, const Solution& sol) {
  if (!problem.has_exact_solution()) throw InvalidArgument("problem has no exact solution");
  if (!sol.usable()) throw InvalidState("cannot measure errors of a failed solve");
  SolutionErrors out;
  double p2 = 0.0, u2 = 0.0, pI2 = 0.0, pn = 0.0, un = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto s = make_element_space(mesh, c, approach, dofs.k);
    const auto proj = assemble_projection(s);
    const auto e = element_errors(s, proj.Pi, sol.local_velocity(dofs, c), sol.local_pressure(dofs, c), problem);
    p2 += e.p;
    u2 += e.u;
    pI2 += e.pI;
    if (e.rank_deficient_fit) ++out.rank_deficient_fits;
    for (std::size_t q = 0; q < s.interior.size(); ++q) {
      const Point& x = s.interior.points[q];
      pn += s.interior.weights[q] * std::pow(problem.exact_pressure(x), 2);
      un += s.interior.weights[q] * problem.exact_velocity(x).squaredNorm();
    }
  }
  out.p_err = std::sqrt(p2);
  out.u_err = std::sqrt(u2);
  out.pI_err = std::sqrt(pI2);
  out.p_norm = std::sqrt(pn);
  out.u_norm = std::sqrt(un);
  return out;
}

inline double pressure_error(const PolygonalMesh& mesh, const ProblemData& problem, Approach approach,
                             const DofMap& dofs, const Solution& sol) {
  return solution_errors(mesh, problem, approach, dofs, sol).p_err;
}

inline double velocity_error(const PolygonalMesh& mesh, const ProblemData& problem, Approach approach,
                             const DofMap& dofs, const Solution& sol) {
  return solution_errors(mesh, problem, approach, dofs, sol).u_err;
}

inline double interpolant_error(const PolygonalMesh& mesh, const ProblemData& problem, Approach approach,
                                const DofMap& dofs, const Solution& sol) {
  return solution_errors(mesh, problem, approach, dofs, sol).pI_err;
}

/// Least-squares slope of log(error) against log(h). Points with a nonpositive
/// or non-finite error are skipped; NaN when fewer than two remain.
inline double convergence_rate(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw InvalidArgument("errors and mesh sizes differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]) || !(hs[i] > 0.0)) continue;
    lx.push_back(std::log(hs[i]));
    ly.push_back(std::log(errors[i]));
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

/// Rates between consecutive refinements.
inline std::vector<double> pairwise_rates(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw InvalidArgument("errors and mesh sizes differ in length");
  std::vector<double> rates;
  for (std::size_t i = 1; i < errors.size(); ++i)
    rates.push_back(convergence_rate({errors[i - 1], errors[i]}, {hs[i - 1], hs[i]}));
  return rates;
}

struct ExperimentReport {
  Approach approach = Approach::Monomial;
  int k = 0;
  std::string mesh;
  double h = 0.0;
  int n_dofs = 0;
  double p_err = std::numeric_limits<double>::quiet_NaN();
  double u_err = std::numeric_limits<double>::quiet_NaN();
  double pI_err = std::numeric_limits<double>::quiet_NaN();
  ConditionStats cond;
  SolverStatus status = SolverStatus::Failed;
  std::string message;
  double wall_time_s = 0.0;
};

inline constexpr const char* csv_header =
    "approach,k,mesh,h,n_dofs,p_err,u_err,pI_err,cond_G,cond_W,cond_B,cond_Pi,cond_D,solver_status,wall_time_s";

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline void write_csv_row(std::ostream& os, const ExperimentReport& r) {
  os << to_string(r.approach) << ',' << r.k << ',' << r.mesh << ',' << format_number(r.h) << ','
     << r.n_dofs << ',' << format_number(r.p_err) << ',' << format_number(r.u_err) << ','
     << format_number(r.pI_err) << ',' << format_number(r.cond.G) << ',' << format_number(r.cond.W)
     << ',' << format_number(r.cond.B) << ',' << format_number(r.cond.Pi) << ','
     << format_number(r.cond.D) << ',' << to_string(r.status) << ',' << format_number(r.wall_time_s)
     << '\n';
}

} // namespace mvem
