#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mvem/diagnostics.hpp"
#include "mvem/global_solver.hpp"
#include "mvem/mesh.hpp"
#include "mvem/problems.hpp"

namespace mvem {

enum class TestCase { Test1, Test2, Patch };

inline TestCase parse_test_case(const std::string& s) {
  if (s == "1") return TestCase::Test1;
  if (s == "2") return TestCase::Test2;
  if (s == "patch") return TestCase::Patch;
  throw InvalidArgument("unknown test '" + s + "' (expected 1, 2 or patch)");
}

struct ExperimentConfig {
  TestCase test = TestCase::Test1;
  std::vector<Approach> approaches{Approach::Monomial, Approach::Partial, Approach::Ortho};
  int k_min = 0;
  /// Defaults to 8 for Test1 and patch, 10 for Test2.
  std::optional<int> k_max;
  /// Cells per side of the square meshes (Test1 and patch).
  std::vector<int> meshes;
  /// Test2: columns stay 10 wide, rows are 10 * aspect_ratio.
  double aspect_ratio = 100.0;
  /// Optional external mesh replacing the built-in family.
  std::string mesh_file;
  /// Local condition numbers (one SVD per matrix per element).
  bool conditioning = true;

  int resolved_k_max() const { return k_max.value_or(test == TestCase::Test2 ? 10 : 8); }

  std::vector<int> resolved_meshes() const {
    if (!meshes.empty()) return meshes;
    if (test == TestCase::Patch) return {2, 5};
    return {5, 10, 20};
  }

  void validate() const {
    if (approaches.empty()) throw InvalidArgument("no approach selected");
    if (k_min < 0) throw InvalidArgument("k-min must be non-negative");
    if (resolved_k_max() < k_min) throw InvalidArgument("k-max is smaller than k-min");
    for (int nx : meshes)
      if (nx < 1) throw InvalidArgument("mesh sizes must be positive");
    if (!(aspect_ratio > 0.0)) throw InvalidArgument("aspect ratio must be positive");
  }
};

struct NamedMesh {
  std::string name;
  PolygonalMesh mesh;
};

/// Runs assembly, solve and diagnostics for one (mesh, approach, k).
/// Linear-algebra breakdowns end up in the report status, not as exceptions.
inline ExperimentReport run_case(const NamedMesh& m, const ProblemData& problem, Approach approach, int k,
                                 bool conditioning = true) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.approach = approach;
  r.k = k;
  r.mesh = m.name;
  r.h = mesh_size(m.mesh);
  try {
    ElementObserver observer;
    if (conditioning)
      observer = [&r](const ElementSpace& s, const LocalMatrices& l) { r.cond.update(s, l.projection); };
    const auto sys = assemble_global(m.mesh, problem, approach, k, observer);
    r.n_dofs = static_cast<int>(sys.rhs.size());
    const auto sol = solve(sys);
    r.status = sol.status;
    r.message = sol.message;
    if (sol.usable() && problem.has_exact_solution()) {
      const auto e = solution_errors(m.mesh, problem, approach, sys.dofs, sol);
      r.p_err = e.p_err;
      r.u_err = e.u_err;
      r.pI_err = e.pI_err;
    }
  } catch (const ConditioningError& e) {
    r.status = SolverStatus::Failed;
    r.message = e.what();
  } catch (const RankDeficiency& e) {
    r.status = SolverStatus::Failed;
    r.message = e.what();
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct RateRow {
  Approach approach = Approach::Monomial;
  int k = 0;
  std::string quantity;
  double fit = 0.0;
  std::vector<double> pairs;
};

inline constexpr const char* rates_csv_header = "approach,k,quantity,fit_rate,pair_rates";

inline void write_rate_row(std::ostream& os, const RateRow& r) {
  os << to_string(r.approach) << ',' << r.k << ',' << r.quantity << ',' << format_number(r.fit) << ',';
  for (std::size_t i = 0; i < r.pairs.size(); ++i) os << (i ? ";" : "") << format_number(r.pairs[i]);
  os << '\n';
}

/// Rates per (approach, k) over the meshes of `reports`, in mesh order.
inline std::vector<RateRow> rate_rows(const std::vector<ExperimentReport>& reports) {
  std::map<std::pair<int, int>, std::vector<const ExperimentReport*>> groups;
  for (const auto& r : reports) groups[{static_cast<int>(r.approach), r.k}].push_back(&r);
  std::vector<RateRow> rows;
  for (const auto& [key, list] : groups) {
    if (list.size() < 2) continue;
    std::vector<double> hs, p, u, pI;
    for (const auto* r : list) {
      hs.push_back(r->h);
      p.push_back(r->p_err);
      u.push_back(r->u_err);
      pI.push_back(r->pI_err);
    }
    const auto approach = static_cast<Approach>(key.first);
    for (auto [name, errs] : {std::pair{"p_err", &p}, std::pair{"u_err", &u}, std::pair{"pI_err", &pI}})
      rows.push_back({approach, key.second, name, convergence_rate(*errs, hs), pairwise_rates(*errs, hs)});
  }
  return rows;
}

inline ProblemData experiment_problem(TestCase test, int k) {
  return test == TestCase::Patch ? patch_problem(k) : test1_problem();
}

inline BoundaryPredicate experiment_boundary(TestCase test) {
  return test == TestCase::Patch ? all_dirichlet() : x_axis_neumann();
}

/// Meshes of the configured family (mesh_file handled by the caller).
inline std::vector<NamedMesh> experiment_meshes(const ExperimentConfig& cfg) {
  std::vector<NamedMesh> out;
  const auto boundary = experiment_boundary(cfg.test);
  if (cfg.test == TestCase::Test2) {
    const int ny = static_cast<int>(std::lround(10.0 * cfg.aspect_ratio));
    if (ny < 1) throw InvalidArgument("aspect ratio too small for a 10-column mesh");
    out.push_back({"10x" + std::to_string(ny), build_rectangle_grid(10, ny, 1.0, 1.0, boundary)});
    return out;
  }
  for (int nx : cfg.resolved_meshes())
    out.push_back({std::to_string(nx) + "x" + std::to_string(nx), build_rectangle_grid(nx, nx, 1.0, 1.0, boundary)});
  return out;
}

using ReportSink = std::function<void(const ExperimentReport&)>;

/// Approach-major, then k, then mesh.
inline std::vector<ExperimentReport> run_experiment(const ExperimentConfig& cfg, const std::vector<NamedMesh>& meshes,
                                                    const ReportSink& sink = {}) {
  cfg.validate();
  std::vector<ExperimentReport> reports;
  for (Approach a : cfg.approaches) {
    for (int k = cfg.k_min; k <= cfg.resolved_k_max(); ++k) {
      const auto problem = experiment_problem(cfg.test, k);
      for (const auto& m : meshes) {
        reports.push_back(run_case(m, problem, a, k, cfg.conditioning));
        if (sink) sink(reports.back());
      }
    }
  }
  return reports;
}

} // namespace mvem
