// Experiment driver: sweeps (approach, k, mesh), writes results.csv and rates.csv.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvem/mvem.hpp"

namespace {

constexpr int exit_config_error = 2;
constexpr int exit_io_error = 3;

std::vector<mvem::Approach> parse_approaches(const std::string& s) {
  if (s == "all") return {mvem::Approach::Monomial, mvem::Approach::Partial, mvem::Approach::Ortho};
  return {mvem::parse_approach(s)};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed virtual element solver: convergence and conditioning experiments"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  std::string test = "1";
  std::string approach = "all";
  int k_min = 0;
  int k_max = -1;
  std::vector<int> meshes;
  double aspect_ratio = 100.0;
  std::string out_dir = ".";
  std::string mesh_file;
  bool no_conditioning = false;

  app.add_option("--test", test, "Experiment: 1 (convergence), 2 (aspect ratio) or patch")
      ->check(CLI::IsMember({"1", "2", "patch"}))
      ->capture_default_str();
  app.add_option("--approach", approach, "Basis approach")
      ->check(CLI::IsMember({"monomial", "partial", "ortho", "all"}))
      ->capture_default_str();
  app.add_option("--k-min", k_min, "Lowest polynomial degree")->check(CLI::NonNegativeNumber)->capture_default_str();
  auto* k_max_opt = app.add_option("--k-max", k_max, "Highest polynomial degree (default 8, or 10 for test 2)")
                        ->check(CLI::NonNegativeNumber);
  app.add_option("--meshes", meshes, "Comma-separated cells per side (default 5,10,20; patch: 2,5)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--aspect-ratio", aspect_ratio, "Element aspect ratio for test 2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--mesh-file", mesh_file, "Plain-text polygonal mesh used instead of the built-in family");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--no-conditioning", no_conditioning, "Skip local condition numbers (faster)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config_error;
  }

  mvem::ExperimentConfig cfg;
  std::vector<mvem::NamedMesh> family;
  try {
    cfg.test = mvem::parse_test_case(test);
    cfg.approaches = parse_approaches(approach);
    cfg.k_min = k_min;
    if (k_max_opt->count() > 0) cfg.k_max = k_max;
    cfg.meshes = meshes;
    cfg.aspect_ratio = aspect_ratio;
    cfg.conditioning = !no_conditioning;
    cfg.validate();
    if (mesh_file.empty()) {
      family = mvem::experiment_meshes(cfg);
    } else {
      std::ifstream in(mesh_file);
      if (!in) {
        std::cerr << "error: cannot open mesh file " << mesh_file << '\n';
        return exit_io_error;
      }
      family.push_back({std::filesystem::path(mesh_file).stem().string(),
                        mvem::read_mesh(in, mvem::experiment_boundary(cfg.test))});
    }
  } catch (const mvem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config_error;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto results_path = std::filesystem::path(out_dir) / "results.csv";
  const auto rates_path = std::filesystem::path(out_dir) / "rates.csv";
  std::ofstream results(results_path);
  if (ec || !results) {
    std::cerr << "error: cannot write " << results_path << '\n';
    return exit_io_error;
  }
  results << mvem::csv_header << '\n';

  std::vector<mvem::ExperimentReport> reports;
  try {
    reports = mvem::run_experiment(cfg, family, [&](const mvem::ExperimentReport& r) {
      mvem::write_csv_row(results, r);
      results.flush();
      std::cerr << mvem::to_string(r.approach) << " k=" << r.k << " " << r.mesh << ": "
                << mvem::to_string(r.status) << "  p_err=" << mvem::format_number(r.p_err)
                << "  u_err=" << mvem::format_number(r.u_err) << "  (" << r.wall_time_s << " s)";
      if (!r.message.empty()) std::cerr << "  [" << r.message << "]";
      std::cerr << '\n';
    });
  } catch (const mvem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config_error;
  }
  if (!results) {
    std::cerr << "error: writing " << results_path << " failed\n";
    return exit_io_error;
  }

  std::ofstream rates(rates_path);
  if (!rates) {
    std::cerr << "error: cannot write " << rates_path << '\n';
    return exit_io_error;
  }
  rates << mvem::rates_csv_header << '\n';
  for (const auto& row : mvem::rate_rows(reports)) mvem::write_rate_row(rates, row);
  if (!rates) {
    std::cerr << "error: writing " << rates_path << " failed\n";
    return exit_io_error;
  }
  return 0;
}
