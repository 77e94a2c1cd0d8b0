#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "homeig/homeig.hpp"

// Command-line driver. Exit status: 0 all requested eigenpairs converged, 2 completed with
// non-converged (or oracle-disagreeing) pairs, 1 error.
namespace homeig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

// Agreement thresholds used by `validate`.
inline constexpr double kValidateLambdaTol = 1e-8;
inline constexpr double kValidateVectorTol = 1e-6;

struct Options {
  RunConfig config;
  std::string grid;          // sweep: comma-separated theta values
  std::size_t points = 11;   // sweep: uniform grid on [0, theta] when no grid is given
  unsigned threads = 1;
};

inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidArgument("bad grid value '" + item + "'");
    grid.push_back(v);
  }
  return grid;
}

inline HomotopyProblem load_problem(const RunConfig& config) {
  DenseMatrix K = load_matrix_market(config.k_path);
  DenseMatrix L = load_matrix_market(config.l_path);
  if (K.size() != L.size()) throw DimensionMismatch("K and L dimensions differ");
  const Tolerances& tol = config.tolerances;

  if (config.basis_path.empty()) {
    if (!config.basis_values_path.empty())
      throw InvalidArgument("--basis-values requires --basis");
    if (!K.is_symmetric(tol.sym))
      throw NotSymmetric(K.asymmetry(), "K (supply --basis for a non-symmetric K)");
    return HomotopyProblem(K, L, oracle_basis(K, tol), tol);
  }

  const DenseMatrix columns = load_matrix_market(config.basis_path);
  if (columns.size() != K.size()) throw DimensionMismatch("basis dimension differs from K");
  auto vectors = to_columns(columns);
  if (config.basis_values_path.empty())
    return HomotopyProblem(K, L, EigenBasis::of(K, std::move(vectors), tol), tol);

  const MarketData values = read_market_data(read_text_file(config.basis_values_path));
  if (values.rows * values.cols != K.size())
    throw DimensionMismatch("--basis-values must hold n eigenvalues");
  return HomotopyProblem(K, L,
                         EigenBasis::with_values(K, std::move(vectors), values.values, tol), tol);
}

inline void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.output_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(config.output_path, std::ios::binary);
  if (!file) throw Error("cannot write '" + config.output_path + "'");
  file << text;
}

inline bool all_converged(const std::vector<EigenpairResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.converged; });
}

inline int run_solve(const Options& opt, std::ostream& out) {
  const auto problem = load_problem(opt.config);
  SolveOptions so;
  so.convergence_tol = opt.config.convergence_tol;
  so.series.threads = opt.threads;
  const auto results = solve_at(problem, opt.config.order, opt.config.theta, so);
  if (opt.config.with_oracle) {
    const auto comparisons =
        compare_with_oracle(results, problem.K(), problem.L(), opt.config.theta);
    emit(opt.config, report_json(results, opt.config, &comparisons).dump(2) + "\n", out);
  } else {
    emit(opt.config, report_json(results, opt.config).dump(2) + "\n", out);
  }
  return all_converged(results) ? kExitOk : kExitNotConverged;
}

inline int run_validate(const Options& opt, std::ostream& out) {
  const auto problem = load_problem(opt.config);
  SolveOptions so;
  so.convergence_tol = opt.config.convergence_tol;
  so.series.threads = opt.threads;
  const auto results = solve_at(problem, opt.config.order, opt.config.theta, so);
  const auto comparisons = compare_with_oracle(results, problem.K(), problem.L(), opt.config.theta);
  auto doc = report_json(results, opt.config, &comparisons);
  doc["meta"]["agreement"] = {{"lambda_abs", kValidateLambdaTol}, {"vector_l2", kValidateVectorTol}};
  bool ok = all_converged(results);
  for (std::size_t p = 0; p < results.size(); ++p) {
    const auto& c = comparisons[p];
    const bool agrees = !c.ambiguous && c.lambda_error <= kValidateLambdaTol &&
                        c.vector_error <= kValidateVectorTol;
    doc["results"][p]["oracle"]["agrees"] = agrees;
    ok = ok && agrees;
  }
  emit(opt.config, doc.dump(2) + "\n", out);
  return ok ? kExitOk : kExitNotConverged;
}

inline int run_coeffs(const Options& opt, std::ostream& out) {
  const auto problem = load_problem(opt.config);
  SeriesOptions so;
  so.threads = opt.threads;
  const auto coeffs = compute_coefficients(problem, opt.config.order, so);
  nlohmann::json doc;
  doc["schema"] = kReportSchema;
  doc["meta"] = meta_json(opt.config, problem.size());
  doc["coefficients"] = coefficients_json(coeffs);
  emit(opt.config, doc.dump(2) + "\n", out);
  return kExitOk;
}

inline int run_sweep(const Options& opt, std::ostream& out) {
  const auto problem = load_problem(opt.config);
  std::vector<double> grid;
  if (!opt.grid.empty()) {
    grid = parse_grid(opt.grid);
  } else {
    if (opt.points < 2) throw InvalidArgument("--points must be at least 2");
    for (std::size_t g = 0; g < opt.points; ++g)
      grid.push_back(opt.config.theta * static_cast<double>(g) / static_cast<double>(opt.points - 1));
  }
  const auto table = sweep(problem, grid, opt.config.order, opt.config.with_oracle);
  if (opt.config.format == "json") {
    nlohmann::json doc;
    doc["schema"] = kReportSchema;
    doc["meta"] = meta_json(opt.config, problem.size());
    auto rows = nlohmann::json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"theta", r.theta},
                      {"index", r.index + 1},
                      {"lambda_series", detail::number(r.lambda_series)},
                      {"lambda_oracle", r.lambda_oracle ? detail::number(*r.lambda_oracle) : nlohmann::json(nullptr)},
                      {"residual", detail::number(r.residual)}});
    doc["trajectory"] = std::move(rows);
    emit(opt.config, doc.dump(2) + "\n", out);
  } else {
    emit(opt.config, write_trajectory_csv(table), out);
  }
  return kExitOk;
}

inline int run_stage(const Options& opt, std::ostream& out) {
  const RunConfig& config = opt.config;
  const DenseMatrix K = load_matrix_market(config.k_path);
  const DenseMatrix L = load_matrix_market(config.l_path);
  if (!config.basis_path.empty())
    throw InvalidArgument("stage computes every stage basis itself; --basis is not accepted");

  StagePlan plan;
  if (config.stages == "auto") {
    plan = auto_stage(K, L, config.order, config.safety, config.convergence_tol, config.tolerances);
  } else {
    std::size_t used = 0;
    long count = 0;
    try {
      count = std::stol(config.stages, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != config.stages.size() || count < 1)
      throw InvalidArgument("--stages expects a positive count or 'auto'");
    plan = StagePlan::uniform(static_cast<std::size_t>(count), config.order, config.convergence_tol);
  }
  const auto staged = staged_solve(K, L, plan, config.tolerances);
  auto doc = report_json(staged.results, config);
  doc["meta"]["breakpoints"] = plan.breakpoints;
  doc["meta"]["stage_reports"] = stages_json(staged.stages);
  emit(config, doc.dump(2) + "\n", out);
  return all_converged(staged.results) ? kExitOk : kExitNotConverged;
}

/// Parses `args` (args[0] is the program name) and runs the selected subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Eigenpairs of L from the eigenbasis of a nearby K by homotopy power series", "homeig"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Options opt;
  RunConfig& cfg = opt.config;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--k", cfg.k_path, "Matrix Market file for K")->required();
    sub->add_option("--l", cfg.l_path, "Matrix Market file for L")->required();
    sub->add_option("--order", cfg.order, "Series truncation order R")
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
    sub->add_option("--tol-gap", cfg.tolerances.gap, "Relative base-eigenvalue gap tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-ortho", cfg.tolerances.ortho, "Basis orthonormality tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-eig", cfg.tolerances.eig, "Basis eigen-residual tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-conv", cfg.convergence_tol, "Tail-estimate convergence tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output", cfg.output_path, "Write output to this file instead of stdout");
    sub->add_option("--threads", opt.threads, "Worker threads for the coefficient recursion (0 = all)");
  };
  auto add_basis = [&](CLI::App* sub) {
    sub->add_option("--basis", cfg.basis_path,
                    "Matrix Market array file whose columns are K's orthonormal eigenvectors");
    sub->add_option("--basis-values", cfg.basis_values_path,
                    "Matrix Market array file with the matching eigenvalues");
  };
  auto add_theta = [&](CLI::App* sub) {
    sub->add_option("--theta", cfg.theta, "Homotopy parameter at which to evaluate")
        ->check([](const std::string& s) {
          try {
            return std::isfinite(std::stod(s)) ? std::string() : std::string("theta must be finite");
          } catch (const std::exception&) {
            return std::string("theta must be a number");
          }
        });
  };

  auto* solve = app.add_subcommand("solve", "Evaluate the series at theta (default 1)");
  add_common(solve);
  add_basis(solve);
  add_theta(solve);
  solve->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json"}));
  solve->add_flag("--oracle", cfg.with_oracle, "Attach oracle eigenvalues to each result (symmetric K, L only)");

  auto* coeffs = app.add_subcommand("coeffs", "Dump the a and b coefficient tensors");
  add_common(coeffs);
  add_basis(coeffs);

  auto* sweep_cmd = app.add_subcommand("sweep", "Trajectory of eigenvalues along a theta grid");
  add_common(sweep_cmd);
  add_basis(sweep_cmd);
  add_theta(sweep_cmd);
  sweep_cmd->add_option("--grid", opt.grid, "Comma-separated ascending theta values");
  sweep_cmd->add_option("--points", opt.points, "Uniform grid size on [0, theta] (default 11)");
  sweep_cmd->add_flag("--oracle", cfg.with_oracle, "Add oracle eigenvalues (symmetric K, L only)");
  sweep_cmd->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* validate = app.add_subcommand("validate", "Compare series eigenpairs with the Jacobi oracle");
  add_common(validate);
  add_basis(validate);
  add_theta(validate);
  validate->add_flag("--oracle", cfg.with_oracle, "Always on for validate");

  auto* stage = app.add_subcommand("stage", "Staged homotopy with re-basing between stages");
  add_common(stage);
  stage->add_option("--stages", cfg.stages, "Stage count or 'auto' (default 4)");
  stage->add_option("--safety", cfg.safety, "Fraction of the estimated radius per auto stage")
      ->check(CLI::Range(0.0, 1.0));
  stage->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json"}));

  // CLI11 consumes arguments back to front, without the program name.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) {
      cfg.command = "solve";
      return run_solve(opt, out);
    }
    if (*coeffs) {
      cfg.command = "coeffs";
      return run_coeffs(opt, out);
    }
    if (*sweep_cmd) {
      cfg.command = "sweep";
      if (cfg.format == "json" && sweep_cmd->count("--format") == 0) cfg.format = "csv";
      return run_sweep(opt, out);
    }
    if (*validate) {
      cfg.command = "validate";
      cfg.with_oracle = true;
      return run_validate(opt, out);
    }
    if (*stage) {
      cfg.command = "stage";
      return run_stage(opt, out);
    }
  } catch (const std::exception& e) {
    err << "homeig: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace homeig::cli
