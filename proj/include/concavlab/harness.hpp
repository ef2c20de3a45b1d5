#pragma once

#include <optional>
#include <string>
#include <vector>

#include "concavlab/envelope.hpp"
#include "concavlab/verifier.hpp"

#include <nlohmann/json.hpp>

namespace concavlab {

struct DeficitConfig {
  int lambda_grid = 9;
  int top_k = 16;
  double rho = -1.0;  // negative: resolution rule (3h power / 5h log, floored
                      // at rho_frac * inradius)
  double rho_frac = 0.05;
};

struct AuditConfig {
  bool theorem1 = true;
  bool theorem2 = true;
  bool propositions = true;
  double slack = 0.05;
};

struct ExperimentConfig {
  ConvexDomain domain = ConvexDomain::disk(Point(0, 0), 1.0);
  int resolution = 65;
  CoefficientSet coeffs;
  NonlinearitySpec nonlinearity;
  SolverControls solver;
  DeficitConfig deficit;
  AuditConfig audits;
  double eps = 0.0;               // single-run binding
  std::vector<double> sweep_eps;  // sweep bindings, ascending
  std::string output = "out";
  long long seed = 0;
  int threads = 0;

  ProblemSpec problem(double eps_value) const;
  DeficitOptions deficit_options(double h) const;
};

/// Parses and validates the single-document JSON config.
/// Throws config-parse with line/column on malformed input.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// One full pipeline instance: solve, transform, deficit, envelope, audits.
struct RunResult {
  ScalarField u;
  SolveReport solve_report;
  ScalarField transform;  // u^{(1-beta)/2} or log u
  DeficitReport deficit;
  EnvelopeResult envelope;
  TheoremAudit audit1, audit2;
  PropositionRecord props;
  double floor = 0.0;  // 10 h^2 ||transform||_inf
};

RunResult run_instance(const ExperimentConfig& cfg, double eps_value);

struct SweepRow {
  double eps = 0.0;
  double eps_meas = 0.0;
  double deficit = 0.0;
  double envelope_distance = 0.0;
  double ratio = 0.0;
  std::string audit1 = "skipped";
  std::string audit2 = "skipped";
  int iterations = 0;
  bool censored = false;
  bool diverged = false;
  bool monotonicity_warning = false;
  std::string error;
  double wall_seconds = 0.0;  // timings sidecar only, never in CSV/JSON
  nlohmann::json detail;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double slope = 0.0, intercept = 0.0, fit_residual = 0.0;
  std::string fit_status = "ok";  // ok | all-censored | insufficient-rows
  int audit_failures = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // '#SWEEP v1' header, stable column schema
};

SweepReport run_sweep(const ExperimentConfig& cfg);

struct BaselineRow {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool greater_than = false;  // pass means value > bound instead of <=
  bool pass = false;
};

struct BaselineReport {
  std::vector<BaselineRow> rows;
  bool all_pass = true;
  nlohmann::json to_json() const;
};

/// The fixed closed-form oracle suite: torsion reproduction, sqrt-torsion
/// concavity, the square eigenfunction dichotomy, and the Kennington power.
BaselineReport run_baselines(int resolution = 129, int threads = 0);

/// Command implementations shared by the CLI; they write their artifact
/// files under out_dir and return the primary JSON document.
nlohmann::json cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_deficit(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_envelope(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_check(const ExperimentConfig& cfg, const std::string& out_dir,
                         const std::string& which);  // 1|2|props|remark
nlohmann::json cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

/// Maps an Error code to the documented process exit code:
/// 2 config, 3 solver, 4 audit inequality failure, 1 otherwise.
int exit_code_for(const std::string& error_code);

void write_text_file(const std::string& path, const std::string& content);

/// Two-column log-log scatter with the fitted line, as a standalone SVG.
std::string sweep_svg(const SweepReport& report);

}  // namespace concavlab
