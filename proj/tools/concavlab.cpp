#include <CLI11.hpp>
#include <iostream>

#include "concavlab/harness.hpp"

using namespace concavlab;

int main(int argc, char** argv) {
  CLI::App app{"concavlab: anisotropic semilinear Dirichlet problems and concavity deficits"};
  app.require_subcommand(1);

  std::string config_path, out_dir, theorem = "";
  int threads = 0;
  long long seed = -1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON experiment config");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker threads (CONCAVLAB_THREADS overrides)");
    sub->add_option("--seed", seed, "seed recorded in reports (overrides config)");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve the configured problem");
  CLI::App* deficit_cmd = app.add_subcommand("deficit", "solve, transform and locate the deficit");
  CLI::App* envelope_cmd = app.add_subcommand("envelope", "least concave majorant of the transform");
  CLI::App* check_cmd = app.add_subcommand("check", "audit the theorem inequalities");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "eps sweep with slope fit");
  CLI::App* baselines_cmd = app.add_subcommand("baselines", "closed-form oracle suite");
  for (CLI::App* sub : {solve_cmd, deficit_cmd, envelope_cmd, check_cmd, sweep_cmd})
    add_common(sub, true);
  add_common(baselines_cmd, false);
  check_cmd->add_option("--theorem", theorem, "1|2|props|remark (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (baselines_cmd->parsed()) {
      BaselineReport rep = run_baselines(129, threads);
      for (const BaselineRow& r : rep.rows)
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " value " << r.value
                  << (r.greater_than ? " > " : " <= ") << r.bound << "\n";
      if (!out_dir.empty()) {
        write_text_file(out_dir + "/baselines.json", rep.to_json().dump(2) + "\n");
      }
      return 0;
    }

    ExperimentConfig cfg = load_config(config_path);
    if (threads > 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = seed;
    std::string dir = out_dir.empty() ? cfg.output : out_dir;

    nlohmann::json result;
    if (solve_cmd->parsed())
      result = cmd_solve(cfg, dir);
    else if (deficit_cmd->parsed())
      result = cmd_deficit(cfg, dir);
    else if (envelope_cmd->parsed())
      result = cmd_envelope(cfg, dir);
    else if (check_cmd->parsed())
      result = cmd_check(cfg, dir, theorem);
    else if (sweep_cmd->parsed())
      result = cmd_sweep(cfg, dir);
    std::cout << result.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
