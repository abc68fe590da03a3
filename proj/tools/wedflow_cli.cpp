// wedflow command-line front end: solve, sweep, accept.

#include <wedflow/acceptance.hpp>
#include <wedflow/config.hpp>
#include <wedflow/wedflow.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace wedflow;
namespace fs = std::filesystem;

constexpr int kExitAcceptanceFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitErrorBase = 10;  // + ErrorKind

int exit_code_for(ErrorKind k) { return kExitErrorBase + static_cast<int>(k); }

/// One JSON line on stderr, then the exit code.
int report_error(const std::string& kind, int code, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << j.dump() << std::endl;
  return code;
}

RunConfig load_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

std::string trajectory_csv(const Trajectory& traj) {
  const DiscreteSpace& s = *traj[0].space;
  std::string out = "t,x";
  for (std::size_t c = 0; c < s.components(); ++c) out += ",u" + std::to_string(c);
  out += '\n';
  for (int n = 0; n <= traj.steps(); ++n) {
    const std::string t = format_number(traj.grid.time(n));
    for (std::size_t j = 0; j < s.nodes(); ++j) {
      out += t + ',' + format_number(s.coordinates()[j]);
      for (std::size_t c = 0; c < s.components(); ++c)
        out += ',' + format_number(traj[n].values[static_cast<Eigen::Index>(c * s.nodes() + j)]);
      out += '\n';
    }
  }
  return out;
}

int cmd_solve(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const WedProblem pb = build_problem(cfg);
  const SweepOptions opts = sweep_options(cfg);
  const FixedPointReport rep = solve_regularized(pb, opts.fixed_point, opts.inner);
  const EnergyBalance eb = energy_balance(detail::unregularized(pb), rep.solution);
  int inner_iters = 0;
  for (const auto& r : rep.inner_reports) inner_iters += r.iterations;
  const double wall =
      cfg.record_timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
                        : 0.0;
  nlohmann::json diag{
      {"problem", cfg.problem},
      {"epsilon", cfg.epsilon},
      {"el_residual", rep.coupled_residual},
      {"final_xi_norm", final_xi_norm(pb, rep.solution)},
      {"energy_slack", eb.slack},
      {"energy_inequality_holds", eb.holds(pb.time.tau())},
      {"unregularized_residual", unregularized_residual(pb, rep.solution)},
      {"outer_iterations", rep.outer_iterations()},
      {"iterations", inner_iters},
      {"wall_ms", wall},
  };
  const fs::path dir(cfg.output_dir);
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(rep.solution));
  write_file_atomic(dir / "diagnostics.json", diag.dump(2) + "\n");
  std::cout << "solve: el_residual " << format_number(rep.coupled_residual) << ", outer iterations "
            << rep.outer_iterations() << ", output in " << dir.string() << std::endl;
  return 0;
}

std::string check_line(const std::string& what, bool ok) { return (ok ? "ok    " : "FAILED") + std::string("  ") + what + "\n"; }

int cmd_sweep(const RunConfig& cfg) {
  const WedProblem pb = build_problem(cfg);
  const SweepPlan plan = sweep_plan(cfg);
  const SweepOptions opts = sweep_options(cfg);
  SweepTable table;
  if (cfg.sweep_kind == "causal") table = causal_limit_sweep(pb, plan, opts);
  else table = lambda_sweep(pb, plan, opts, cfg.sweep_kind == "lambda-opposite");

  std::string summary = "sweep: " + cfg.sweep_kind + " on " + cfg.problem + ", " + std::to_string(table.rows.size()) +
                        " rows\n";
  int diverged = 0;
  bool slack_ok = true;
  for (const auto& r : table.rows) {
    diverged += r.diverged;
    if (!r.diverged) slack_ok &= r.energy_holds;
  }
  summary += "diverged rows: " + std::to_string(diverged) + "\n";
  if (cfg.sweep_kind == "causal" && !table.has_lambda) {
    summary += check_line("sup_error decreases with epsilon (5% slack)",
                          monotone_decreasing(table.column(&SweepRow::sup_error)));
    summary += check_line("residual decreases with epsilon (5% slack)",
                          monotone_decreasing(table.column(&SweepRow::residual)));
  }
  if (table.has_increment) {
    bool ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : table.rows) {
      if (!r.increment) {
        prev = std::numeric_limits<double>::infinity();
        continue;
      }
      ok &= *r.increment <= prev;
      prev = *r.increment;
    }
    summary += check_line("increments decrease within each nested sweep", ok);
  }
  summary += check_line("energy inequality slack >= -10 tau scale on converged rows", slack_ok);
  if (cfg.epsilon0_bisection) {
    const Epsilon0Result e0 = detect_epsilon0(pb, cfg.epsilon0_bracket[0], cfg.epsilon0_bracket[1], opts);
    summary += "epsilon0: " + format_number(e0.epsilon0) +
               (e0.instability_found ? " (bisected, " + std::to_string(e0.bisections) + " steps)\n"
                                     : " (no instability found in bracket)\n");
  }
  const fs::path dir(cfg.output_dir);
  write_file_atomic(dir / "sweep.csv", to_csv(table));
  write_file_atomic(dir / "summary.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_accept(const RunConfig& cfg, bool list, const std::vector<int>& only) {
  if (list) {
    for (const auto& c : acceptance::criteria()) std::cout << c.id << "  " << c.title << "\n";
    return 0;
  }
  std::vector<acceptance::Result> results;
  if (only.empty()) {
    results = acceptance::run_all(cfg, std::cout);
  } else {
    acceptance::Context ctx;
    ctx.cfg = cfg;
    for (const auto& c : acceptance::criteria()) {
      if (std::find(only.begin(), only.end(), c.id) == only.end()) continue;
      acceptance::Result r;
      r.id = c.id;
      r.title = c.title;
      try {
        c.run(ctx, r);
      } catch (const std::exception& e) {
        r.detail = std::string("threw ") + e.what();
      }
      std::cout << acceptance::format_line(r) << std::endl;
      results.push_back(r);
    }
    for (const auto& [name, text] : ctx.artifacts) write_file_atomic(fs::path(cfg.output_dir) / name, text);
  }
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : kExitAcceptanceFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wedflow: weighted energy-dissipation solver for doubly-nonlinear flows"};
  app.require_subcommand(1);
  std::string config_path;
  bool list = false;
  std::vector<int> only;

  auto* solve = app.add_subcommand("solve", "minimize the WED functional for one configuration");
  solve->add_option("--config", config_path, "JSON config file")->required();
  auto* sweep = app.add_subcommand("sweep", "run an epsilon or lambda sweep");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  accept->add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  accept->add_flag("--list", list, "print the criteria without running them");
  accept->add_option("--only", only, "run only these criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), kExitUsage);
  }

  try {
    if (*accept && list) return cmd_accept(RunConfig{}, true, only);
    const RunConfig cfg = load_or_default(config_path);
    if (*solve) return cmd_solve(cfg);
    if (*sweep) return cmd_sweep(cfg);
    return cmd_accept(cfg, false, only);
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.kind())), exit_code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("IoError", kExitIo, e.what());
  }
}
