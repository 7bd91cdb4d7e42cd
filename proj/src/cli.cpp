#include "tirs/cli.hpp"

#include "tirs/convergence.hpp"
#include "tirs/equilibrium.hpp"
#include "tirs/examples.hpp"
#include "tirs/io.hpp"
#include "tirs/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace tirs::cli {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

ModelSpec load_model(const std::string& ref) {
  if (ref.empty()) throw InputError("--model is required");
  if (std::filesystem::exists(ref)) return io::read_model_file(ref);
  const auto names = example_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return build_named_example(ref);
  throw InputError("model file '" + ref + "' not found and not a built-in example");
}

Regime parse_regime(const std::optional<std::string>& eps) {
  if (!eps || *eps == "limit") return Regime::limit();
  try {
    std::size_t pos = 0;
    const double value = std::stod(*eps, &pos);
    if (pos != eps->size()) throw InputError("--eps must be a positive real or 'limit'");
    return Regime::at(value);
  } catch (const std::invalid_argument&) {
    throw InputError("--eps must be a positive real or 'limit'");
  } catch (const std::out_of_range&) {
    throw InputError("--eps is out of range");
  }
}

int thread_count(const RunConfig& c) { return c.threads > 0 ? c.threads : default_threads(); }

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

int run_validate(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = load_model(c.model_path);
  std::vector<double> grid = c.grid;
  if (grid.empty()) {
    if (c.eps) {
      const Regime r = parse_regime(c.eps);
      if (r.is_limit()) throw InputError("validate needs a positive --eps or a grid");
      grid = {r.eps()};
    } else {
      grid = default_grid(model);
    }
  }
  const ValidationReport report = validate_assumptions(model, grid);
  io::write_file_atomic(join_path(c.output_dir, "validation.json"), io::validation_to_json(report).dump(2) + "\n");
  out << "validate: " << (report.passed() ? "pass" : "FAIL") << " (" << report.checks.size() << " checks, "
      << grid.size() << " eps values)\n";
  return report.passed() ? kOk : kCheckFailed;
}

int run_solve(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = load_model(c.model_path);
  const Regime regime = parse_regime(c.eps);
  SolveOptions options;
  options.tie_tol = c.tie_tol;
  options.threads = thread_count(c);
  std::ostringstream trace;
  if (c.trace_ops) {
    options.trace = [&](const OpTrace& ev) { trace << io::trace_to_json(model, ev).dump() << '\n'; };
  }
  const EquilibriumSolution sol = solve(model, regime, options);
  io::write_file_atomic(join_path(c.output_dir, "solution.json"), io::solution_to_json(model, sol).dump(2) + "\n");
  io::write_file_atomic(join_path(c.output_dir, "theta.csv"), io::theta_csv(model, sol));
  if (c.trace_ops) io::write_file_atomic(join_path(c.output_dir, "trace.jsonl"), trace.str());
  out << "solve: regime=" << regime.describe() << " T=" << model.horizon << " states=" << model.num_states()
      << " ties=" << sol.total_ties() << "\n";
  return kOk;
}

int run_verify(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = load_model(c.model_path);
  EquilibriumSolution sol;
  Regime regime;
  if (!c.solution_path.empty()) {
    io::Json doc;
    try {
      doc = io::Json::parse(io::read_file(c.solution_path));
    } catch (const io::Json::parse_error& e) {
      throw InputError("solution file is not valid JSON: " + std::string(e.what()));
    }
    sol = io::solution_from_json(model, doc);
    regime = sol.regime;
    if (c.eps && !(parse_regime(c.eps) == regime)) throw InputError("--eps disagrees with the solution's regime");
  } else {
    regime = parse_regime(c.eps);
    SolveOptions options;
    options.tie_tol = c.tie_tol;
    options.threads = thread_count(c);
    sol = solve(model, regime, options);
  }
  const DeviationReport report = verify_step_optimality(model, regime, sol, c.tie_tol);
  io::write_file_atomic(join_path(c.output_dir, "deviations.json"), io::deviation_to_json(model, report).dump(2) + "\n");
  io::write_file_atomic(join_path(c.output_dir, "deviations.csv"), io::deviation_csv(model, report));
  out << "verify: " << (report.passed() ? "pass" : "FAIL") << " violations=" << report.violations.size()
      << " worst=" << io::format_real(report.worst_violation) << " theta_mismatch=" << io::format_real(report.theta_mismatch)
      << "\n";
  return report.passed() ? kOk : kCheckFailed;
}

int run_sweep(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = load_model(c.model_path);
  const std::vector<double> grid = c.grid.empty() ? default_grid(model) : c.grid;
  SweepOptions options;
  options.tie_tol = c.tie_tol;
  options.threads = thread_count(c);
  const SweepResult result = sweep(model, grid, options);
  io::write_file_atomic(join_path(c.output_dir, "sweep.json"), io::sweep_to_json(result).dump(2) + "\n");
  io::write_file_atomic(join_path(c.output_dir, "sweep.csv"), io::sweep_csv(result));
  io::write_file_atomic(join_path(c.output_dir, "sweep_plot.csv"), io::sweep_plot_csv(result));
  out << "sweep: " << (result.passed() ? "pass" : "FAIL") << " points=" << result.points.size()
      << " final_w=" << io::format_real(result.final_distance.maxCoeff())
      << " tolerance=" << io::format_real(result.tolerance)
      << " policy_agreement=" << io::format_real(result.points.back().policy_agreement) << "\n";
  return result.passed() ? kOk : kCheckFailed;
}

int run_precommit(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = load_model(c.model_path);
  const Regime regime = parse_regime(c.eps);
  const Index x0 = c.initial_state ? model.states.index_of(*c.initial_state) : 0;
  SolveOptions options;
  options.tie_tol = c.tie_tol;
  options.threads = thread_count(c);
  const GapReport report = precommitment_gap(model, regime, x0, c.cap, options);
  io::write_file_atomic(join_path(c.output_dir, "gap.json"), io::gap_to_json(model, report).dump(2) + "\n");
  io::write_file_atomic(join_path(c.output_dir, "gap.csv"), io::gap_csv(model, report));
  out << "precommit: policies=" << report.policies_enumerated << " value_gap=" << io::format_real(report.value_gap)
      << " differing_cells=" << report.differing_cells.size()
      << (report.time_inconsistent() ? " (time-inconsistent)" : "") << "\n";
  return kOk;
}

int run_example(const RunConfig& c, std::ostream& out) {
  const auto names = example_names();
  if (std::find(names.begin(), names.end(), c.example_name) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw InputError("unknown example '" + c.example_name + "' (known: " + known + ")");
  }
  const ModelSpec model = build_named_example(c.example_name);
  const std::string path = join_path(c.output_dir, c.example_name + ".json");
  io::write_file_atomic(path, io::model_to_json(model).dump(2) + "\n");
  out << "example: wrote " << path << "\n";
  return kOk;
}

}  // namespace

int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.eps && !c.grid.empty() && c.command != "sweep") throw InputError("--eps and --grid are mutually exclusive");
    if (c.command == "validate") return run_validate(c, out);
    if (c.command == "solve") return run_solve(c, out);
    if (c.command == "verify") return run_verify(c, out);
    if (c.command == "sweep") return run_sweep(c, out);
    if (c.command == "precommit") return run_precommit(c, out);
    if (c.command == "example") return run_example(c, out);
    throw InputError("unknown command '" + c.command + "'");
  } catch (const std::exception& e) {
    err << "ERROR: " << one_line(e.what()) << "\n";
    return kInputError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-inconsistent risk-sensitive MDP solver", "tirs"};
  app.require_subcommand(1);
  RunConfig c;
  std::vector<double> geometric;

  auto add_common = [&](CLI::App* sub, bool with_model) {
    if (with_model) sub->add_option("--model", c.model_path, "model JSON file or built-in example name")->required();
    sub->add_option("--output-dir", c.output_dir, "directory for emitted files");
    sub->add_option("--tie-tol", c.tie_tol, "argmin tie tolerance");
    sub->add_option("--threads", c.threads, "worker threads (0 = TIRS_THREADS or hardware)");
  };
  auto add_eps = [&](CLI::App* sub) { sub->add_option("--eps", c.eps, "positive epsilon or 'limit'"); };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", c.grid, "explicit decreasing eps list")->delimiter(',');
    sub->add_option("--grid-geometric", geometric, "EPS_MAX N: eps_max * 2^-k, k < N")->expected(2);
  };

  auto* validate = app.add_subcommand("validate", "check model assumptions on an eps grid");
  add_common(validate, true);
  add_eps(validate);
  add_grid(validate);

  auto* solve_cmd = app.add_subcommand("solve", "compute the equilibrium and its Theta table");
  add_common(solve_cmd, true);
  add_eps(solve_cmd);
  solve_cmd->add_flag("--trace-ops", c.trace_ops, "dump every Hamiltonian evaluation as JSON lines");

  auto* verify = app.add_subcommand("verify", "check step-optimality of a solution");
  add_common(verify, true);
  add_eps(verify);
  verify->add_option("--solution", c.solution_path, "solution JSON from 'solve' (default: solve afresh)");

  auto* sweep_cmd = app.add_subcommand("sweep", "eps -> 0 convergence study");
  add_common(sweep_cmd, true);
  add_grid(sweep_cmd);

  auto* precommit = app.add_subcommand("precommit", "compare the equilibrium with the precommitted optimum");
  add_common(precommit, true);
  add_eps(precommit);
  precommit->add_option("--cap", c.cap, "maximum number of enumerated policies");
  precommit->add_option("--initial-state", c.initial_state, "state label x0 (default: first state)");

  auto* example = app.add_subcommand("example", "write a built-in example model as JSON");
  example->add_option("name", c.example_name, "example name")->required();
  example->add_option("--output-dir", c.output_dir, "directory for the model file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR: " << one_line(e.what()) << "\n";
    return kInputError;
  }

  c.command = app.get_subcommands().front()->get_name();
  if (!geometric.empty()) {
    if (!c.grid.empty()) {
      err << "ERROR: --grid and --grid-geometric are mutually exclusive\n";
      return kInputError;
    }
    const double points = geometric[1];
    if (points < 1 || points != static_cast<int>(points)) {
      err << "ERROR: --grid-geometric needs a positive integer point count\n";
      return kInputError;
    }
    try {
      c.grid = geometric_grid(geometric[0], static_cast<int>(points));
    } catch (const std::exception& e) {
      err << "ERROR: " << one_line(e.what()) << "\n";
      return kInputError;
    }
  }
  return execute(c, out, err);
}

}  // namespace tirs::cli
