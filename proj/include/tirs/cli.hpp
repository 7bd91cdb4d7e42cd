#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tirs::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kCheckFailed = 2 };

struct RunConfig {
  std::string command;  // validate | solve | verify | sweep | precommit | example
  std::string model_path;  // file path or built-in example name
  std::optional<std::string> eps;  // real or "limit"
  std::vector<double> grid;
  std::string output_dir = ".";
  bool trace_ops = false;
  double tie_tol = 1e-9;
  std::uint64_t cap = 1'000'000;
  std::optional<long> initial_state;
  std::string solution_path;  // verify
  std::string example_name;   // example
  int threads = 0;            // 0 = TIRS_THREADS / hardware
};

/// Parses argv-style arguments and executes the command. Reports go to
/// `output_dir`; a short summary goes to `out`; errors go to `err` as a
/// single line prefixed "ERROR:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Executes an already-parsed configuration.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace tirs::cli
