#pragma once

// Finite-horizon MDP data model: truncated state space, per-state action
// grids, an epsilon-indexed transition kernel family with its rate
// function, anchor-dependent running costs and terminal costs.

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tirs {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Malformed input: bad labels, inconsistent sizes, missing tables.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The kernel cannot be assembled at the requested epsilon (negative mass,
/// missing tabulated row). Usually means epsilon is above the model's
/// validity threshold.
class KernelError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct Action {
  std::string label;
  Vector payload;  // optional, may be empty
};

struct StateSpace {
  std::vector<long> labels;
  Vector lyapunov;

  Index size() const { return static_cast<Index>(labels.size()); }
  /// Position of `label` in declaration order; throws ModelError if absent.
  Index index_of(long label) const;
};

/// One summand a * exp(-r / eps) of a rate-parameterized kernel entry.
/// `rate` may be kInf, in which case the term vanishes for every eps.
struct RateTerm {
  Index z = 0;
  double weight = 0.0;
  double rate = 0.0;
};

/// A stored stochastic row. `eps == nullopt` matches every epsilon.
struct TabulatedRow {
  std::optional<double> eps;
  Vector q;
};

enum class KernelMode { RateParameterized, Tabulated };

/// Transition data for one (t, x, u).
struct KernelEntry {
  // rate-parameterized mode
  std::vector<RateTerm> terms;
  Index remainder = -1;  // absorbs 1 - sum(terms); -1 when absent
  // tabulated mode
  std::vector<TabulatedRow> rows;
  // limit rate function I_t(.; x, u) over the truncation; kInf = unreachable.
  // Empty when the model provides no limit information.
  Vector rate;
};

struct Tolerances {
  double sweep_final = 0.05;
  double limit_consistency = 0.05;
};

/// Immutable after construction. Build through `finalize_model` (or the
/// JSON reader / example builders, which call it).
struct ModelSpec {
  std::string name;
  int horizon = 0;
  StateSpace states;
  std::vector<std::vector<Action>> actions;
  KernelMode mode = KernelMode::RateParameterized;
  std::vector<KernelEntry> kernel;  // [(t-1) * num_action_slots + slot(x,u)]
  // running[(tau-1) * T + (t-1)](slot(x,u)) = f_{tau,t}(x,u)
  std::vector<Vector> running;
  // terminal[tau-1](x) = g_tau(x)
  std::vector<Vector> terminal;
  Tolerances tolerances;
  std::string truncation = "closed";
  std::vector<std::string> notes;

  // derived by finalize_model
  std::vector<Index> action_offset;

  Index num_states() const { return states.size(); }
  Index num_actions(Index x) const {
    return static_cast<Index>(actions[static_cast<std::size_t>(x)].size());
  }
  Index num_action_slots() const { return action_offset.empty() ? 0 : action_offset.back(); }
  Index slot(Index x, Index u) const { return action_offset[static_cast<std::size_t>(x)] + u; }

  const KernelEntry& entry(int t, Index x, Index u) const;
  KernelEntry& entry(int t, Index x, Index u);

  double running_cost(int tau, int t, Index x, Index u) const;
  const Vector& terminal_cost(int tau) const;

  /// Index of the action labelled `label` at state x; throws ModelError.
  Index action_index(Index x, const std::string& label) const;
};

/// Allocates an empty model with the given shape: kernel entries, zero
/// costs, offsets. Callers then fill kernel/costs and call finalize_model.
ModelSpec make_model_shell(int horizon, StateSpace states, std::vector<std::vector<Action>> actions,
                           KernelMode mode);

/// Structural checks that make later indexing safe, then derives missing
/// rate functions. Throws ModelError on malformed input.
void finalize_model(ModelSpec& model);

/// Probability row q^eps_t(.; x, u) over the truncation.
Vector kernel_at(const ModelSpec& model, double eps, int t, Index x, Index u);

/// log q^eps_t(.; x, u), -inf for unreachable states. Rate-parameterized
/// entries are assembled in the log domain, so transitions whose mass
/// underflows a double (a exp(-r/eps) with r/eps > ~745) keep their exact
/// log-probability log a - r/eps.
Vector log_kernel_at(const ModelSpec& model, double eps, int t, Index x, Index u);

/// Rate function row I_t(.; x, u); throws ModelError when unavailable.
const Vector& rate_at(const ModelSpec& model, int t, Index x, Index u);

enum class CheckStatus { Pass, Fail, Vacuous };

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string note;
  std::vector<std::string> failures;
};

struct ValidationReport {
  std::vector<double> eps_grid;
  std::string truncation;
  std::vector<Check> checks;

  bool passed() const;
};

/// Checks the standing assumptions in their finite-truncation form.
/// Defects are reported, not thrown; an empty state space throws.
ValidationReport validate_assumptions(const ModelSpec& model, const std::vector<double>& eps_grid);

const char* to_string(CheckStatus status);

}  // namespace tirs
