#pragma once

// Backward construction of time-inconsistent equilibria. For each step t
// (from T down to 1) the diagonal anchor tau = t picks the action, and every
// anchor row Theta_{tau, .} is then propagated under that action.

#include "tirs/model.hpp"
#include "tirs/operators.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tirs {

/// Deterministic Markov policy: action index per (t, x), t in 1..T.
struct Policy {
  Eigen::MatrixXi choice;  // rows t-1, columns x

  Policy() = default;
  Policy(int horizon, Index num_states) : choice(Eigen::MatrixXi::Zero(horizon, num_states)) {}

  int horizon() const { return static_cast<int>(choice.rows()); }
  Index operator()(int t, Index x) const { return choice(t - 1, x); }
  int& operator()(int t, Index x) { return choice(t - 1, x); }

  friend bool operator==(const Policy& a, const Policy& b) {
    return a.choice.rows() == b.choice.rows() && a.choice.cols() == b.choice.cols() && a.choice == b.choice;
  }
};

/// Throws ModelError if some choice is not an action of its state.
void check_policy(const ModelSpec& model, const Policy& policy);

/// Theta_{tau, t}(x) for tau in 1..T and t in 1..T+1.
class ThetaTable {
 public:
  ThetaTable() = default;
  ThetaTable(int horizon, Index num_states)
      : horizon_(horizon), rows_(static_cast<std::size_t>(horizon * (horizon + 1)), Vector::Zero(num_states)) {}

  int horizon() const { return horizon_; }
  Vector& at(int tau, int t) { return rows_[index(tau, t)]; }
  const Vector& at(int tau, int t) const { return rows_[index(tau, t)]; }

 private:
  std::size_t index(int tau, int t) const { return static_cast<std::size_t>((tau - 1) * (horizon_ + 1) + (t - 1)); }

  int horizon_ = 0;
  std::vector<Vector> rows_;
};

struct SolveDiagnostics {
  std::vector<double> step_seconds;  // index t-1
  std::vector<int> tie_counts;       // non-singleton argmin sets per step
};

struct EquilibriumSolution {
  Regime regime;
  Policy policy;
  ThetaTable theta;
  std::vector<ArgminSet> ties;  // [(t-1) * |X| + x]
  SolveDiagnostics diagnostics;

  const ArgminSet& tie(int t, Index x) const {
    return ties[static_cast<std::size_t>((t - 1) * policy.choice.cols() + x)];
  }
  int total_ties() const;
};

struct SolveOptions {
  double tie_tol = kTieTolerance;
  int threads = 1;
  TraceSink trace;  // called in deterministic (t desc, x, u, tau) order
};

EquilibriumSolution solve(const ModelSpec& model, Regime regime, const SolveOptions& options = {});
EquilibriumSolution solve_eps(const ModelSpec& model, double eps, const SolveOptions& options = {});
EquilibriumSolution solve_limit(const ModelSpec& model, const SolveOptions& options = {});

/// J_{tau, s}(.; pi) for s = 1..T+1 by exact backward evaluation; entry s-1.
/// Entries for s < t_from are left empty.
std::vector<Vector> evaluate_policy_table(const ModelSpec& model, Regime regime, const Policy& pi, int tau,
                                          int t_from = 1);

/// J_{tau, t}(.; pi): the cost-to-go from step t under pi, anchored at tau.
Vector evaluate_policy(const ModelSpec& model, Regime regime, const Policy& pi, int tau, int t);

struct Deviation {
  int t = 0;
  Index x = 0;
  Index u = 0;
  double deviation_value = 0.0;  // J_{t,t}(x; u + tail)
  double policy_value = 0.0;     // J_{t,t}(x; pi_t)
  bool is_policy_action = false;
  double gap() const { return deviation_value - policy_value; }
};

struct DeviationReport {
  Regime regime;
  double tolerance = kTieTolerance;
  std::vector<Deviation> deviations;            // every (t, x, u)
  std::vector<std::pair<int, Index>> violations;  // (t, x) where some u beats pi by > tolerance
  double worst_violation = 0.0;                  // max_{t,x,u} (policy_value - deviation_value)
  double theta_mismatch = 0.0;                   // max |Theta - J(pi)| over the stored table
  bool theta_checked = false;

  bool passed() const { return violations.empty() && (!theta_checked || theta_mismatch <= tolerance); }
};

/// Single-step deviation test of the solution's policy, with the tail
/// evaluated from the policy itself (not from the stored table). Also
/// reports how far the stored Theta table is from the policy's true values.
DeviationReport verify_step_optimality(const ModelSpec& model, Regime regime, const EquilibriumSolution& sol,
                                       double tolerance = kTieTolerance);

/// Raised when an exhaustive enumeration would exceed its cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GapReport {
  Regime regime;
  Index initial_state = 0;
  std::uint64_t policies_enumerated = 0;
  std::uint64_t optimal_policy_count = 0;  // policies within tolerance of the optimum
  double tolerance = kTieTolerance;
  Policy equilibrium_policy;
  // among the optima, the one differing from the equilibrium in the fewest
  // (t, x) cells; earliest in enumeration order on ties
  Policy precommitment_policy;
  double equilibrium_value = 0.0;
  double precommitment_value = 0.0;
  double value_gap = 0.0;  // equilibrium_value - optimum, >= 0 up to round-off
  std::vector<std::pair<int, Index>> differing_cells;
  // J_{1,t}(.) under each policy, t = 1..T+1 (entry t-1)
  std::vector<Vector> equilibrium_values;
  std::vector<Vector> precommitment_values;

  bool time_inconsistent() const { return value_gap > tolerance; }
};

/// Number of deterministic Markov policies, saturating at UINT64_MAX.
std::uint64_t count_policies(const ModelSpec& model);

/// Brute-force minimization of J_{1,1}(x0; pi) over all deterministic Markov
/// policies, compared with the equilibrium.
GapReport precommitment_gap(const ModelSpec& model, Regime regime, Index initial_state,
                            std::uint64_t cap = 1'000'000, const SolveOptions& options = {});

}  // namespace tirs
