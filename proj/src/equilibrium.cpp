#include "tirs/equilibrium.hpp"

#include "tirs/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace tirs {

namespace {

// Step operators for every (t, x, u), laid out like ModelSpec::kernel.
std::vector<StepOperator> build_operators(const ModelSpec& model, Regime regime) {
  std::vector<StepOperator> ops;
  ops.reserve(model.kernel.size());
  for (int t = 1; t <= model.horizon; ++t) {
    for (Index x = 0; x < model.num_states(); ++x) {
      for (Index u = 0; u < model.num_actions(x); ++u) ops.push_back(step_operator(model, regime, t, x, u));
    }
  }
  return ops;
}

const StepOperator& op_at(const std::vector<StepOperator>& ops, const ModelSpec& model, int t, Index x, Index u) {
  return ops[static_cast<std::size_t>((t - 1) * model.num_action_slots() + model.slot(x, u))];
}

void require_actions(const ModelSpec& model) {
  for (Index x = 0; x < model.num_states(); ++x) {
    if (model.num_actions(x) == 0) {
      throw ModelError("state " + std::to_string(model.states.labels[static_cast<std::size_t>(x)]) +
                       " has no actions");
    }
  }
}

}  // namespace

void check_policy(const ModelSpec& model, const Policy& policy) {
  if (policy.horizon() != model.horizon || policy.choice.cols() != model.num_states()) {
    throw ModelError("policy shape does not match the model");
  }
  for (int t = 1; t <= model.horizon; ++t) {
    for (Index x = 0; x < model.num_states(); ++x) {
      if (policy(t, x) < 0 || policy(t, x) >= model.num_actions(x)) {
        throw ModelError("policy picks an action outside U(x) at t=" + std::to_string(t));
      }
    }
  }
}

int EquilibriumSolution::total_ties() const {
  int total = 0;
  for (int c : diagnostics.tie_counts) total += c;
  return total;
}

EquilibriumSolution solve(const ModelSpec& model, Regime regime, const SolveOptions& options) {
  require_actions(model);
  const int horizon = model.horizon;
  const Index n = model.num_states();

  EquilibriumSolution sol;
  sol.regime = regime;
  sol.policy = Policy(horizon, n);
  sol.theta = ThetaTable(horizon, n);
  sol.ties.resize(static_cast<std::size_t>(horizon * n));
  sol.diagnostics.step_seconds.assign(static_cast<std::size_t>(horizon), 0.0);
  sol.diagnostics.tie_counts.assign(static_cast<std::size_t>(horizon), 0);

  for (int tau = 1; tau <= horizon; ++tau) sol.theta.at(tau, horizon + 1) = model.terminal_cost(tau);

  std::vector<std::vector<OpTrace>> traces(static_cast<std::size_t>(n));
  for (int t = horizon; t >= 1; --t) {
    const auto start = std::chrono::steady_clock::now();
    const Vector& diagonal_next = sol.theta.at(t, t + 1);

    parallel_for(n, options.threads, [&](long xi) {
      const Index x = xi;
      auto& trace = traces[static_cast<std::size_t>(x)];
      trace.clear();
      std::vector<StepOperator> ops;
      std::vector<double> values;
      for (Index u = 0; u < model.num_actions(x); ++u) {
        ops.push_back(step_operator(model, regime, t, x, u));
        values.push_back(model.running_cost(t, t, x, u) + ops.back().apply(diagonal_next));
        if (options.trace) trace.push_back({regime, t, t, x, u, values.back()});
      }
      ArgminSet argmin = select_argmin(values, options.tie_tol);
      const Index chosen = argmin.chosen;
      sol.policy(t, x) = static_cast<int>(chosen);
      for (int tau = 1; tau <= horizon; ++tau) {
        const double value = model.running_cost(tau, t, x, chosen) +
                             ops[static_cast<std::size_t>(chosen)].apply(sol.theta.at(tau, t + 1));
        sol.theta.at(tau, t)(x) = value;
        if (options.trace && tau != t) trace.push_back({regime, tau, t, x, chosen, value});
      }
      sol.ties[static_cast<std::size_t>((t - 1) * n + x)] = std::move(argmin);
    });

    int ties = 0;
    for (Index x = 0; x < n; ++x) {
      if (sol.tie(t, x).minimizers.size() > 1) ++ties;
      if (options.trace) {
        for (const auto& ev : traces[static_cast<std::size_t>(x)]) options.trace(ev);
      }
    }
    sol.diagnostics.tie_counts[static_cast<std::size_t>(t - 1)] = ties;
    sol.diagnostics.step_seconds[static_cast<std::size_t>(t - 1)] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return sol;
}

EquilibriumSolution solve_eps(const ModelSpec& model, double eps, const SolveOptions& options) {
  return solve(model, Regime::at(eps), options);
}

EquilibriumSolution solve_limit(const ModelSpec& model, const SolveOptions& options) {
  return solve(model, Regime::limit(), options);
}

std::vector<Vector> evaluate_policy_table(const ModelSpec& model, Regime regime, const Policy& pi, int tau,
                                          int t_from) {
  check_policy(model, pi);
  if (tau < 1 || tau > model.horizon || t_from < 1 || t_from > model.horizon + 1) {
    throw ModelError("step index out of range");
  }
  std::vector<Vector> table(static_cast<std::size_t>(model.horizon + 1));
  table.back() = model.terminal_cost(tau);
  for (int s = model.horizon; s >= t_from; --s) {
    const Vector& next = table[static_cast<std::size_t>(s)];
    Vector current(model.num_states());
    for (Index x = 0; x < model.num_states(); ++x) {
      const Index u = pi(s, x);
      current(x) = model.running_cost(tau, s, x, u) + lambda(model, regime, s, x, u, next);
    }
    table[static_cast<std::size_t>(s - 1)] = std::move(current);
  }
  return table;
}

Vector evaluate_policy(const ModelSpec& model, Regime regime, const Policy& pi, int tau, int t) {
  return evaluate_policy_table(model, regime, pi, tau, t)[static_cast<std::size_t>(t - 1)];
}

DeviationReport verify_step_optimality(const ModelSpec& model, Regime regime, const EquilibriumSolution& sol,
                                       double tolerance) {
  check_policy(model, sol.policy);
  const int horizon = model.horizon;
  DeviationReport report;
  report.regime = regime;
  report.tolerance = tolerance;
  report.worst_violation = -kInf;

  const bool has_theta = sol.theta.horizon() == horizon;
  report.theta_checked = has_theta;

  for (int t = 1; t <= horizon; ++t) {
    // tail values anchored at tau = t, evaluated under the policy itself
    const auto table = evaluate_policy_table(model, regime, sol.policy, t, t);
    const Vector& tail = table[static_cast<std::size_t>(t)];
    for (Index x = 0; x < model.num_states(); ++x) {
      const double on_policy = table[static_cast<std::size_t>(t - 1)](x);
      bool violated = false;
      for (Index u = 0; u < model.num_actions(x); ++u) {
        const double deviation = hamiltonian(model, regime, t, t, x, u, tail);
        report.deviations.push_back({t, x, u, deviation, on_policy, u == sol.policy(t, x)});
        report.worst_violation = std::max(report.worst_violation, on_policy - deviation);
        if (on_policy > deviation + tolerance) violated = true;
      }
      if (violated) report.violations.emplace_back(t, x);
    }
  }
  if (has_theta) {
    for (int tau = 1; tau <= horizon; ++tau) {
      const auto table = evaluate_policy_table(model, regime, sol.policy, tau, 1);
      for (int s = 1; s <= horizon + 1; ++s) {
        const double diff = (sol.theta.at(tau, s) - table[static_cast<std::size_t>(s - 1)]).cwiseAbs().maxCoeff();
        report.theta_mismatch = std::max(report.theta_mismatch, diff);
      }
    }
  }
  return report;
}

std::uint64_t count_policies(const ModelSpec& model) {
  std::uint64_t total = 1;
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  for (int t = 1; t <= model.horizon; ++t) {
    for (Index x = 0; x < model.num_states(); ++x) {
      const auto k = static_cast<std::uint64_t>(model.num_actions(x));
      if (k == 0) return 0;
      if (total > kMax / k) return kMax;
      total *= k;
    }
  }
  return total;
}

GapReport precommitment_gap(const ModelSpec& model, Regime regime, Index initial_state, std::uint64_t cap,
                            const SolveOptions& options) {
  require_actions(model);
  if (initial_state < 0 || initial_state >= model.num_states()) throw ModelError("initial state out of range");
  const std::uint64_t count = count_policies(model);
  if (count > cap) {
    throw CapacityError("instance has " + (count == std::numeric_limits<std::uint64_t>::max()
                                               ? std::string("more than 2^64")
                                               : std::to_string(count)) +
                        " deterministic Markov policies, above the enumeration cap of " + std::to_string(cap) +
                        "; shrink the horizon, window or action grid, or raise the cap");
  }
  const int horizon = model.horizon;
  const Index n = model.num_states();
  const auto ops = build_operators(model, regime);

  GapReport report;
  report.regime = regime;
  report.initial_state = initial_state;
  report.tolerance = options.tie_tol;
  report.equilibrium_policy = solve(model, regime, options).policy;
  report.equilibrium_value =
      evaluate_policy(model, regime, report.equilibrium_policy, 1, 1)(initial_state);

  // Depth-first over steps T..1; the tail value W_{t+1} is shared by every
  // assignment of the earlier steps. The first pass finds the optimum, the
  // second picks, among the optima, the policy closest to the equilibrium.
  Policy current(horizon, n);
  Policy best_policy(horizon, n);
  double best = kInf;
  std::uint64_t enumerated = 0;
  std::uint64_t near_optimal = 0;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  bool second_pass = false;

  auto descend = [&](auto&& self, int t, const Vector& next, std::size_t distance) -> void {
    std::vector<std::vector<double>> candidates(static_cast<std::size_t>(n));
    for (Index x = 0; x < n; ++x) {
      for (Index u = 0; u < model.num_actions(x); ++u) {
        candidates[static_cast<std::size_t>(x)].push_back(model.running_cost(1, t, x, u) +
                                                           op_at(ops, model, t, x, u).apply(next));
      }
    }
    std::vector<Index> digits(static_cast<std::size_t>(n), 0);
    Vector values(n);
    while (true) {
      std::size_t step_distance = 0;
      for (Index x = 0; x < n; ++x) {
        const Index d = digits[static_cast<std::size_t>(x)];
        current(t, x) = static_cast<int>(d);
        values(x) = candidates[static_cast<std::size_t>(x)][static_cast<std::size_t>(d)];
        if (current(t, x) != report.equilibrium_policy(t, x)) ++step_distance;
      }
      if (t == 1) {
        const double v = values(initial_state);
        if (!second_pass) {
          ++enumerated;
          if (v < best) best = v;
        } else if (v - best <= report.tolerance) {
          ++near_optimal;
          if (distance + step_distance < best_distance) {
            best_distance = distance + step_distance;
            best_policy = current;
          }
        }
      } else {
        self(self, t - 1, values, distance + step_distance);
      }
      Index x = 0;
      while (x < n) {
        auto& d = digits[static_cast<std::size_t>(x)];
        if (++d < model.num_actions(x)) break;
        d = 0;
        ++x;
      }
      if (x == n) break;
    }
  };
  descend(descend, horizon, model.terminal_cost(1), 0);
  second_pass = true;
  descend(descend, horizon, model.terminal_cost(1), 0);

  report.policies_enumerated = enumerated;
  report.precommitment_policy = best_policy;
  report.precommitment_value = evaluate_policy(model, regime, best_policy, 1, 1)(initial_state);
  report.value_gap = report.equilibrium_value - best;
  report.optimal_policy_count = near_optimal;
  for (int t = 1; t <= horizon; ++t) {
    for (Index x = 0; x < n; ++x) {
      if (best_policy(t, x) != report.equilibrium_policy(t, x)) report.differing_cells.emplace_back(t, x);
    }
  }
  report.equilibrium_values = evaluate_policy_table(model, regime, report.equilibrium_policy, 1, 1);
  report.precommitment_values = evaluate_policy_table(model, regime, best_policy, 1, 1);
  return report;
}

}  // namespace tirs
