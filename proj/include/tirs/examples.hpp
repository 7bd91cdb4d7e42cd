#pragma once

// Ready-made models: a controlled integer walk with Gaussian-type jumps, a
// three-regime market with a rare crisis state, and a two-state fixed kernel.

#include "tirs/model.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tirs {

struct CostTables {
  std::vector<Vector> running;   // [(tau-1) * T + (t-1)], over action slots
  std::vector<Vector> terminal;  // [tau-1], over states
};

/// f_{tau,t} = lambda^(t - tau) * base[t-1], g_tau = lambda^(T + 1 - tau) * terminal.
/// `base` holds one vector over action slots per step.
CostTables build_discounted_costs(const std::vector<Vector>& base, const Vector& terminal, double lambda);

/// Anchor-independent costs: f_{tau,t} = base[t-1], g_tau = terminal.
CostTables build_consistent_costs(const std::vector<Vector>& base, const Vector& terminal);

void assign_costs(ModelSpec& model, CostTables costs);

/// Running cost c_t(x, u) on state/action labels. Action labels are passed
/// as their numeric payload.
using BaseRunning = std::function<double(int t, long x, double u)>;
using BaseTerminal = std::function<double(long x)>;
/// Fully anchor-dependent f_{tau,t}(x,u) and g_tau(x).
using AnchoredRunning = std::function<double(int tau, int t, long x, double u)>;
using AnchoredTerminal = std::function<double(int tau, long x)>;

struct CostFamily {
  BaseRunning running;
  BaseTerminal terminal;
  std::optional<double> discount;  // exponential discounting factor in (0,1)
  // When both are set they override running/terminal/discount.
  AnchoredRunning anchored_running;
  AnchoredTerminal anchored_terminal;
};

struct Example1Config {
  int window = 5;     // states -W..W
  double kappa = 0.1;
  int horizon = 2;
  double eps_max = 1.0;  // largest epsilon the kernel must support
  CostFamily costs;
};

/// Integer walk X' = X + u + xi, u in {-1, 1}, P(xi = d) = kappa exp(-d^2/eps)
/// for d != 0. Mass leaving the window is folded onto the nearest boundary.
ModelSpec build_example1(const Example1Config& cfg);

struct Example2Config {
  // index [state-1][u], u in {0, 1}
  std::array<std::array<double, 2>, 3> p{{{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}}};
  std::array<std::array<double, 2>, 3> lambda_rates{{{kInf, 1.0}, {kInf, 1.0}, {1.0, 1.0}}};
  int horizon = 3;
  double eps_max = 0.5;  // <= 0: limit-only model, no stochasticity check
  CostFamily costs;
};

/// Three-regime market (bull, bear, crisis); the crisis state is reached
/// with probability 2 exp(-lambda(x,u)/eps).
ModelSpec build_example2(const Example2Config& cfg);

/// Default cost families used by the built-in examples.
CostFamily example1_default_costs(std::optional<double> discount);
CostFamily example2_default_costs(std::optional<double> discount);

/// Two states, two actions, eps-independent tabulated kernel,
/// anchor-independent costs.
ModelSpec build_two_state_fixed_kernel(int horizon = 2);

/// Names accepted by build_named_example.
std::vector<std::string> example_names();
/// Throws ModelError for unknown names.
ModelSpec build_named_example(const std::string& name);

}  // namespace tirs
