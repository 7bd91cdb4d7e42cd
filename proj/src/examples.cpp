#include "tirs/examples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace tirs {

namespace {

std::vector<Vector> base_tables(const ModelSpec& m, const BaseRunning& running) {
  std::vector<Vector> base(static_cast<std::size_t>(m.horizon), Vector::Zero(m.num_action_slots()));
  for (int t = 1; t <= m.horizon; ++t) {
    for (Index x = 0; x < m.num_states(); ++x) {
      for (Index u = 0; u < m.num_actions(x); ++u) {
        const auto& a = m.actions[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
        base[static_cast<std::size_t>(t - 1)](m.slot(x, u)) =
            running(t, m.states.labels[static_cast<std::size_t>(x)], a.payload.size() ? a.payload(0) : double(u));
      }
    }
  }
  return base;
}

CostTables costs_from_family(const ModelSpec& m, const CostFamily& family) {
  const int T = m.horizon;
  if (family.anchored_running && family.anchored_terminal) {
    CostTables out;
    out.running.assign(static_cast<std::size_t>(T * T), Vector::Zero(m.num_action_slots()));
    out.terminal.assign(static_cast<std::size_t>(T), Vector::Zero(m.num_states()));
    for (int tau = 1; tau <= T; ++tau) {
      for (int t = 1; t <= T; ++t) {
        for (Index x = 0; x < m.num_states(); ++x) {
          for (Index u = 0; u < m.num_actions(x); ++u) {
            const auto& a = m.actions[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
            out.running[static_cast<std::size_t>((tau - 1) * T + (t - 1))](m.slot(x, u)) = family.anchored_running(
                tau, t, m.states.labels[static_cast<std::size_t>(x)], a.payload.size() ? a.payload(0) : double(u));
          }
        }
      }
      for (Index x = 0; x < m.num_states(); ++x) {
        out.terminal[static_cast<std::size_t>(tau - 1)](x) =
            family.anchored_terminal(tau, m.states.labels[static_cast<std::size_t>(x)]);
      }
    }
    return out;
  }
  if (!family.running || !family.terminal) throw ModelError("cost family is incomplete");
  const auto base = base_tables(m, family.running);
  Vector terminal(m.num_states());
  for (Index x = 0; x < m.num_states(); ++x) terminal(x) = family.terminal(m.states.labels[static_cast<std::size_t>(x)]);
  if (family.discount) return build_discounted_costs(base, terminal, *family.discount);
  return build_consistent_costs(base, terminal);
}

std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Action numeric_action(double u) {
  std::ostringstream os;
  os << u;
  Action a{os.str(), Vector::Constant(1, u)};
  return a;
}

}  // namespace

CostTables build_discounted_costs(const std::vector<Vector>& base, const Vector& terminal, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ModelError("discount factor must lie in (0, 1)");
  const int T = static_cast<int>(base.size());
  CostTables out;
  out.running.reserve(static_cast<std::size_t>(T * T));
  for (int tau = 1; tau <= T; ++tau) {
    for (int t = 1; t <= T; ++t) out.running.push_back(std::pow(lambda, t - tau) * base[static_cast<std::size_t>(t - 1)]);
  }
  for (int tau = 1; tau <= T; ++tau) out.terminal.push_back(std::pow(lambda, T + 1 - tau) * terminal);
  return out;
}

CostTables build_consistent_costs(const std::vector<Vector>& base, const Vector& terminal) {
  const int T = static_cast<int>(base.size());
  CostTables out;
  for (int tau = 1; tau <= T; ++tau) {
    for (int t = 1; t <= T; ++t) out.running.push_back(base[static_cast<std::size_t>(t - 1)]);
  }
  out.terminal.assign(static_cast<std::size_t>(T), terminal);
  return out;
}

void assign_costs(ModelSpec& model, CostTables costs) {
  model.running = std::move(costs.running);
  model.terminal = std::move(costs.terminal);
}

CostFamily example1_default_costs(std::optional<double> discount) {
  CostFamily family;
  family.running = [](int, long x, double) { return static_cast<double>(std::labs(x)); };
  family.terminal = [](long x) { return static_cast<double>(std::labs(x)); };
  family.discount = discount;
  return family;
}

CostFamily example2_default_costs(std::optional<double> discount) {
  // state costs for bull, bear, crisis; intervening saves 1 per step
  CostFamily family;
  family.running = [](int, long x, double u) {
    static constexpr double kStateCost[] = {0.0, 1.0, 6.0};
    return kStateCost[x - 1] - u;
  };
  family.terminal = [](long x) {
    static constexpr double kStateCost[] = {0.0, 1.0, 6.0};
    return kStateCost[x - 1];
  };
  family.discount = discount;
  return family;
}

ModelSpec build_example1(const Example1Config& cfg) {
  const int W = cfg.window;
  if (W < 2) throw ModelError("example1 window half-width must be at least 2");
  if (!(cfg.kappa > 0.0)) throw ModelError("example1 kappa must be positive");
  if (!(cfg.eps_max > 0.0)) throw ModelError("example1 eps_max must be positive");

  StateSpace states;
  const Index n = 2 * W + 1;
  states.lyapunov.resize(n);
  for (long x = -W; x <= W; ++x) {
    states.labels.push_back(x);
    states.lyapunov(x + W) = static_cast<double>(x * x) + 1.0;
  }
  std::vector<std::vector<Action>> actions(static_cast<std::size_t>(n), {numeric_action(-1.0), numeric_action(1.0)});
  ModelSpec m = make_model_shell(cfg.horizon, std::move(states), std::move(actions), KernelMode::RateParameterized);
  m.name = "example1";

  // jumps beyond this reach underflow exp(-d^2 / eps_max); the remainder
  // absorbs the dropped tail
  const long reach = std::max<long>(2L * W + 2, static_cast<long>(std::ceil(std::sqrt(745.0 * cfg.eps_max))));
  auto fold = [W](long z) { return std::clamp<long>(z, -W, W); };
  for (int t = 1; t <= cfg.horizon; ++t) {
    for (long x = -W; x <= W; ++x) {
      for (Index u = 0; u < 2; ++u) {
        const long center = x + (u == 0 ? -1 : 1);
        KernelEntry& e = m.entry(t, x + W, u);
        e.remainder = fold(center) + W;
        for (long d = -reach; d <= reach; ++d) {
          if (d == 0) continue;
          const long target = fold(center + d) + W;
          if (target == e.remainder) continue;
          e.terms.push_back({target, cfg.kappa, static_cast<double>(d * d)});
        }
      }
    }
  }
  assign_costs(m, costs_from_family(m, cfg.costs.running || cfg.costs.anchored_running
                                           ? cfg.costs
                                           : example1_default_costs(0.5)));
  m.tolerances.limit_consistency = 0.1;
  m.tolerances.sweep_final = 0.1;
  m.truncation = "fold-to-boundary";
  m.notes.push_back("window [-" + std::to_string(W) + ", " + std::to_string(W) +
                    "]; jump mass leaving the window is folded onto the nearest boundary state");
  m.notes.push_back("Lyapunov weight V(x) = x^2 + 1 (shifted from x^2 to stay positive at 0)");
  m.notes.push_back("jumps with |d| > " + std::to_string(reach) + " are dropped into the remainder state");
  finalize_model(m);

  for (Index x = 0; x < n; ++x) {
    for (Index u = 0; u < 2; ++u) {
      try {
        kernel_at(m, cfg.eps_max, 1, x, u);
      } catch (const KernelError&) {
        throw ModelError("example1 kappa=" + fmt_real(cfg.kappa) + " too large: jump mass exceeds 1 at eps=" +
                         fmt_real(cfg.eps_max));
      }
    }
  }
  return m;
}

ModelSpec build_example2(const Example2Config& cfg) {
  for (const auto& row : cfg.p) {
    for (double p : row) {
      if (!(p > 0.0 && p < 1.0)) throw ModelError("example2 base probabilities must lie in (0, 1)");
    }
  }
  for (const auto& row : cfg.lambda_rates) {
    for (double l : row) {
      if (!(l >= 0.0)) throw ModelError("example2 rates must be non-negative");
    }
  }
  StateSpace states{{1, 2, 3}, Vector::Ones(3)};
  std::vector<std::vector<Action>> actions(3, {numeric_action(0.0), numeric_action(1.0)});
  ModelSpec m = make_model_shell(cfg.horizon, std::move(states), std::move(actions), KernelMode::RateParameterized);
  m.name = "example2";

  // (remainder, other regular state) per current state, 0-based:
  //   x=1: q(1) = 1 - p - e, q(2) = p - e;  x=2: q(2) = 1 - p - e, q(1) = p - e
  //   x=3: q(1) = 1 - p - e, q(2) = p - e;  always q(3) = 2e,  e = exp(-lambda/eps)
  constexpr std::array<std::pair<Index, Index>, 3> kLayout{{{0, 1}, {1, 0}, {0, 1}}};
  for (int t = 1; t <= cfg.horizon; ++t) {
    for (Index x = 0; x < 3; ++x) {
      for (Index u = 0; u < 2; ++u) {
        const double p = cfg.p[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
        const double rate = cfg.lambda_rates[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
        KernelEntry& e = m.entry(t, x, u);
        const auto [rem, other] = kLayout[static_cast<std::size_t>(x)];
        e.remainder = rem;
        e.terms = {{other, p, 0.0}, {other, -1.0, rate}, {2, 2.0, rate}};
        // limit: regular states are reached at rate 0, the crisis at lambda
        e.rate = Vector::Zero(3);
        e.rate(2) = rate;
      }
    }
  }
  assign_costs(m, costs_from_family(m, cfg.costs.running || cfg.costs.anchored_running
                                           ? cfg.costs
                                           : example2_default_costs(0.5)));
  m.tolerances.limit_consistency = 0.05;
  m.tolerances.sweep_final = 0.05;
  m.truncation = "closed";
  m.notes.push_back("three regimes; crisis probability 2 exp(-lambda(x,u)/eps); lambda = inf means unreachable");
  finalize_model(m);

  if (cfg.eps_max <= 0.0) return m;
  for (Index x = 0; x < 3; ++x) {
    for (Index u = 0; u < 2; ++u) {
      try {
        kernel_at(m, cfg.eps_max, 1, x, u);
      } catch (const KernelError& err) {
        throw ModelError(std::string("example2 kernel is not stochastic at eps_max: ") + err.what());
      }
    }
  }
  return m;
}

ModelSpec build_two_state_fixed_kernel(int horizon) {
  StateSpace states{{0, 1}, Vector::Ones(2)};
  std::vector<std::vector<Action>> actions(2, {Action{"a", Vector::Constant(1, 0.0)}, Action{"b", Vector::Constant(1, 1.0)}});
  ModelSpec m = make_model_shell(horizon, std::move(states), std::move(actions), KernelMode::Tabulated);
  m.name = "two-state";
  const std::array<std::array<std::array<double, 2>, 2>, 2> rows{{{{{0.7, 0.3}, {0.2, 0.8}}}, {{{0.5, 0.5}, {0.9, 0.1}}}}};
  for (int t = 1; t <= horizon; ++t) {
    for (Index x = 0; x < 2; ++x) {
      for (Index u = 0; u < 2; ++u) {
        const auto& r = rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
        Vector q(2);
        q << r[0], r[1];
        m.entry(t, x, u).rows.push_back({std::nullopt, q});
      }
    }
  }
  CostFamily family;
  family.running = [](int, long x, double u) { return x == 0 ? 1.0 + 0.3 * u : 0.5 + 1.5 * u; };
  family.terminal = [](long x) { return x == 0 ? 0.0 : 2.0; };
  assign_costs(m, costs_from_family(m, family));
  m.tolerances.sweep_final = 0.05;
  m.tolerances.limit_consistency = 0.05;
  m.notes.push_back("eps-independent kernel; the limit rate is 0 on the support of each row");
  finalize_model(m);
  return m;
}

std::vector<std::string> example_names() {
  return {"example1", "example1-small", "example1-small-consistent", "example2", "example2-short", "two-state"};
}

ModelSpec build_named_example(const std::string& name) {
  if (name == "example1") {
    Example1Config cfg;
    cfg.costs = example1_default_costs(0.5);
    return build_example1(cfg);
  }
  if (name == "example1-small" || name == "example1-small-consistent") {
    Example1Config cfg;
    cfg.window = 2;
    cfg.horizon = 3;
    cfg.costs = example1_default_costs(name == "example1-small" ? std::optional<double>(0.5) : std::nullopt);
    ModelSpec m = build_example1(cfg);
    m.name = name;
    return m;
  }
  if (name == "example2" || name == "example2-short") {
    Example2Config cfg;
    cfg.horizon = name == "example2" ? 3 : 2;
    cfg.costs = example2_default_costs(0.5);
    ModelSpec m = build_example2(cfg);
    m.name = name;
    return m;
  }
  if (name == "two-state") return build_two_state_fixed_kernel();
  throw ModelError("unknown example '" + name + "'");
}

}  // namespace tirs
