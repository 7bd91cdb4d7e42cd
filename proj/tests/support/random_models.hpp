#pragma once

#include "tirs/examples.hpp"
#include "tirs/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace tirs::testing {

struct RandomModelConfig {
  int states = 3;
  int max_actions = 3;
  int horizon = 3;
  KernelMode mode = KernelMode::RateParameterized;
  bool anchor_dependent = true;
};

/// Random finite model. Rate-parameterized kernels stay stochastic for every
/// eps <= 1 and use rates on a 1/64 grid; tabulated kernels are
/// eps-independent with some zero entries.
inline ModelSpec random_model(std::uint64_t seed, const RandomModelConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> action_count(1, cfg.max_actions);
  const Index n = cfg.states;

  StateSpace states;
  states.lyapunov.resize(n);
  for (Index x = 0; x < n; ++x) {
    states.labels.push_back(static_cast<long>(x));
    states.lyapunov(x) = 1.0 + 2.0 * unit(rng);
  }
  std::vector<std::vector<Action>> actions(static_cast<std::size_t>(n));
  for (auto& set : actions) {
    const int k = action_count(rng);
    for (int u = 0; u < k; ++u) set.push_back(Action{"a" + std::to_string(u), Vector::Constant(1, u)});
  }

  ModelSpec m = make_model_shell(cfg.horizon, std::move(states), std::move(actions), cfg.mode);
  m.name = "random-" + std::to_string(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  for (int t = 1; t <= cfg.horizon; ++t) {
    for (Index x = 0; x < n; ++x) {
      for (Index u = 0; u < m.num_actions(x); ++u) {
        KernelEntry& e = m.entry(t, x, u);
        if (cfg.mode == KernelMode::RateParameterized) {
          e.remainder = pick(rng);
          for (Index z = 0; z < n; ++z) {
            if (z == e.remainder || unit(rng) < 0.25) continue;
            const double a = (0.05 + 0.85 * unit(rng)) / static_cast<double>(n);
            const double r = unit(rng) < 0.3 ? 0.0 : std::round(64.0 * (0.2 + 2.8 * unit(rng))) / 64.0;
            e.terms.push_back({z, a, r});
          }
        } else {
          Vector q(n);
          for (Index z = 0; z < n; ++z) q(z) = unit(rng) < 0.2 ? 0.0 : 0.1 + unit(rng);
          if (q.sum() == 0.0) q(pick(rng)) = 1.0;
          q /= q.sum();
          e.rows.push_back({std::nullopt, q});
        }
      }
    }
  }

  const Index slots = m.num_action_slots();
  for (int tau = 1; tau <= cfg.horizon; ++tau) {
    for (int t = 1; t <= cfg.horizon; ++t) {
      Vector f(slots);
      for (Index s = 0; s < slots; ++s) f(s) = 2.0 * unit(rng);
      m.running[static_cast<std::size_t>((tau - 1) * cfg.horizon + (t - 1))] = f;
    }
    Vector g(n);
    for (Index x = 0; x < n; ++x) g(x) = 3.0 * unit(rng);
    m.terminal[static_cast<std::size_t>(tau - 1)] = g;
  }
  if (!cfg.anchor_dependent) {
    for (int tau = 2; tau <= cfg.horizon; ++tau) {
      for (int t = 1; t <= cfg.horizon; ++t) {
        m.running[static_cast<std::size_t>((tau - 1) * cfg.horizon + (t - 1))] = m.running[static_cast<std::size_t>(t - 1)];
      }
      m.terminal[static_cast<std::size_t>(tau - 1)] = m.terminal[0];
    }
  }
  finalize_model(m);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Index n, double scale = 3.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector h(n);
  for (Index i = 0; i < n; ++i) h(i) = dist(rng);
  return h;
}

/// Random vector on the 2^-20 grid, so that sums with other grid values
/// of moderate size are exact.
inline Vector random_dyadic_vector(std::mt19937_64& rng, Index n, double scale = 3.0) {
  Vector h = random_vector(rng, n, scale);
  for (Index i = 0; i < n; ++i) h(i) = std::ldexp(std::round(std::ldexp(h(i), 20)), -20);
  return h;
}

/// The same model with the action order of every state reversed.
inline ModelSpec reverse_actions(const ModelSpec& model) {
  std::vector<std::vector<Action>> actions = model.actions;
  for (auto& set : actions) std::reverse(set.begin(), set.end());
  ModelSpec r = make_model_shell(model.horizon, model.states, actions, model.mode);
  r.name = model.name + "-reversed";
  r.tolerances = model.tolerances;
  const int T = model.horizon;
  for (int t = 1; t <= T; ++t) {
    for (Index x = 0; x < model.num_states(); ++x) {
      const Index k = model.num_actions(x);
      for (Index u = 0; u < k; ++u) r.entry(t, x, k - 1 - u) = model.entry(t, x, u);
    }
  }
  for (int tau = 1; tau <= T; ++tau) {
    for (int t = 1; t <= T; ++t) {
      Vector& f = r.running[static_cast<std::size_t>((tau - 1) * T + (t - 1))];
      for (Index x = 0; x < model.num_states(); ++x) {
        const Index k = model.num_actions(x);
        for (Index u = 0; u < k; ++u) f(r.slot(x, k - 1 - u)) = model.running_cost(tau, t, x, u);
      }
    }
    r.terminal[static_cast<std::size_t>(tau - 1)] = model.terminal_cost(tau);
  }
  finalize_model(r);
  return r;
}

}  // namespace tirs::testing
