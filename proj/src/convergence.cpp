#include "tirs/convergence.hpp"

#include "tirs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tirs {

std::vector<double> geometric_grid(double eps_max, int points) {
  if (!(eps_max > 0.0) || points < 1) throw ModelError("geometric grid needs eps_max > 0 and at least one point");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) grid.push_back(std::ldexp(eps_max, -k));
  return grid;
}

double kernel_validity_threshold(const ModelSpec& model) {
  for (int k = 0; k <= 60; ++k) {
    const double eps = std::ldexp(1.0, -k);
    try {
      for (int t = 1; t <= model.horizon; ++t) {
        for (Index x = 0; x < model.num_states(); ++x) {
          for (Index u = 0; u < model.num_actions(x); ++u) kernel_at(model, eps, t, x, u);
        }
      }
      return eps;
    } catch (const KernelError&) {
    }
  }
  throw KernelError("kernel does not assemble at any eps down to 2^-60");
}

std::vector<double> default_grid(const ModelSpec& model, int points) {
  if (model.mode == KernelMode::Tabulated && !model.kernel.empty()) {
    const auto& rows = model.kernel.front().rows;
    const bool any_eps = std::any_of(rows.begin(), rows.end(), [](const TabulatedRow& r) { return !r.eps; });
    if (!any_eps) {
      std::vector<double> grid;
      for (const auto& r : rows) grid.push_back(*r.eps);
      std::sort(grid.begin(), grid.end(), std::greater<>());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      return grid;
    }
  }
  return geometric_grid(kernel_validity_threshold(model), points);
}

bool eventually_nonincreasing(std::span<const double> seq) {
  const std::size_t n = seq.size();
  if (n < 3) return true;
  auto moving_min = [&](std::size_t k) { return std::min({seq[k - 2], seq[k - 1], seq[k]}); };
  const std::size_t start = std::max<std::size_t>(2, (n + 2) / 3);
  for (std::size_t k = start + 1; k < n; ++k) {
    if (moving_min(k) > moving_min(k - 1)) return false;
  }
  return true;
}

bool SweepResult::distances_converged() const {
  if (points.empty()) return false;
  return monotone.all() && (final_distance.array() < tolerance).all();
}

bool SweepResult::policy_converged() const {
  if (points.empty()) return false;
  return !limit_all_singleton() || points.back().policy_agreement == 1.0;
}

std::vector<double> SweepResult::series(int tau, int t) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.distance(tau - 1, t - 1));
  return out;
}

SweepResult sweep(const ModelSpec& model, const std::vector<double>& grid, const SweepOptions& options) {
  if (grid.empty()) throw ModelError("sweep grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0)) throw ModelError("sweep grid must be positive");
    if (k > 0 && !(grid[k] < grid[k - 1])) throw ModelError("sweep grid must be strictly decreasing");
  }
  const int horizon = model.horizon;
  const Index n = model.num_states();

  SolveOptions solve_options;
  solve_options.tie_tol = options.tie_tol;
  const EquilibriumSolution limit = solve_limit(model, solve_options);

  SweepResult result;
  result.horizon = horizon;
  result.tolerance = options.tolerance >= 0.0 ? options.tolerance : model.tolerances.sweep_final;
  result.limit_tie_count = limit.total_ties();
  result.points.resize(grid.size());

  // Fail at the largest eps first so the error names the validity threshold.
  for (int t = 1; t <= horizon; ++t) {
    for (Index x = 0; x < n; ++x) {
      for (Index u = 0; u < model.num_actions(x); ++u) kernel_at(model, grid.front(), t, x, u);
    }
  }

  parallel_for(static_cast<long>(grid.size()), options.threads, [&](long k) {
    const EquilibriumSolution sol = solve_eps(model, grid[static_cast<std::size_t>(k)], solve_options);
    SweepPoint& point = result.points[static_cast<std::size_t>(k)];
    point.eps = grid[static_cast<std::size_t>(k)];
    point.distance.resize(horizon, horizon);
    for (int tau = 1; tau <= horizon; ++tau) {
      for (int t = 1; t <= horizon; ++t) {
        point.distance(tau - 1, t - 1) = w_metric(sol.theta.at(tau, t), limit.theta.at(tau, t), model.states.lyapunov);
      }
    }
    long agree = 0;
    for (int t = 1; t <= horizon; ++t) {
      for (Index x = 0; x < n; ++x) {
        const auto& members = limit.tie(t, x).minimizers;
        if (std::find(members.begin(), members.end(), static_cast<Index>(sol.policy(t, x))) != members.end()) ++agree;
      }
    }
    point.policy_agreement = static_cast<double>(agree) / static_cast<double>(horizon * n);
    point.tie_count = sol.total_ties();
  });

  result.monotone.resize(horizon, horizon);
  result.final_distance = result.points.back().distance;
  for (int tau = 1; tau <= horizon; ++tau) {
    for (int t = 1; t <= horizon; ++t) {
      const auto s = result.series(tau, t);
      result.monotone(tau - 1, t - 1) = eventually_nonincreasing(s);
    }
  }
  return result;
}

std::vector<double> operator_limit_discrepancy(const ModelSpec& model, const std::vector<double>& grid,
                                               const Vector& h) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double eps : grid) {
    double worst = 0.0;
    for (int t = 1; t <= model.horizon; ++t) {
      for (Index x = 0; x < model.num_states(); ++x) {
        for (Index u = 0; u < model.num_actions(x); ++u) {
          worst = std::max(worst, std::abs(lambda_eps(model, eps, t, x, u, h) - lambda_limit(model, t, x, u, h)));
        }
      }
    }
    out.push_back(worst);
  }
  return out;
}

}  // namespace tirs
