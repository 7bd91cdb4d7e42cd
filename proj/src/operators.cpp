#include "tirs/operators.hpp"

#include <algorithm>
#include <sstream>

namespace tirs {

Regime Regime::at(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ModelError("epsilon must be a positive finite real");
  Regime r;
  r.eps_ = eps;
  return r;
}

std::string Regime::describe() const {
  if (is_limit()) return "limit";
  std::ostringstream os;
  os.precision(17);
  os << eps_;
  return os.str();
}

double StepOperator::apply(const Vector& h) const {
  if (regime.is_limit()) return maxplus_expectation(row, h);
  return risk_expectation_log(regime.eps(), row, h);
}

StepOperator step_operator(const ModelSpec& model, Regime regime, int t, Index x, Index u) {
  if (regime.is_limit()) {
    const Vector& rate = rate_at(model, t, x, u);
    if (!(rate.array() < kInf).any()) {
      throw ModelError("rate function is +inf everywhere at t=" + std::to_string(t) + ", x=" +
                       std::to_string(model.states.labels[static_cast<std::size_t>(x)]));
    }
    return {regime, rate};
  }
  return {regime, log_kernel_at(model, regime.eps(), t, x, u)};
}

double lambda_eps(const ModelSpec& model, double eps, int t, Index x, Index u, const Vector& h) {
  return step_operator(model, Regime::at(eps), t, x, u).apply(h);
}

double lambda_limit(const ModelSpec& model, int t, Index x, Index u, const Vector& h) {
  return step_operator(model, Regime::limit(), t, x, u).apply(h);
}

double lambda(const ModelSpec& model, Regime regime, int t, Index x, Index u, const Vector& h) {
  return step_operator(model, regime, t, x, u).apply(h);
}

double hamiltonian_eps(const ModelSpec& model, double eps, int tau, int t, Index x, Index u, const Vector& h) {
  return model.running_cost(tau, t, x, u) + lambda_eps(model, eps, t, x, u, h);
}

double hamiltonian_limit(const ModelSpec& model, int tau, int t, Index x, Index u, const Vector& h) {
  return model.running_cost(tau, t, x, u) + lambda_limit(model, t, x, u, h);
}

double hamiltonian(const ModelSpec& model, Regime regime, int tau, int t, Index x, Index u, const Vector& h) {
  return model.running_cost(tau, t, x, u) + lambda(model, regime, t, x, u, h);
}

ArgminSet select_argmin(std::span<const double> values, double tie_tol) {
  if (values.empty()) throw ModelError("argmin over an empty action set");
  double best = values[0];
  for (double v : values) best = std::min(best, v);
  ArgminSet out;
  double runner_up = kInf;
  for (std::size_t u = 0; u < values.size(); ++u) {
    if (values[u] - best <= tie_tol) {
      out.minimizers.push_back(static_cast<Index>(u));
    } else {
      runner_up = std::min(runner_up, values[u]);
    }
  }
  out.chosen = out.minimizers.front();
  out.gap = runner_up == kInf ? kInf : runner_up - best;
  return out;
}

BellmanResult bellman_argmin(const ModelSpec& model, Regime regime, int t, Index x, const Vector& h,
                             double tie_tol) {
  std::vector<double> values(static_cast<std::size_t>(model.num_actions(x)));
  for (Index u = 0; u < model.num_actions(x); ++u) {
    values[static_cast<std::size_t>(u)] = hamiltonian(model, regime, t, t, x, u, h);
  }
  BellmanResult out;
  out.argmin = select_argmin(values, tie_tol);
  out.value = *std::min_element(values.begin(), values.end());
  return out;
}

double varadhan_check(const ModelSpec& model, double eps, int t, Index x, Index u, const Vector& h) {
  const Vector log_q = log_kernel_at(model, eps, t, x, u);
  return std::abs(risk_expectation_log(eps, log_q, h) - gibbs_dual_value_log(eps, log_q, h));
}

}  // namespace tirs
