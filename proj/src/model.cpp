#include "tirs/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tirs {

namespace {

std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string where(const ModelSpec& m, int t, Index x, Index u) {
  std::ostringstream os;
  os << "(t=" << t << ", x=" << m.states.labels[static_cast<std::size_t>(x)]
     << ", u=" << m.actions[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)].label << ")";
  return os.str();
}

bool eps_matches(double stored, double eps) {
  return std::abs(stored - eps) <= 1e-12 * std::max(1.0, std::abs(eps));
}

void derive_rate(KernelEntry& e, KernelMode mode, Index n) {
  if (e.rate.size() != 0) return;
  if (mode == KernelMode::RateParameterized) {
    e.rate = Vector::Constant(n, kInf);
    double limit_mass = 1.0;
    for (const auto& term : e.terms) {
      if (term.weight > 0.0 && std::isfinite(term.rate)) {
        e.rate(term.z) = std::min(e.rate(term.z), term.rate);
      }
      if (term.rate == 0.0) limit_mass -= term.weight;
    }
    if (e.remainder >= 0 && limit_mass > 1e-12) e.rate(e.remainder) = 0.0;
    return;
  }
  // A single eps-independent row has the trivial limit: rate 0 on its support.
  if (e.rows.size() == 1 && !e.rows.front().eps) {
    const Vector& q = e.rows.front().q;
    e.rate = Vector::Constant(n, kInf);
    for (Index z = 0; z < n; ++z) {
      if (q(z) > 0.0) e.rate(z) = 0.0;
    }
  }
}

}  // namespace

Index StateSpace::index_of(long label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw ModelError("unknown state label " + std::to_string(label));
  return static_cast<Index>(it - labels.begin());
}

const KernelEntry& ModelSpec::entry(int t, Index x, Index u) const {
  return kernel[static_cast<std::size_t>((t - 1) * num_action_slots() + slot(x, u))];
}

KernelEntry& ModelSpec::entry(int t, Index x, Index u) {
  return kernel[static_cast<std::size_t>((t - 1) * num_action_slots() + slot(x, u))];
}

double ModelSpec::running_cost(int tau, int t, Index x, Index u) const {
  return running[static_cast<std::size_t>((tau - 1) * horizon + (t - 1))](slot(x, u));
}

const Vector& ModelSpec::terminal_cost(int tau) const {
  return terminal[static_cast<std::size_t>(tau - 1)];
}

Index ModelSpec::action_index(Index x, const std::string& label) const {
  const auto& list = actions[static_cast<std::size_t>(x)];
  for (std::size_t u = 0; u < list.size(); ++u) {
    if (list[u].label == label) return static_cast<Index>(u);
  }
  throw ModelError("unknown action '" + label + "' at state " +
                   std::to_string(states.labels[static_cast<std::size_t>(x)]));
}

ModelSpec make_model_shell(int horizon, StateSpace states, std::vector<std::vector<Action>> actions,
                           KernelMode mode) {
  if (horizon < 1) throw ModelError("horizon must be a positive integer");
  if (states.size() == 0) throw ModelError("state space is empty");
  if (actions.size() != states.labels.size()) {
    throw ModelError("action table does not cover the state space");
  }
  ModelSpec m;
  m.horizon = horizon;
  m.states = std::move(states);
  m.actions = std::move(actions);
  m.mode = mode;
  m.action_offset.assign(1, 0);
  for (const auto& list : m.actions) {
    m.action_offset.push_back(m.action_offset.back() + static_cast<Index>(list.size()));
  }
  const Index slots = m.num_action_slots();
  m.kernel.assign(static_cast<std::size_t>(horizon * slots), KernelEntry{});
  m.running.assign(static_cast<std::size_t>(horizon * horizon), Vector::Zero(slots));
  m.terminal.assign(static_cast<std::size_t>(horizon), Vector::Zero(m.states.size()));
  return m;
}

void finalize_model(ModelSpec& m) {
  const Index n = m.num_states();
  if (n == 0) throw ModelError("state space is empty");
  if (m.horizon < 1) throw ModelError("horizon must be a positive integer");
  if (m.states.lyapunov.size() != n) throw ModelError("lyapunov weight must cover every state");
  {
    std::set<long> seen(m.states.labels.begin(), m.states.labels.end());
    if (static_cast<Index>(seen.size()) != n) throw ModelError("duplicate state labels");
  }
  if (static_cast<Index>(m.actions.size()) != n) {
    throw ModelError("action table does not cover the state space");
  }
  m.action_offset.assign(1, 0);
  for (const auto& list : m.actions) {
    m.action_offset.push_back(m.action_offset.back() + static_cast<Index>(list.size()));
  }
  const Index slots = m.num_action_slots();
  if (static_cast<Index>(m.kernel.size()) != m.horizon * slots) {
    throw ModelError("kernel table does not cover every (t, x, u)");
  }
  if (static_cast<Index>(m.running.size()) != m.horizon * m.horizon ||
      static_cast<Index>(m.terminal.size()) != m.horizon) {
    throw ModelError("cost tables do not match the horizon");
  }
  for (const auto& f : m.running) {
    if (f.size() != slots) throw ModelError("running cost table does not cover every (x, u)");
  }
  for (const auto& g : m.terminal) {
    if (g.size() != n) throw ModelError("terminal cost table does not cover every state");
  }
  for (auto& e : m.kernel) {
    for (const auto& term : e.terms) {
      if (term.z < 0 || term.z >= n) throw ModelError("kernel term targets a state outside the truncation");
      if (term.z == e.remainder) throw ModelError("kernel remainder state may not also carry explicit terms");
      if (!(term.rate >= 0.0)) throw ModelError("kernel term rate must be non-negative");
    }
    if (e.remainder >= n) throw ModelError("kernel remainder state outside the truncation");
    for (const auto& row : e.rows) {
      if (row.q.size() != n) throw ModelError("tabulated kernel row has the wrong length");
    }
    if (e.rate.size() != 0 && e.rate.size() != n) throw ModelError("rate function row has the wrong length");
    derive_rate(e, m.mode, n);
  }
}

Vector kernel_at(const ModelSpec& m, double eps, int t, Index x, Index u) {
  if (!(eps > 0.0)) throw ModelError("epsilon must be positive");
  const KernelEntry& e = m.entry(t, x, u);
  const Index n = m.num_states();
  if (m.mode == KernelMode::Tabulated) {
    const TabulatedRow* fallback = nullptr;
    for (const auto& row : e.rows) {
      if (!row.eps) {
        fallback = &row;
      } else if (eps_matches(*row.eps, eps)) {
        return row.q;
      }
    }
    if (fallback) return fallback->q;
    throw KernelError("no tabulated kernel row at eps=" + fmt_real(eps) + " for " + where(m, t, x, u));
  }

  Vector q = Vector::Zero(n);
  for (const auto& term : e.terms) {
    if (term.rate == kInf) continue;
    q(term.z) += term.weight * std::exp(-term.rate / eps);
  }
  if (e.remainder >= 0) {
    double listed = 0.0;
    for (Index z = 0; z < n; ++z) listed += q(z);
    q(e.remainder) = 1.0 - listed;
  } else {
    double total = 0.0;
    for (Index z = 0; z < n; ++z) total += q(z);
    if (std::abs(total - 1.0) > 1e-12) {
      throw KernelError("kernel row does not sum to 1 at eps=" + fmt_real(eps) + " for " + where(m, t, x, u));
    }
  }
  for (Index z = 0; z < n; ++z) {
    if (q(z) < 0.0) {
      throw KernelError("negative transition mass " + fmt_real(q(z)) + " into state " +
                        std::to_string(m.states.labels[static_cast<std::size_t>(z)]) + " at eps=" +
                        fmt_real(eps) + " for " + where(m, t, x, u) +
                        "; eps exceeds the model's validity threshold");
    }
  }
  return q;
}

Vector log_kernel_at(const ModelSpec& m, double eps, int t, Index x, Index u) {
  const Vector q = kernel_at(m, eps, t, x, u);  // validates the row
  const Index n = m.num_states();
  Vector log_q(n);
  for (Index z = 0; z < n; ++z) log_q(z) = q(z) > 0.0 ? std::log(q(z)) : -kInf;
  if (m.mode == KernelMode::Tabulated) return log_q;

  // log sum_k a_k exp(-r_k/eps) = -r_min/eps + log sum_k a_k exp(-(r_k - r_min)/eps)
  const KernelEntry& e = m.entry(t, x, u);
  Vector min_rate = Vector::Constant(n, kInf);
  for (const auto& term : e.terms) {
    if (term.rate != kInf && term.weight != 0.0) min_rate(term.z) = std::min(min_rate(term.z), term.rate);
  }
  Vector scaled = Vector::Zero(n);
  for (const auto& term : e.terms) {
    if (term.rate == kInf || term.weight == 0.0) continue;
    scaled(term.z) += term.weight * std::exp(-(term.rate - min_rate(term.z)) / eps);
  }
  for (Index z = 0; z < n; ++z) {
    if (z == e.remainder || min_rate(z) == kInf) continue;
    log_q(z) = scaled(z) > 0.0 ? std::log(scaled(z)) - min_rate(z) / eps : -kInf;
  }
  return log_q;
}

const Vector& rate_at(const ModelSpec& m, int t, Index x, Index u) {
  const KernelEntry& e = m.entry(t, x, u);
  if (e.rate.size() == 0) throw ModelError("no rate function for " + where(m, t, x, u));
  return e.rate;
}

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Vacuous: return "vacuous";
  }
  return "fail";
}

bool ValidationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == CheckStatus::Fail; });
}

ValidationReport validate_assumptions(const ModelSpec& m, const std::vector<double>& eps_grid) {
  const Index n = m.num_states();
  if (n == 0) throw ModelError("state space is empty");

  ValidationReport report;
  report.eps_grid = eps_grid;
  report.truncation = m.truncation;

  auto finish = [&report](Check c) {
    if (!c.failures.empty()) c.status = CheckStatus::Fail;
    report.checks.push_back(std::move(c));
  };

  Check actions{"action_sets", CheckStatus::Pass, "every state has a non-empty duplicate-free action list", {}};
  for (Index x = 0; x < n; ++x) {
    const auto& list = m.actions[static_cast<std::size_t>(x)];
    const std::string label = std::to_string(m.states.labels[static_cast<std::size_t>(x)]);
    if (list.empty()) actions.failures.push_back("state " + label + " has no actions");
    std::set<std::string> seen;
    for (const auto& a : list) {
      if (!seen.insert(a.label).second) actions.failures.push_back("state " + label + " repeats action " + a.label);
    }
  }
  const bool actions_ok = actions.failures.empty();
  finish(std::move(actions));

  Check lyap{"lyapunov_positive", CheckStatus::Pass, "V(x) > 0 on the truncation", {}};
  for (Index x = 0; x < n; ++x) {
    const double v = m.states.lyapunov(x);
    if (!(v > 0.0) || !std::isfinite(v)) {
      lyap.failures.push_back("V(" + std::to_string(m.states.labels[static_cast<std::size_t>(x)]) +
                              ") = " + fmt_real(v));
    }
  }
  finish(std::move(lyap));

  Check costs{"costs_finite", CheckStatus::Pass, "running and terminal costs finite, hence bounded below", {}};
  for (int tau = 1; tau <= m.horizon; ++tau) {
    for (int t = 1; t <= m.horizon; ++t) {
      if (!m.running[static_cast<std::size_t>((tau - 1) * m.horizon + (t - 1))].allFinite()) {
        costs.failures.push_back("f_{" + std::to_string(tau) + "," + std::to_string(t) + "} not finite");
      }
    }
    if (!m.terminal_cost(tau).allFinite()) costs.failures.push_back("g_" + std::to_string(tau) + " not finite");
  }
  finish(std::move(costs));

  Check norm{"kernel_normalization", CheckStatus::Pass,
             "q >= 0 and rows sum to 1 within 1e-12 at every grid eps", {}};
  Check rate_nonneg{"rate_nonnegative", CheckStatus::Pass, "I_t(z; x, u) >= 0", {}};
  Check rate_inf{"rate_infimum_zero", CheckStatus::Pass, "inf_z I_t(z; x, u) = 0", {}};
  if (actions_ok) {
    for (int t = 1; t <= m.horizon; ++t) {
      for (Index x = 0; x < n; ++x) {
        for (Index u = 0; u < m.num_actions(x); ++u) {
          for (double eps : eps_grid) {
            try {
              const Vector q = kernel_at(m, eps, t, x, u);
              double total = 0.0;
              for (Index z = 0; z < n; ++z) total += q(z);
              if ((q.array() < 0.0).any()) {
                norm.failures.push_back("negative probability at eps=" + fmt_real(eps) + " " + where(m, t, x, u));
              }
              if (std::abs(total - 1.0) > 1e-12) {
                norm.failures.push_back("row sum " + fmt_real(total) + " at eps=" + fmt_real(eps) + " " +
                                        where(m, t, x, u));
              }
            } catch (const KernelError& err) {
              norm.failures.emplace_back(err.what());
            }
          }
          const Vector& rate = m.entry(t, x, u).rate;
          if (rate.size() == 0) {
            rate_inf.failures.push_back("no rate function " + where(m, t, x, u));
            continue;
          }
          if ((rate.array() < 0.0).any() || rate.hasNaN()) {
            rate_nonneg.failures.push_back("negative rate " + where(m, t, x, u));
          }
          if (!(rate.minCoeff() == 0.0)) {
            rate_inf.failures.push_back("inf I = " + fmt_real(rate.minCoeff()) + " " + where(m, t, x, u));
          }
        }
      }
    }
  } else {
    norm.failures.emplace_back("skipped: action sets malformed");
  }
  finish(std::move(norm));
  finish(std::move(rate_nonneg));
  finish(std::move(rate_inf));

  report.checks.push_back({"growth_conditions", CheckStatus::Vacuous,
                           "Lyapunov drift and cost growth bounds hold trivially on a finite truncation; "
                           "their constants are not computed",
                           {}});
  report.checks.push_back({"truncation", CheckStatus::Pass,
                           "finite window declared as '" + m.truncation + "'; rows are stochastic on the window",
                           {}});
  return report;
}

}  // namespace tirs
