#include "tirs/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

namespace tirs::io {

namespace {

long label_at(const ModelSpec& m, Index x) { return m.states.labels[static_cast<std::size_t>(x)]; }

const std::string& action_label(const ModelSpec& m, Index x, Index u) {
  return m.actions[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)].label;
}

const Json& require(const Json& obj, const char* key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key)) throw ModelError(context + ": missing key '" + key + "'");
  return obj.at(key);
}

long as_label(const Json& j, const std::string& context) {
  if (j.is_number_integer()) return j.get<long>();
  if (j.is_string()) {
    try {
      std::size_t pos = 0;
      const std::string s = j.get<std::string>();
      const long v = std::stol(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw ModelError(context + ": state label must be an integer");
}

std::string as_action(const Json& j, const std::string& context) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long>());
  throw ModelError(context + ": action label must be a string");
}

int as_step(const Json& j, int lo, int hi, const std::string& context) {
  if (!j.is_number_integer()) throw ModelError(context + ": step index must be an integer");
  const int v = j.get<int>();
  if (v < lo || v > hi) throw ModelError(context + ": step index " + std::to_string(v) + " out of range");
  return v;
}

Vector vector_from_json(const Json& j, Index n, const std::string& context) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n) {
    throw ModelError(context + ": expected an array of length " + std::to_string(n));
  }
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = real_from_json(j[static_cast<std::size_t>(i)]);
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(real_to_json(v(i)));
  return out;
}

// Expands optional wildcard keys into the list of matching indices.
std::vector<int> steps_matching(const Json& e, const char* key, int horizon, const std::string& context) {
  if (!e.contains(key)) {
    std::vector<int> all(static_cast<std::size_t>(horizon));
    for (int i = 0; i < horizon; ++i) all[static_cast<std::size_t>(i)] = i + 1;
    return all;
  }
  return {as_step(e.at(key), 1, horizon, context)};
}

std::vector<Index> states_matching(const ModelSpec& m, const Json& e, const std::string& context) {
  if (!e.contains("x")) {
    std::vector<Index> all(static_cast<std::size_t>(m.num_states()));
    for (Index x = 0; x < m.num_states(); ++x) all[static_cast<std::size_t>(x)] = x;
    return all;
  }
  try {
    return {m.states.index_of(as_label(e.at("x"), context))};
  } catch (const ModelError& err) {
    throw ModelError(context + ": " + err.what());
  }
}

std::vector<Index> actions_matching(const ModelSpec& m, Index x, const Json& e, const std::string& context) {
  if (!e.contains("u")) {
    std::vector<Index> all(static_cast<std::size_t>(m.num_actions(x)));
    for (Index u = 0; u < m.num_actions(x); ++u) all[static_cast<std::size_t>(u)] = u;
    return all;
  }
  try {
    return {m.action_index(x, as_action(e.at("u"), context))};
  } catch (const ModelError& err) {
    throw ModelError(context + ": " + err.what());
  }
}

KernelEntry parse_kernel_entry(const ModelSpec& m, const Json& e, const std::string& context) {
  KernelEntry out;
  const Index n = m.num_states();
  if (m.mode == KernelMode::RateParameterized) {
    if (e.contains("remainder")) out.remainder = m.states.index_of(as_label(e.at("remainder"), context));
    if (e.contains("terms")) {
      for (const auto& term : e.at("terms")) {
        out.terms.push_back({m.states.index_of(as_label(require(term, "z", context), context)),
                             real_from_json(require(term, "a", context)), real_from_json(require(term, "r", context))});
      }
    }
    if (out.terms.empty() && out.remainder < 0) throw ModelError(context + ": rate entry needs terms or a remainder");
  } else {
    for (const auto& row : require(e, "rows", context)) {
      TabulatedRow r;
      const Json& eps = require(row, "eps", context);
      if (!(eps.is_string() && eps.get<std::string>() == "*")) r.eps = real_from_json(eps);
      r.q = vector_from_json(require(row, "q", context), n, context + " row");
      out.rows.push_back(std::move(r));
    }
  }
  if (e.contains("rates")) out.rate = vector_from_json(e.at("rates"), n, context + " rates");
  return out;
}

void parse_running(ModelSpec& m, const Json& list, std::vector<char>& covered, bool anchored,
                   const std::function<void(int tau, int t, Index x, Index u, double v)>& put) {
  const int T = m.horizon;
  for (const auto& e : list) {
    const std::string context = "running cost entry";
    const double value = real_from_json(require(e, "value", context));
    if (e.contains("u") && !e.contains("x")) throw ModelError(context + ": 'u' requires 'x'");
    const auto taus = anchored ? steps_matching(e, "tau", T, context) : std::vector<int>{1};
    for (int tau : taus) {
      for (int t : steps_matching(e, "t", T, context)) {
        for (Index x : states_matching(m, e, context)) {
          for (Index u : actions_matching(m, x, e, context)) {
            put(tau, t, x, u, value);
            covered[static_cast<std::size_t>(((tau - 1) * T + (t - 1)) * m.num_action_slots() + m.slot(x, u))] = 1;
          }
        }
      }
    }
  }
}

void parse_terminal(ModelSpec& m, const Json& list, std::vector<char>& covered, bool anchored,
                    const std::function<void(int tau, Index x, double v)>& put) {
  for (const auto& e : list) {
    const std::string context = "terminal cost entry";
    const double value = real_from_json(require(e, "value", context));
    const auto taus = anchored ? steps_matching(e, "tau", m.horizon, context) : std::vector<int>{1};
    for (int tau : taus) {
      for (Index x : states_matching(m, e, context)) {
        put(tau, x, value);
        covered[static_cast<std::size_t>((tau - 1) * m.num_states() + x)] = 1;
      }
    }
  }
}

Json policy_to_json(const ModelSpec& m, const Policy& pi) {
  Json out = Json::array();
  for (int t = 1; t <= pi.horizon(); ++t) {
    Json row = Json::array();
    for (Index x = 0; x < m.num_states(); ++x) row.push_back(action_label(m, x, pi(t, x)));
    out.push_back(std::move(row));
  }
  return out;
}

Json regime_to_json(Regime r) { return r.is_limit() ? Json("limit") : real_to_json(r.eps()); }

std::string cell(double v) { return format_real(v); }

}  // namespace

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Json real_to_json(double v) {
  if (std::isinf(v)) return Json(v > 0 ? "inf" : "-inf");
  if (std::isnan(v)) throw ModelError("cannot serialize NaN");
  return Json(v);
}

double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ModelError("expected a real number or \"inf\", got " + j.dump());
}

ModelSpec model_from_json(const Json& doc) {
  if (!doc.is_object()) throw ModelError("model document must be a JSON object");
  const int horizon = as_step(require(doc, "horizon", "model"), 1, 1 << 20, "horizon");

  StateSpace states;
  const Json& state_list = require(doc, "states", "model");
  if (!state_list.is_array() || state_list.empty()) throw ModelError("state space is empty");
  states.lyapunov.resize(static_cast<Index>(state_list.size()));
  for (std::size_t i = 0; i < state_list.size(); ++i) {
    states.labels.push_back(as_label(require(state_list[i], "label", "state"), "state"));
    states.lyapunov(static_cast<Index>(i)) = real_from_json(require(state_list[i], "lyapunov", "state"));
  }

  std::vector<std::vector<Action>> actions(states.labels.size());
  const Json& action_map = require(doc, "actions", "model");
  if (!action_map.is_object()) throw ModelError("actions must map state labels to action lists");
  for (const auto& [key, list] : action_map.items()) {
    const Index x = states.index_of(as_label(Json(key), "actions"));
    for (const auto& a : list) {
      if (a.is_object()) {
        Action act{as_action(require(a, "label", "action"), "action"), Vector()};
        if (a.contains("payload")) {
          const Json& p = a.at("payload");
          act.payload = vector_from_json(p, static_cast<Index>(p.size()), "action payload");
        }
        actions[static_cast<std::size_t>(x)].push_back(std::move(act));
      } else {
        actions[static_cast<std::size_t>(x)].push_back({as_action(a, "action"), Vector()});
      }
    }
  }

  const Json& kernel = require(doc, "kernel", "model");
  const std::string mode_name = require(kernel, "mode", "kernel").get<std::string>();
  KernelMode mode;
  if (mode_name == "rate-parameterized") {
    mode = KernelMode::RateParameterized;
  } else if (mode_name == "tabulated") {
    mode = KernelMode::Tabulated;
  } else {
    throw ModelError("kernel mode must be 'rate-parameterized' or 'tabulated'");
  }

  ModelSpec m = make_model_shell(horizon, std::move(states), std::move(actions), mode);
  if (doc.contains("name")) m.name = doc.at("name").get<std::string>();

  const Index slots = m.num_action_slots();
  std::vector<char> kernel_covered(static_cast<std::size_t>(horizon * slots), 0);
  for (const auto& e : require(kernel, "entries", "kernel")) {
    const std::string context = "kernel entry";
    if (!e.contains("x") || !e.contains("u")) throw ModelError(context + ": 'x' and 'u' are required");
    for (int t : steps_matching(e, "t", horizon, context)) {
      for (Index x : states_matching(m, e, context)) {
        for (Index u : actions_matching(m, x, e, context)) {
          m.entry(t, x, u) = parse_kernel_entry(m, e, context);
          kernel_covered[static_cast<std::size_t>((t - 1) * slots + m.slot(x, u))] = 1;
        }
      }
    }
  }
  for (int t = 1; t <= horizon; ++t) {
    for (Index x = 0; x < m.num_states(); ++x) {
      for (Index u = 0; u < m.num_actions(x); ++u) {
        if (!kernel_covered[static_cast<std::size_t>((t - 1) * slots + m.slot(x, u))]) {
          throw ModelError("kernel entry missing for (t=" + std::to_string(t) + ", x=" +
                           std::to_string(label_at(m, x)) + ", u=" + action_label(m, x, u) + ")");
        }
      }
    }
  }

  std::vector<char> running_covered(static_cast<std::size_t>(horizon * horizon * slots), 0);
  std::vector<char> terminal_covered(static_cast<std::size_t>(horizon * m.num_states()), 0);
  const bool discounted = doc.contains("discounting");
  if (discounted && doc.contains("costs")) throw ModelError("give either 'costs' or 'discounting', not both");
  if (discounted) {
    const Json& d = doc.at("discounting");
    if (require(d, "form", "discounting").get<std::string>() != "exponential") {
      throw ModelError("discounting form must be 'exponential'");
    }
    const double lambda = real_from_json(require(d, "lambda", "discounting"));
    if (!(lambda > 0.0 && lambda < 1.0)) throw ModelError("discount factor must lie in (0, 1)");
    const Json& base = require(d, "base_cost", "discounting");
    std::vector<Vector> base_running(static_cast<std::size_t>(horizon), Vector::Zero(slots));
    Vector base_terminal = Vector::Zero(m.num_states());
    parse_running(m, require(base, "running", "base_cost"), running_covered, false,
                  [&](int, int t, Index x, Index u, double v) { base_running[static_cast<std::size_t>(t - 1)](m.slot(x, u)) = v; });
    parse_terminal(m, require(base, "terminal", "base_cost"), terminal_covered, false,
                   [&](int, Index x, double v) { base_terminal(x) = v; });
    // base tables are anchor-free; mark every anchor covered from tau = 1
    for (int tau = 2; tau <= horizon; ++tau) {
      std::copy_n(running_covered.begin(), horizon * slots, running_covered.begin() + (tau - 1) * horizon * slots);
      std::copy_n(terminal_covered.begin(), m.num_states(), terminal_covered.begin() + (tau - 1) * m.num_states());
    }
    for (int tau = 1; tau <= horizon; ++tau) {
      for (int t = 1; t <= horizon; ++t) {
        m.running[static_cast<std::size_t>((tau - 1) * horizon + (t - 1))] =
            std::pow(lambda, t - tau) * base_running[static_cast<std::size_t>(t - 1)];
      }
      m.terminal[static_cast<std::size_t>(tau - 1)] = std::pow(lambda, horizon + 1 - tau) * base_terminal;
    }
  } else {
    const Json& costs = require(doc, "costs", "model");
    parse_running(m, require(costs, "running", "costs"), running_covered, true,
                  [&](int tau, int t, Index x, Index u, double v) {
                    m.running[static_cast<std::size_t>((tau - 1) * horizon + (t - 1))](m.slot(x, u)) = v;
                  });
    parse_terminal(m, require(costs, "terminal", "costs"), terminal_covered, true,
                   [&](int tau, Index x, double v) { m.terminal[static_cast<std::size_t>(tau - 1)](x) = v; });
  }
  if (std::find(running_covered.begin(), running_covered.end(), 0) != running_covered.end()) {
    throw ModelError("running cost missing for some (tau, t, x, u)");
  }
  if (std::find(terminal_covered.begin(), terminal_covered.end(), 0) != terminal_covered.end()) {
    throw ModelError("terminal cost missing for some (tau, x)");
  }

  if (doc.contains("tolerances")) {
    const Json& tol = doc.at("tolerances");
    if (tol.contains("sweep_final")) m.tolerances.sweep_final = real_from_json(tol.at("sweep_final"));
    if (tol.contains("limit_consistency")) m.tolerances.limit_consistency = real_from_json(tol.at("limit_consistency"));
  }
  if (doc.contains("truncation")) m.truncation = doc.at("truncation").get<std::string>();
  if (doc.contains("notes")) {
    for (const auto& note : doc.at("notes")) m.notes.push_back(note.get<std::string>());
  }
  finalize_model(m);
  return m;
}

Json model_to_json(const ModelSpec& m) {
  Json doc;
  doc["name"] = m.name;
  doc["horizon"] = m.horizon;
  Json states = Json::array();
  for (Index x = 0; x < m.num_states(); ++x) {
    states.push_back(Json{{"label", label_at(m, x)}, {"lyapunov", real_to_json(m.states.lyapunov(x))}});
  }
  doc["states"] = std::move(states);

  Json actions = Json::object();
  for (Index x = 0; x < m.num_states(); ++x) {
    Json list = Json::array();
    for (const auto& a : m.actions[static_cast<std::size_t>(x)]) {
      if (a.payload.size() == 0) {
        list.push_back(a.label);
      } else {
        list.push_back(Json{{"label", a.label}, {"payload", vector_to_json(a.payload)}});
      }
    }
    actions[std::to_string(label_at(m, x))] = std::move(list);
  }
  doc["actions"] = std::move(actions);

  Json entries = Json::array();
  for (int t = 1; t <= m.horizon; ++t) {
    for (Index x = 0; x < m.num_states(); ++x) {
      for (Index u = 0; u < m.num_actions(x); ++u) {
        const KernelEntry& e = m.entry(t, x, u);
        Json j;
        j["t"] = t;
        j["x"] = label_at(m, x);
        j["u"] = action_label(m, x, u);
        if (m.mode == KernelMode::RateParameterized) {
          if (e.remainder >= 0) j["remainder"] = label_at(m, e.remainder);
          Json terms = Json::array();
          for (const auto& term : e.terms) {
            terms.push_back(Json{{"z", label_at(m, term.z)}, {"a", real_to_json(term.weight)}, {"r", real_to_json(term.rate)}});
          }
          j["terms"] = std::move(terms);
        } else {
          Json rows = Json::array();
          for (const auto& row : e.rows) {
            rows.push_back(Json{{"eps", row.eps ? real_to_json(*row.eps) : Json("*")}, {"q", vector_to_json(row.q)}});
          }
          j["rows"] = std::move(rows);
        }
        if (e.rate.size() != 0) j["rates"] = vector_to_json(e.rate);
        entries.push_back(std::move(j));
      }
    }
  }
  doc["kernel"] = Json{{"mode", m.mode == KernelMode::RateParameterized ? "rate-parameterized" : "tabulated"},
                       {"entries", std::move(entries)}};

  Json running = Json::array();
  for (int tau = 1; tau <= m.horizon; ++tau) {
    for (int t = 1; t <= m.horizon; ++t) {
      for (Index x = 0; x < m.num_states(); ++x) {
        for (Index u = 0; u < m.num_actions(x); ++u) {
          running.push_back(Json{{"tau", tau},
                                 {"t", t},
                                 {"x", label_at(m, x)},
                                 {"u", action_label(m, x, u)},
                                 {"value", real_to_json(m.running_cost(tau, t, x, u))}});
        }
      }
    }
  }
  Json terminal = Json::array();
  for (int tau = 1; tau <= m.horizon; ++tau) {
    for (Index x = 0; x < m.num_states(); ++x) {
      terminal.push_back(Json{{"tau", tau}, {"x", label_at(m, x)}, {"value", real_to_json(m.terminal_cost(tau)(x))}});
    }
  }
  doc["costs"] = Json{{"running", std::move(running)}, {"terminal", std::move(terminal)}};
  doc["tolerances"] = Json{{"sweep_final", real_to_json(m.tolerances.sweep_final)},
                           {"limit_consistency", real_to_json(m.tolerances.limit_consistency)}};
  doc["truncation"] = m.truncation;
  doc["notes"] = m.notes;
  return doc;
}

ModelSpec read_model_file(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& err) {
    throw ModelError("model file " + path + " is not valid JSON: " + err.what());
  }
  try {
    return model_from_json(doc);
  } catch (const Json::exception& err) {
    throw ModelError("model file " + path + " violates the schema: " + err.what());
  }
}

Json validation_to_json(const ValidationReport& report) {
  Json doc;
  Json grid = Json::array();
  for (double e : report.eps_grid) grid.push_back(real_to_json(e));
  doc["eps_grid"] = std::move(grid);
  doc["truncation"] = report.truncation;
  doc["passed"] = report.passed();
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(Json{{"name", c.name}, {"status", to_string(c.status)}, {"note", c.note}, {"failures", c.failures}});
  }
  doc["checks"] = std::move(checks);
  return doc;
}

Json solution_to_json(const ModelSpec& m, const EquilibriumSolution& sol) {
  Json doc;
  doc["model"] = m.name;
  doc["regime"] = regime_to_json(sol.regime);
  doc["horizon"] = m.horizon;
  Json labels = Json::array();
  for (long l : m.states.labels) labels.push_back(l);
  doc["states"] = std::move(labels);
  doc["policy"] = policy_to_json(m, sol.policy);
  Json theta = Json::array();
  for (int tau = 1; tau <= m.horizon; ++tau) {
    Json rows = Json::array();
    for (int t = 1; t <= m.horizon + 1; ++t) rows.push_back(vector_to_json(sol.theta.at(tau, t)));
    theta.push_back(std::move(rows));
  }
  doc["theta"] = std::move(theta);
  Json ties = Json::array();
  for (int t = 1; t <= m.horizon; ++t) {
    for (Index x = 0; x < m.num_states(); ++x) {
      const ArgminSet& a = sol.tie(t, x);
      Json members = Json::array();
      for (Index u : a.minimizers) members.push_back(action_label(m, x, u));
      ties.push_back(Json{{"t", t},
                          {"x", label_at(m, x)},
                          {"minimizers", std::move(members)},
                          {"chosen", action_label(m, x, a.chosen)},
                          {"gap", real_to_json(a.gap)}});
    }
  }
  doc["ties"] = std::move(ties);
  doc["diagnostics"] = Json{{"step_seconds", sol.diagnostics.step_seconds},
                            {"tie_counts", sol.diagnostics.tie_counts},
                            {"total_ties", sol.total_ties()}};
  return doc;
}

EquilibriumSolution solution_from_json(const ModelSpec& m, const Json& doc) {
  try {
    EquilibriumSolution sol;
    const Json& regime = require(doc, "regime", "solution");
    sol.regime = regime.is_string() && regime.get<std::string>() == "limit" ? Regime::limit()
                                                                              : Regime::at(real_from_json(regime));
    if (require(doc, "horizon", "solution").get<int>() != m.horizon) {
      throw ModelError("solution horizon does not match the model");
    }
    const Json& policy = require(doc, "policy", "solution");
    if (!policy.is_array() || static_cast<int>(policy.size()) != m.horizon) {
      throw ModelError("solution policy must have one row per step");
    }
    sol.policy = Policy(m.horizon, m.num_states());
    for (int t = 1; t <= m.horizon; ++t) {
      const Json& row = policy[static_cast<std::size_t>(t - 1)];
      if (!row.is_array() || static_cast<Index>(row.size()) != m.num_states()) {
        throw ModelError("solution policy row has the wrong length");
      }
      for (Index x = 0; x < m.num_states(); ++x) {
        sol.policy(t, x) = static_cast<int>(m.action_index(x, as_action(row[static_cast<std::size_t>(x)], "policy")));
      }
    }
    if (doc.contains("theta")) {
      const Json& theta = doc.at("theta");
      if (!theta.is_array() || static_cast<int>(theta.size()) != m.horizon) {
        throw ModelError("solution theta must have one block per anchor");
      }
      sol.theta = ThetaTable(m.horizon, m.num_states());
      for (int tau = 1; tau <= m.horizon; ++tau) {
        const Json& rows = theta[static_cast<std::size_t>(tau - 1)];
        if (!rows.is_array() || static_cast<int>(rows.size()) != m.horizon + 1) {
          throw ModelError("solution theta block has the wrong number of steps");
        }
        for (int t = 1; t <= m.horizon + 1; ++t) {
          sol.theta.at(tau, t) = vector_from_json(rows[static_cast<std::size_t>(t - 1)], m.num_states(), "theta");
        }
      }
    }
    return sol;
  } catch (const Json::exception& err) {
    throw ModelError(std::string("solution document violates the schema: ") + err.what());
  }
}

std::string theta_csv(const ModelSpec& m, const EquilibriumSolution& sol) {
  std::ostringstream os;
  os << "tau,t,x,theta\n";
  for (int tau = 1; tau <= m.horizon; ++tau) {
    for (int t = 1; t <= m.horizon + 1; ++t) {
      for (Index x = 0; x < m.num_states(); ++x) {
        os << tau << ',' << t << ',' << label_at(m, x) << ',' << cell(sol.theta.at(tau, t)(x)) << '\n';
      }
    }
  }
  return os.str();
}

Json deviation_to_json(const ModelSpec& m, const DeviationReport& report) {
  Json doc;
  doc["regime"] = regime_to_json(report.regime);
  doc["tolerance"] = real_to_json(report.tolerance);
  doc["passed"] = report.passed();
  doc["worst_violation"] = real_to_json(report.worst_violation);
  doc["theta_checked"] = report.theta_checked;
  doc["theta_mismatch"] = real_to_json(report.theta_mismatch);
  Json violations = Json::array();
  for (const auto& [t, x] : report.violations) violations.push_back(Json{{"t", t}, {"x", label_at(m, x)}});
  doc["violations"] = std::move(violations);

  // gaps of the off-policy deviations
  std::vector<double> gaps;
  for (const auto& d : report.deviations) {
    if (!d.is_policy_action) gaps.push_back(d.gap());
  }
  std::sort(gaps.begin(), gaps.end());
  Json summary;
  summary["count"] = gaps.size();
  if (!gaps.empty()) {
    summary["min"] = real_to_json(gaps.front());
    summary["median"] = real_to_json(gaps[gaps.size() / 2]);
    summary["max"] = real_to_json(gaps.back());
  }
  doc["gap_summary"] = std::move(summary);

  Json rows = Json::array();
  for (const auto& d : report.deviations) {
    rows.push_back(Json{{"t", d.t},
                        {"x", label_at(m, d.x)},
                        {"u", action_label(m, d.x, d.u)},
                        {"deviation_value", real_to_json(d.deviation_value)},
                        {"policy_value", real_to_json(d.policy_value)},
                        {"gap", real_to_json(d.gap())}});
  }
  doc["deviations"] = std::move(rows);
  return doc;
}

std::string deviation_csv(const ModelSpec& m, const DeviationReport& report) {
  std::ostringstream os;
  os << "t,x,u,deviation_value,policy_value,gap\n";
  for (const auto& d : report.deviations) {
    os << d.t << ',' << label_at(m, d.x) << ',' << action_label(m, d.x, d.u) << ',' << cell(d.deviation_value) << ','
       << cell(d.policy_value) << ',' << cell(d.gap()) << '\n';
  }
  return os.str();
}

Json gap_to_json(const ModelSpec& m, const GapReport& r) {
  Json doc;
  doc["regime"] = regime_to_json(r.regime);
  doc["initial_state"] = label_at(m, r.initial_state);
  doc["policies_enumerated"] = r.policies_enumerated;
  doc["optimal_policy_count"] = r.optimal_policy_count;
  doc["tolerance"] = real_to_json(r.tolerance);
  doc["equilibrium_value"] = real_to_json(r.equilibrium_value);
  doc["precommitment_value"] = real_to_json(r.precommitment_value);
  doc["value_gap"] = real_to_json(r.value_gap);
  doc["time_inconsistent"] = r.time_inconsistent();
  Json cells = Json::array();
  for (const auto& [t, x] : r.differing_cells) {
    cells.push_back(Json{{"t", t},
                         {"x", label_at(m, x)},
                         {"equilibrium", action_label(m, x, r.equilibrium_policy(t, x))},
                         {"precommitment", action_label(m, x, r.precommitment_policy(t, x))}});
  }
  doc["differing_cells"] = std::move(cells);
  doc["equilibrium_policy"] = policy_to_json(m, r.equilibrium_policy);
  doc["precommitment_policy"] = policy_to_json(m, r.precommitment_policy);
  Json values = Json::array();
  for (std::size_t s = 0; s < r.equilibrium_values.size(); ++s) {
    values.push_back(Json{{"t", s + 1},
                          {"equilibrium", vector_to_json(r.equilibrium_values[s])},
                          {"precommitment", vector_to_json(r.precommitment_values[s])}});
  }
  doc["anchor1_values"] = std::move(values);
  return doc;
}

std::string gap_csv(const ModelSpec& m, const GapReport& r) {
  std::ostringstream os;
  os << "t,x,equilibrium_action,precommitment_action,equilibrium_value,precommitment_value\n";
  for (int t = 1; t <= m.horizon; ++t) {
    for (Index x = 0; x < m.num_states(); ++x) {
      os << t << ',' << label_at(m, x) << ',' << action_label(m, x, r.equilibrium_policy(t, x)) << ','
         << action_label(m, x, r.precommitment_policy(t, x)) << ','
         << cell(r.equilibrium_values[static_cast<std::size_t>(t - 1)](x)) << ','
         << cell(r.precommitment_values[static_cast<std::size_t>(t - 1)](x)) << '\n';
    }
  }
  return os.str();
}

Json sweep_to_json(const SweepResult& r) {
  auto matrix = [](const Eigen::MatrixXd& mat) {
    Json out = Json::array();
    for (Index i = 0; i < mat.rows(); ++i) {
      Json row = Json::array();
      for (Index j = 0; j < mat.cols(); ++j) row.push_back(real_to_json(mat(i, j)));
      out.push_back(std::move(row));
    }
    return out;
  };
  Json doc;
  doc["horizon"] = r.horizon;
  doc["tolerance"] = real_to_json(r.tolerance);
  doc["limit_tie_count"] = r.limit_tie_count;
  doc["passed"] = r.passed();
  doc["distances_converged"] = r.distances_converged();
  doc["policy_converged"] = r.policy_converged();
  Json monotone = Json::array();
  for (Index i = 0; i < r.monotone.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < r.monotone.cols(); ++j) row.push_back(static_cast<bool>(r.monotone(i, j)));
    monotone.push_back(std::move(row));
  }
  doc["eventually_nonincreasing"] = std::move(monotone);
  doc["final_distance"] = matrix(r.final_distance);
  Json points = Json::array();
  for (const auto& p : r.points) {
    points.push_back(Json{{"eps", real_to_json(p.eps)},
                          {"distance", matrix(p.distance)},
                          {"policy_agreement", real_to_json(p.policy_agreement)},
                          {"tie_count", p.tie_count}});
  }
  doc["points"] = std::move(points);
  return doc;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "eps,tau,t,w_distance,policy_agreement,tie_count\n";
  for (const auto& p : r.points) {
    for (int tau = 1; tau <= r.horizon; ++tau) {
      for (int t = 1; t <= r.horizon; ++t) {
        os << cell(p.eps) << ',' << tau << ',' << t << ',' << cell(p.distance(tau - 1, t - 1)) << ','
           << cell(p.policy_agreement) << ',' << p.tie_count << '\n';
      }
    }
  }
  return os.str();
}

std::string sweep_plot_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "eps";
  for (int tau = 1; tau <= r.horizon; ++tau) {
    for (int t = 1; t <= r.horizon; ++t) os << ",w_tau" << tau << "_t" << t;
  }
  os << '\n';
  for (const auto& p : r.points) {
    os << cell(p.eps);
    for (int tau = 1; tau <= r.horizon; ++tau) {
      for (int t = 1; t <= r.horizon; ++t) os << ',' << cell(p.distance(tau - 1, t - 1));
    }
    os << '\n';
  }
  return os.str();
}

Json trace_to_json(const ModelSpec& m, const OpTrace& ev) {
  return Json{{"op", "hamiltonian"},
              {"regime", regime_to_json(ev.regime)},
              {"tau", ev.tau},
              {"t", ev.t},
              {"x", label_at(m, ev.x)},
              {"u", action_label(m, ev.x, ev.u)},
              {"value", real_to_json(ev.value)}};
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace tirs::io
