#pragma once

// JSON and CSV encodings for models, solutions and reports. Key order is
// fixed; +/-inf is written as the strings "inf" / "-inf".

#include "tirs/convergence.hpp"
#include "tirs/equilibrium.hpp"
#include "tirs/model.hpp"
#include "tirs/operators.hpp"

#include <json.hpp>

#include <string>

namespace tirs::io {

using Json = nlohmann::ordered_json;

Json real_to_json(double v);
/// Accepts numbers and the strings "inf", "+inf", "-inf".
double real_from_json(const Json& j);

/// Parses a model document. Throws ModelError on schema violations.
ModelSpec model_from_json(const Json& doc);
Json model_to_json(const ModelSpec& model);

ModelSpec read_model_file(const std::string& path);

Json validation_to_json(const ValidationReport& report);
Json solution_to_json(const ModelSpec& model, const EquilibriumSolution& sol);
/// Reads regime, policy and Theta back; diagnostics and ties are dropped.
EquilibriumSolution solution_from_json(const ModelSpec& model, const Json& doc);
std::string theta_csv(const ModelSpec& model, const EquilibriumSolution& sol);

Json deviation_to_json(const ModelSpec& model, const DeviationReport& report);
std::string deviation_csv(const ModelSpec& model, const DeviationReport& report);

Json gap_to_json(const ModelSpec& model, const GapReport& report);
std::string gap_csv(const ModelSpec& model, const GapReport& report);

Json sweep_to_json(const SweepResult& result);
/// One row per (eps, tau, t).
std::string sweep_csv(const SweepResult& result);
/// One row per eps, one column per (tau, t).
std::string sweep_plot_csv(const SweepResult& result);

Json trace_to_json(const ModelSpec& model, const OpTrace& ev);

/// Decimal text with 17 significant digits.
std::string format_real(double v);

/// Writes via a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace tirs::io
