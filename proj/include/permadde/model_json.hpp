#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "permadde/model.hpp"

namespace permadde {

/// Model documents:
///
///   {
///     "rho": <TimeFunction>,                      (optional, default constant 1)
///     "recruitment": [ { "kind": "linear" | "beverton-holt" | "ricker" | "capped-ricker",
///                        "alpha": <TimeFunction>,
///                        "beta": <TimeFunction>,  (beverton-holt only)
///                        "delay": [ { "lag": <TimeFunction>, "weight": w }, ... ] } ],
///     "mortality": { "mu": <TimeFunction>, "kappa": <TimeFunction> },
///     "tau_max": number
///   }
///
///   TimeFunction: { "kind": "constant" | "sinusoid" | "piecewise-linear",
///                   "params": {"value"} | {"a","b","omega","phase"} | {"knots": [[t,v],...]},
///                   "inf", "sup", "tail_liminf", "tail_limsup" }
///
/// The four extrema are optional on input and re-derived from the shape when
/// absent; a bare number is accepted as a constant. Unknown keys are rejected
/// with ParseError.
nlohmann::json to_json(const TimeFunction& f);
TimeFunction time_function_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& j);

/// Reads a model document from disk; ParseError on malformed JSON.
ModelSpec load_model(const std::filesystem::path& path);
void save_model(const ModelSpec& model, const std::filesystem::path& path);

/// History specs on the command line:
///   const:<c>
///   sin:<a>,<b>,<omega>,<phase>[,clip]
///   table:<path>        two-column CSV of theta,value
HistorySpec parse_history(std::string_view text);

}  // namespace permadde
