#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "permadde/model.hpp"

namespace permadde {

/// Named parameter lists; scalars are one-element lists.
using PresetParams = std::map<std::string, std::vector<double>>;

/// Known families:
///   bastinec-quadratic   sum_k alpha_k(t) x(t - tau_k(t)) - beta(t) x^2
///   bastinec-constant    rho(t) [ sum_k alpha_k x(t - tau_k(t)) - beta x^2 ]
///   bh-logistic          sum_k alpha_k y_k / (1 + beta_k y_k) - mu(t) x - kappa(t) x^2
///   arino                one Beverton-Holt term rescaled from (gamma, mu, kappa, tau)
///   nicholson            -d(t) x + sum_k beta_k(t) y_k e^{-y_k}
///   nicholson-autonomous constant-coefficient version of the above
///
/// Sinusoidal coefficients are written as `<name>` (mean) and `<name>_amp`
/// with angular frequency `omega`; lags as `tau` and `tau_amp` with
/// frequency `tau_omega`. Throws UnknownPreset or BadParams.
ModelSpec preset(std::string_view name, const PresetParams& params);

struct PresetRef {
  std::string name;
  PresetParams params;
};

/// Parses `name?p=v&q=v1,v2` (optionally prefixed by `preset:`).
PresetRef parse_preset_ref(std::string_view text);

std::vector<std::string> preset_names();

}  // namespace permadde
