#include "permadde/presets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>

#include "permadde/error.hpp"

namespace permadde {

namespace {

class Params {
public:
  Params(std::string_view family, const PresetParams& p, std::set<std::string> allowed)
      : family_(family), p_(p) {
    for (const auto& [key, values] : p_) {
      if (!allowed.count(key)) {
        throw Error(ErrorCode::BadParams,
                    "preset " + family_ + " has no parameter '" + key + "'");
      }
      if (values.empty()) throw Error(ErrorCode::BadParams, "parameter '" + key + "' is empty");
      for (double v : values) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::BadParams, "parameter '" + key + "' must be finite");
        }
      }
    }
  }

  bool has(const std::string& key) const { return p_.count(key) != 0; }

  double scalar(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    auto it = p_.find(key);
    if (it == p_.end()) {
      if (fallback) return *fallback;
      throw Error(ErrorCode::BadParams, "preset " + family_ + " requires '" + key + "'");
    }
    if (it->second.size() != 1) {
      throw Error(ErrorCode::BadParams, "parameter '" + key + "' must be a scalar");
    }
    return it->second.front();
  }

  /// List of length m; a single value is broadcast.
  std::vector<double> list(const std::string& key, std::size_t m,
                           std::optional<double> fallback = std::nullopt) const {
    auto it = p_.find(key);
    if (it == p_.end()) {
      if (fallback) return std::vector<double>(m, *fallback);
      throw Error(ErrorCode::BadParams, "preset " + family_ + " requires '" + key + "'");
    }
    if (it->second.size() == 1) return std::vector<double>(m, it->second.front());
    if (it->second.size() != m) {
      throw Error(ErrorCode::BadParams, "parameter '" + key + "' has " +
                                            std::to_string(it->second.size()) +
                                            " entries, expected " + std::to_string(m));
    }
    return it->second;
  }

  /// Term count: explicit `m`, else the longest of the given list parameters.
  std::size_t count(std::initializer_list<const char*> keys) const {
    std::size_t m = 1;
    for (const char* k : keys) {
      if (auto it = p_.find(k); it != p_.end()) m = std::max(m, it->second.size());
    }
    if (has("m")) {
      double mv = scalar("m");
      if (mv < 1.0 || mv != std::floor(mv) || mv > 64.0) {
        throw Error(ErrorCode::BadParams, "m must be an integer in [1, 64]");
      }
      auto mm = static_cast<std::size_t>(mv);
      if (m > 1 && mm != m) throw Error(ErrorCode::BadParams, "m disagrees with list lengths");
      m = mm;
    }
    return m;
  }

  const std::string& family() const { return family_; }

private:
  std::string family_;
  const PresetParams& p_;
};

TimeFunction coefficient(double mean, double amp, double omega) {
  if (amp == 0.0) return TimeFunction::constant(mean);
  return TimeFunction::sinusoid(mean, amp, omega);
}

void require_positive_floor(const std::string& what, double mean, double amp) {
  if (!(mean - std::abs(amp) > 0.0)) {
    throw Error(ErrorCode::BadParams, what + " must stay bounded away from zero");
  }
}

void require_nonnegative_floor(const std::string& what, double mean, double amp) {
  if (mean - std::abs(amp) < 0.0) {
    throw Error(ErrorCode::BadParams, what + " must stay nonnegative");
  }
}

struct Lags {
  std::vector<DelayTerm> delays;
  double tau_max = 1.0;
};

/// Lags tau_k + tau_amp_k sin(tau_omega t). When every lag is identically
/// zero the history window defaults to one time unit.
Lags build_lags(const Params& p, std::size_t m) {
  auto tau = p.list("tau", m, 1.0);
  auto amp = p.list("tau_amp", m, 0.0);
  double w = p.scalar("tau_omega", 1.0);
  Lags out;
  double tmax = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (tau[k] - std::abs(amp[k]) < 0.0) {
      throw Error(ErrorCode::BadParams, "lags must stay nonnegative");
    }
    out.delays.push_back(DelayTerm::point(coefficient(tau[k], amp[k], w)));
    tmax = std::max(tmax, tau[k] + std::abs(amp[k]));
  }
  out.tau_max = tmax > 0.0 ? tmax : 1.0;
  return out;
}

const std::set<std::string> kLagKeys = {"m", "tau", "tau_amp", "tau_omega"};

std::set<std::string> keys(std::initializer_list<const char*> extra) {
  std::set<std::string> s = kLagKeys;
  for (const char* e : extra) s.insert(e);
  return s;
}

ModelSpec bastinec_quadratic(const PresetParams& raw) {
  Params p("bastinec-quadratic", raw, keys({"alpha", "alpha_amp", "omega", "beta", "beta_amp"}));
  std::size_t m = p.count({"alpha", "alpha_amp", "tau", "tau_amp"});
  auto alpha = p.list("alpha", m);
  auto alpha_amp = p.list("alpha_amp", m, 0.0);
  double omega = p.scalar("omega", 1.0);
  double beta = p.scalar("beta", 1.0);
  double beta_amp = p.scalar("beta_amp", 0.0);
  require_positive_floor("beta", beta, beta_amp);
  auto lags = build_lags(p, m);

  ModelSpec model;
  model.tau_max = lags.tau_max;
  for (std::size_t k = 0; k < m; ++k) {
    require_positive_floor("alpha", alpha[k], alpha_amp[k]);
    model.recruitment.push_back({RecruitmentKind::linear, coefficient(alpha[k], alpha_amp[k], omega),
                                 TimeFunction::constant(0.0), lags.delays[k]});
  }
  model.mortality = {TimeFunction::constant(0.0), coefficient(beta, beta_amp, omega)};
  return model;
}

ModelSpec bastinec_constant(const PresetParams& raw) {
  Params p("bastinec-constant", raw, keys({"alpha", "beta", "rho", "rho_amp", "rho_omega"}));
  std::size_t m = p.count({"alpha", "tau", "tau_amp"});
  auto alpha = p.list("alpha", m);
  double beta = p.scalar("beta", 1.0);
  double rho = p.scalar("rho", 1.0);
  double rho_amp = p.scalar("rho_amp", 0.0);
  require_positive_floor("beta", beta, 0.0);
  require_positive_floor("rho", rho, rho_amp);
  auto lags = build_lags(p, m);

  ModelSpec model;
  model.rho = coefficient(rho, rho_amp, p.scalar("rho_omega", 1.0));
  model.tau_max = lags.tau_max;
  for (std::size_t k = 0; k < m; ++k) {
    require_positive_floor("alpha", alpha[k], 0.0);
    model.recruitment.push_back({RecruitmentKind::linear, TimeFunction::constant(alpha[k]),
                                 TimeFunction::constant(0.0), lags.delays[k]});
  }
  model.mortality = {TimeFunction::constant(0.0), TimeFunction::constant(beta)};
  return model;
}

ModelSpec bh_logistic(const PresetParams& raw) {
  Params p("bh-logistic", raw,
           keys({"alpha", "alpha_amp", "omega", "beta", "beta_amp", "mu", "mu_amp", "kappa",
                 "kappa_amp"}));
  std::size_t m = p.count({"alpha", "alpha_amp", "beta", "beta_amp", "tau", "tau_amp"});
  auto alpha = p.list("alpha", m);
  auto alpha_amp = p.list("alpha_amp", m, 0.0);
  auto beta = p.list("beta", m, 0.0);
  auto beta_amp = p.list("beta_amp", m, 0.0);
  double omega = p.scalar("omega", 1.0);
  double mu = p.scalar("mu", 0.0);
  double mu_amp = p.scalar("mu_amp", 0.0);
  double kappa = p.scalar("kappa", 1.0);
  double kappa_amp = p.scalar("kappa_amp", 0.0);
  require_nonnegative_floor("mu", mu, mu_amp);
  require_positive_floor("kappa", kappa, kappa_amp);
  auto lags = build_lags(p, m);

  ModelSpec model;
  model.tau_max = lags.tau_max;
  for (std::size_t k = 0; k < m; ++k) {
    require_positive_floor("alpha", alpha[k], alpha_amp[k]);
    require_nonnegative_floor("beta", beta[k], beta_amp[k]);
    model.recruitment.push_back({RecruitmentKind::beverton_holt,
                                 coefficient(alpha[k], alpha_amp[k], omega),
                                 coefficient(beta[k], beta_amp[k], omega), lags.delays[k]});
  }
  model.mortality = {coefficient(mu, mu_amp, omega), coefficient(kappa, kappa_amp, omega)};
  return model;
}

/// gamma mu N / (mu e^{mu tau} + kappa (e^{mu tau} - 1) N) divided through by
/// mu e^{mu tau}.
ModelSpec arino(const PresetParams& raw) {
  Params p("arino", raw, {"gamma", "mu", "kappa", "tau"});
  double gamma = p.scalar("gamma");
  double mu = p.scalar("mu");
  double kappa = p.scalar("kappa");
  double tau = p.scalar("tau", 1.0);
  if (!(mu > 0.0)) throw Error(ErrorCode::BadParams, "arino requires mu > 0");
  if (!(gamma > 0.0) || !(kappa > 0.0) || tau < 0.0) {
    throw Error(ErrorCode::BadParams, "arino requires gamma, kappa > 0 and tau >= 0");
  }
  double decay = std::exp(-mu * tau);
  ModelSpec model;
  model.tau_max = tau > 0.0 ? tau : 1.0;
  model.recruitment.push_back({RecruitmentKind::beverton_holt,
                               TimeFunction::constant(gamma * decay),
                               TimeFunction::constant(kappa * (1.0 - decay) / mu),
                               DelayTerm::point(tau)});
  model.mortality = {TimeFunction::constant(mu), TimeFunction::constant(kappa)};
  return model;
}

ModelSpec nicholson(const PresetParams& raw) {
  Params p("nicholson", raw, keys({"beta", "beta_amp", "omega", "d", "d_amp"}));
  std::size_t m = p.count({"beta", "beta_amp", "tau", "tau_amp"});
  auto beta = p.list("beta", m);
  auto beta_amp = p.list("beta_amp", m, 0.0);
  double omega = p.scalar("omega", 1.0);
  double d = p.scalar("d", 1.0);
  double d_amp = p.scalar("d_amp", 0.0);
  require_nonnegative_floor("d", d, d_amp);
  auto lags = build_lags(p, m);

  ModelSpec model;
  model.tau_max = lags.tau_max;
  for (std::size_t k = 0; k < m; ++k) {
    require_positive_floor("beta", beta[k], beta_amp[k]);
    model.recruitment.push_back({RecruitmentKind::ricker, coefficient(beta[k], beta_amp[k], omega),
                                 TimeFunction::constant(0.0), lags.delays[k]});
  }
  model.mortality = {coefficient(d, d_amp, omega), TimeFunction::constant(0.0)};
  return model;
}

ModelSpec nicholson_autonomous(const PresetParams& raw) {
  Params p("nicholson-autonomous", raw, {"m", "beta", "d", "tau"});
  std::size_t m = p.count({"beta", "tau"});
  auto beta = p.list("beta", m);
  double d = p.scalar("d", 1.0);
  if (!(d > 0.0)) throw Error(ErrorCode::BadParams, "d must be positive");
  auto lags = build_lags(p, m);

  ModelSpec model;
  model.tau_max = lags.tau_max;
  for (std::size_t k = 0; k < m; ++k) {
    require_positive_floor("beta", beta[k], 0.0);
    model.recruitment.push_back({RecruitmentKind::ricker, TimeFunction::constant(beta[k]),
                                 TimeFunction::constant(0.0), lags.delays[k]});
  }
  model.mortality = {TimeFunction::constant(d), TimeFunction::constant(0.0)};
  return model;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"bastinec-quadratic", "bastinec-constant",  "bh-logistic",
          "arino",              "nicholson",          "nicholson-autonomous"};
}

ModelSpec preset(std::string_view name, const PresetParams& params) {
  if (name == "bastinec-quadratic") return bastinec_quadratic(params);
  if (name == "bastinec-constant") return bastinec_constant(params);
  if (name == "bh-logistic") return bh_logistic(params);
  if (name == "arino") return arino(params);
  if (name == "nicholson") return nicholson(params);
  if (name == "nicholson-autonomous") return nicholson_autonomous(params);
  throw Error(ErrorCode::UnknownPreset, std::string(name));
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view s, std::string_view key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::BadParams,
                "parameter '" + std::string(key) + "' has non-numeric value '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

PresetRef parse_preset_ref(std::string_view text) {
  constexpr std::string_view kPrefix = "preset:";
  if (text.substr(0, kPrefix.size()) == kPrefix) text.remove_prefix(kPrefix.size());
  PresetRef ref;
  auto q = text.find('?');
  ref.name = std::string(text.substr(0, q));
  if (q == std::string_view::npos || q + 1 == text.size()) return ref;
  for (auto pair : split(text.substr(q + 1), '&')) {
    if (pair.empty()) continue;
    auto eq = pair.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::BadParams, "expected key=value, got '" + std::string(pair) + "'");
    }
    auto key = pair.substr(0, eq);
    std::vector<double> values;
    for (auto item : split(pair.substr(eq + 1), ',')) values.push_back(parse_number(item, key));
    ref.params[std::string(key)] = std::move(values);
  }
  return ref;
}

}  // namespace permadde
