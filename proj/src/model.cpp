#include "permadde/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "permadde/error.hpp"

namespace permadde {

std::string to_string(RecruitmentKind kind) {
  switch (kind) {
    case RecruitmentKind::linear: return "linear";
    case RecruitmentKind::beverton_holt: return "beverton-holt";
    case RecruitmentKind::ricker: return "ricker";
    case RecruitmentKind::capped_ricker: return "capped-ricker";
  }
  return "unknown";
}

double capped_hump(double y) {
  double c = std::min(y, 1.0);
  return c * std::exp(-c);
}

double recruitment_value(RecruitmentKind kind, double alpha, double beta, double y) {
  switch (kind) {
    case RecruitmentKind::linear: return alpha * y;
    case RecruitmentKind::beverton_holt: return alpha * y / (1.0 + beta * y);
    case RecruitmentKind::ricker: return alpha * y * std::exp(-y);
    case RecruitmentKind::capped_ricker: return alpha * capped_hump(y);
  }
  return 0.0;
}

double recruitment_per_capita(RecruitmentKind kind, double alpha, double beta, double y) {
  switch (kind) {
    case RecruitmentKind::linear: return alpha;
    case RecruitmentKind::beverton_holt: return alpha / (1.0 + beta * y);
    case RecruitmentKind::ricker: return alpha * std::exp(-y);
    case RecruitmentKind::capped_ricker:
      return y <= 1.0 ? alpha * std::exp(-y) : alpha * std::exp(-1.0) / y;
  }
  return 0.0;
}

bool ModelSpec::cooperative() const {
  return std::all_of(recruitment.begin(), recruitment.end(),
                     [](const RecruitmentTerm& r) { return is_monotone(r.kind); });
}

bool ModelSpec::autonomous_coefficients() const {
  auto all_const = [](const RecruitmentTerm& r) {
    return r.alpha.is_constant() &&
           (r.kind != RecruitmentKind::beverton_holt || r.beta.is_constant());
  };
  return std::all_of(recruitment.begin(), recruitment.end(), all_const) &&
         mortality.mu.is_constant() && mortality.kappa.is_constant();
}

double eval_rhs(const ModelSpec& model, double t, double x_now, std::span<const double> delayed) {
  if (delayed.size() != model.recruitment.size()) {
    std::ostringstream os;
    os << "expected " << model.recruitment.size() << " delayed states, got " << delayed.size();
    throw Error(ErrorCode::ArityMismatch, os.str());
  }
  double births = 0.0;
  for (std::size_t k = 0; k < delayed.size(); ++k) {
    births += model.recruitment[k].value(t, delayed[k]);
  }
  return model.rho(t) * (births - model.mortality.value(t, x_now));
}

// ---------------------------------------------------------------------------

std::string to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::NoRecruitment: return "NoRecruitment";
    case ViolationCode::BadTauMax: return "BadTauMax";
    case ViolationCode::NonFiniteMetadata: return "NonFiniteMetadata";
    case ViolationCode::MetadataUnordered: return "MetadataUnordered";
    case ViolationCode::ConstantMetadataMismatch: return "ConstantMetadataMismatch";
    case ViolationCode::SampledValueBelowDeclaredInf: return "SampledValueBelowDeclaredInf";
    case ViolationCode::SampledValueExceedsDeclaredSup: return "SampledValueExceedsDeclaredSup";
    case ViolationCode::TailSampleOutsideDeclaredTail: return "TailSampleOutsideDeclaredTail";
    case ViolationCode::EmptyDelay: return "EmptyDelay";
    case ViolationCode::NonPositiveWeight: return "NonPositiveWeight";
    case ViolationCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ViolationCode::LagOutOfRange: return "LagOutOfRange";
    case ViolationCode::AlphaNotBoundedAway: return "AlphaNotBoundedAway";
    case ViolationCode::KappaNotBoundedAway: return "KappaNotBoundedAway";
    case ViolationCode::NegativeMu: return "NegativeMu";
    case ViolationCode::NegativeBeta: return "NegativeBeta";
    case ViolationCode::NegativeRho: return "NegativeRho";
  }
  return "Unknown";
}

namespace {

constexpr double kSampleStep = 0.01;
constexpr double kMetadataSlack = 1e-9;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<Violation> validate_time_function(const TimeFunction& f, const std::string& where,
                                              double horizon) {
  std::vector<Violation> out;
  const Extrema& e = f.extrema();
  if (!std::isfinite(e.inf) || !std::isfinite(e.sup) || !std::isfinite(e.tail_liminf) ||
      !std::isfinite(e.tail_limsup)) {
    out.push_back({ViolationCode::NonFiniteMetadata, where, "declared extrema must be finite"});
    return out;
  }
  if (!e.ordered()) {
    out.push_back({ViolationCode::MetadataUnordered, where,
                   "need inf <= tail_liminf <= tail_limsup <= sup"});
  }
  if (const auto* c = std::get_if<Constant>(&f.shape())) {
    if (e.inf != c->value || e.sup != c->value || e.tail_liminf != c->value ||
        e.tail_limsup != c->value) {
      out.push_back({ViolationCode::ConstantMetadataMismatch, where,
                     "constant " + fmt_double(c->value) + " must declare all extrema equal to it"});
    }
    return out;
  }

  const double slack = kMetadataSlack * std::max(1.0, std::max(std::abs(e.inf), std::abs(e.sup)));
  const auto n = static_cast<std::size_t>(std::ceil(horizon / kSampleStep));
  double worst_lo = e.inf, worst_hi = e.sup;
  double t_lo = 0.0, t_hi = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    double t = horizon * static_cast<double>(i) / static_cast<double>(n);
    double v = f(t);
    if (v < worst_lo) worst_lo = v, t_lo = t;
    if (v > worst_hi) worst_hi = v, t_hi = t;
  }
  if (worst_lo < e.inf - slack) {
    out.push_back({ViolationCode::SampledValueBelowDeclaredInf, where,
                   "value " + fmt_double(worst_lo) + " at t=" + fmt_double(t_lo) +
                       " is below declared inf " + fmt_double(e.inf)});
  }
  if (worst_hi > e.sup + slack) {
    out.push_back({ViolationCode::SampledValueExceedsDeclaredSup, where,
                   "value " + fmt_double(worst_hi) + " at t=" + fmt_double(t_hi) +
                       " exceeds declared sup " + fmt_double(e.sup)});
  }

  // Tail check over the second half of the horizon, or past the last knot.
  double tail_start = std::max(0.5 * horizon, f.settles_after().value_or(0.0));
  if (tail_start < horizon) {
    for (std::size_t i = 0; i <= n / 2; ++i) {
      double t = tail_start + (horizon - tail_start) * static_cast<double>(i) /
                                  static_cast<double>(n / 2);
      double v = f(t);
      if (v < e.tail_liminf - slack || v > e.tail_limsup + slack) {
        out.push_back({ViolationCode::TailSampleOutsideDeclaredTail, where,
                       "value " + fmt_double(v) + " at t=" + fmt_double(t) +
                           " is outside the declared tail range"});
        break;
      }
    }
  }
  return out;
}

std::vector<Violation> validate_model(const ModelSpec& model, double horizon) {
  std::vector<Violation> out;
  auto append = [&out](std::vector<Violation> v) {
    out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  };

  if (!(model.tau_max > 0.0) || !std::isfinite(model.tau_max)) {
    out.push_back({ViolationCode::BadTauMax, "tau_max", "tau_max must be positive and finite"});
  }
  if (model.recruitment.empty()) {
    out.push_back({ViolationCode::NoRecruitment, "recruitment", "at least one term required"});
  }

  append(validate_time_function(model.rho, "rho", horizon));
  if (model.rho.inf() < 0.0) {
    out.push_back({ViolationCode::NegativeRho, "rho", "rho must be nonnegative"});
  }

  for (std::size_t k = 0; k < model.recruitment.size(); ++k) {
    const auto& term = model.recruitment[k];
    const std::string base = "recruitment[" + std::to_string(k) + "]";

    append(validate_time_function(term.alpha, base + ".alpha", horizon));
    if (!term.alpha.identically_zero() && !(term.alpha.inf() > 0.0)) {
      out.push_back({ViolationCode::AlphaNotBoundedAway, base + ".alpha",
                     "declared inf must be positive unless alpha is identically zero"});
    }
    if (term.kind == RecruitmentKind::beverton_holt) {
      append(validate_time_function(term.beta, base + ".beta", horizon));
      if (term.beta.inf() < 0.0) {
        out.push_back({ViolationCode::NegativeBeta, base + ".beta", "beta must be nonnegative"});
      }
    }

    if (term.delay.atoms.empty()) {
      out.push_back({ViolationCode::EmptyDelay, base + ".delay", "no delay atoms"});
      continue;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < term.delay.atoms.size(); ++j) {
      const auto& atom = term.delay.atoms[j];
      const std::string at = base + ".delay[" + std::to_string(j) + "]";
      if (!(atom.weight > 0.0)) {
        out.push_back({ViolationCode::NonPositiveWeight, at, "weights must be positive"});
      }
      total += atom.weight;
      append(validate_time_function(atom.lag, at + ".lag", horizon));
      if (atom.lag.inf() < 0.0 || atom.lag.sup() > model.tau_max) {
        out.push_back({ViolationCode::LagOutOfRange, at + ".lag",
                       "lag range must lie in [0, tau_max]"});
      }
    }
    if (std::abs(total - 1.0) > 1e-12) {
      out.push_back({ViolationCode::WeightsNotNormalized, base + ".delay",
                     "weights sum to " + fmt_double(total)});
    }
  }

  append(validate_time_function(model.mortality.mu, "mortality.mu", horizon));
  if (model.mortality.mu.inf() < 0.0) {
    out.push_back({ViolationCode::NegativeMu, "mortality.mu", "mu must be nonnegative"});
  }
  append(validate_time_function(model.mortality.kappa, "mortality.kappa", horizon));
  if (!model.mortality.kappa.identically_zero() && !(model.mortality.kappa.inf() > 0.0)) {
    out.push_back({ViolationCode::KappaNotBoundedAway, "mortality.kappa",
                   "declared inf must be positive unless kappa is identically zero"});
  }
  return out;
}

// ---------------------------------------------------------------------------

double HistorySpec::operator()(double theta) const {
  return std::visit(
      [theta](const auto& h) -> double {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, ConstantHistory>) {
          return h.value;
        } else if constexpr (std::is_same_v<T, SinusoidHistory>) {
          double v = h.a + h.b * std::sin(h.omega * theta + h.phase);
          return h.clip_at_zero ? std::max(0.0, v) : v;
        } else {
          const auto& k = h.knots;
          if (k.empty()) return 0.0;
          if (theta <= k.front().first) return k.front().second;
          if (theta >= k.back().first) return k.back().second;
          auto it = std::upper_bound(k.begin(), k.end(), theta,
                                     [](double v, const auto& knot) { return v < knot.first; });
          const auto& [t1, v1] = *it;
          const auto& [t0, v0] = *(it - 1);
          return v0 + (theta - t0) / (t1 - t0) * (v1 - v0);
        }
      },
      shape);
}

namespace {

constexpr std::size_t kHistorySamples = 4000;

template <class F>
bool all_samples(const HistorySpec& h, double tau_max, F&& pred) {
  for (std::size_t i = 0; i <= kHistorySamples; ++i) {
    double theta = -tau_max + tau_max * static_cast<double>(i) / kHistorySamples;
    if (!pred(h(theta))) return false;
  }
  if (const auto* tab = std::get_if<TabulatedHistory>(&h.shape)) {
    for (const auto& [theta, v] : tab->knots) {
      if (theta >= -tau_max && theta <= 0.0 && !pred(v)) return false;
    }
  }
  return true;
}

}  // namespace

double HistorySpec::sup_norm(double tau_max) const {
  double m = 0.0;
  all_samples(*this, tau_max, [&m](double v) {
    m = std::max(m, std::abs(v));
    return true;
  });
  return m;
}

bool nonnegative(const HistorySpec& history, double tau_max) {
  return all_samples(history, tau_max, [](double v) { return std::isfinite(v) && v >= 0.0; });
}

bool admissible(const HistorySpec& history, double tau_max) {
  return nonnegative(history, tau_max) && history(0.0) > 0.0;
}

}  // namespace permadde
