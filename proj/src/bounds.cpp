#include "permadde/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "permadde/error.hpp"

namespace permadde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRootTolerance = 1e-12;
constexpr double kBracketLimit = 1152921504606846976.0;  // 2^60

bool beta_free(const RecruitmentTerm& r) {
  return r.kind == RecruitmentKind::linear ||
         (r.kind == RecruitmentKind::beverton_holt && r.beta.identically_zero());
}

bool bh_like(const RecruitmentTerm& r) {
  return r.kind == RecruitmentKind::linear || r.kind == RecruitmentKind::beverton_holt;
}

bool ricker_like(const RecruitmentTerm& r) {
  return r.kind == RecruitmentKind::ricker || r.kind == RecruitmentKind::capped_ricker;
}

template <class Pred>
bool all_terms(const ModelSpec& m, Pred p) {
  return std::all_of(m.recruitment.begin(), m.recruitment.end(), p);
}

double sum_inf_alpha(const ModelSpec& m) {
  double s = 0.0;
  for (const auto& r : m.recruitment) s += r.alpha.inf();
  return s;
}

double sum_sup_alpha(const ModelSpec& m) {
  double s = 0.0;
  for (const auto& r : m.recruitment) s += r.alpha.sup();
  return s;
}

double sum_alpha_at(const ModelSpec& m, double t) {
  double s = 0.0;
  for (const auto& r : m.recruitment) s += r.alpha(t);
  return s;
}

std::vector<const TimeFunction*> coefficient_inputs(const ModelSpec& m) {
  std::vector<const TimeFunction*> in;
  for (const auto& r : m.recruitment) {
    in.push_back(&r.alpha);
    if (r.kind == RecruitmentKind::beverton_holt) in.push_back(&r.beta);
  }
  in.push_back(&m.mortality.mu);
  in.push_back(&m.mortality.kappa);
  return in;
}

Verdict make_verdict(std::string_view name, double margin, bool non_strict = false) {
  bool pass = std::isfinite(margin) && (non_strict ? margin >= 0.0 : margin > 0.0);
  return Verdict{std::string(name), pass, margin};
}

bool applies(std::string_view name, Family family) {
  namespace hy = hypothesis;
  if (name == hy::rho_floor || name == hy::monotone || name == hy::roots) return true;
  if (name == hy::h1) return family == Family::quadratic || family == Family::beverton_holt;
  if (name == hy::growth_exceeds_mortality) return family == Family::beverton_holt;
  if (name == hy::nicholson_lower || name == hy::nicholson_upper) {
    return family == Family::nicholson;
  }
  return false;
}

/// Total recruitment of a constant-coefficient model at a common delayed state.
double envelope_recruitment(const ModelSpec& env, double y) {
  double s = 0.0;
  for (const auto& r : env.recruitment) s += recruitment_value(r.kind, r.alpha(0.0), r.beta(0.0), y);
  return s;
}

double monotone_margin(const EnvelopePair& env) {
  constexpr int kGrid = 600;
  double margin = std::numeric_limits<double>::infinity();
  for (const ModelSpec* m : {&env.lower, &env.upper}) {
    double prev = envelope_recruitment(*m, 0.0);
    for (int i = 0; i <= kGrid; ++i) {
      double y = 1e-6 * std::pow(1e9, static_cast<double>(i) / kGrid);
      double cur = envelope_recruitment(*m, y);
      margin = std::min(margin, cur - prev);
      prev = cur;
    }
  }
  return margin;
}

double roots_margin(const EnvelopePair& env) {
  return std::min(envelope_growth(env.lower, 0.0), -envelope_growth(env.upper, kBracketLimit));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Family f) {
  switch (f) {
    case Family::quadratic: return "quadratic";
    case Family::beverton_holt: return "beverton-holt";
    case Family::nicholson: return "nicholson";
    case Family::general: return "general";
  }
  return "general";
}

Family family_from_string(std::string_view s) {
  for (auto f : {Family::quadratic, Family::beverton_holt, Family::nicholson, Family::general}) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::ParseError, "unknown family '" + std::string(s) + "'");
}

bool fits_family(const ModelSpec& m, Family family) {
  if (m.recruitment.empty()) return family == Family::general;
  switch (family) {
    case Family::quadratic:
      return all_terms(m, beta_free) && m.mortality.mu.identically_zero() &&
             !m.mortality.kappa.identically_zero();
    case Family::beverton_holt:
      return all_terms(m, bh_like) && !m.mortality.kappa.identically_zero();
    case Family::nicholson:
      return all_terms(m, ricker_like) && m.mortality.kappa.identically_zero();
    case Family::general: return true;
  }
  return false;
}

Family detect_family(const ModelSpec& m) {
  for (auto f : {Family::nicholson, Family::quadratic, Family::beverton_holt}) {
    if (fits_family(m, f)) return f;
  }
  return Family::general;
}

std::pair<double, double> tail_range(const std::function<double(double)>& g,
                                     const std::vector<const TimeFunction*>& inputs,
                                     const TailSampling& sampling) {
  double start = sampling.t_tail;
  double period = 0.0;
  bool all_constant = true;
  for (const auto* f : inputs) {
    all_constant = all_constant && f->is_constant();
    start = std::max(start, f->settles_after().value_or(start));
    period = std::max(period, f->period().value_or(0.0));
  }
  if (all_constant) {
    double v = g(start);
    return {v, v};
  }

  const double length = std::max(sampling.min_window, sampling.periods * period);
  const std::size_t n = std::max<std::size_t>(sampling.samples, 3);
  const double dt = length / static_cast<double>(n - 1);
  std::size_t i_lo = 0, i_hi = 0;
  double v_lo = g(start), v_hi = v_lo;
  for (std::size_t i = 1; i < n; ++i) {
    double v = g(start + dt * static_cast<double>(i));
    if (v < v_lo) v_lo = v, i_lo = i;
    if (v > v_hi) v_hi = v, i_hi = i;
  }

  constexpr int kBits = std::numeric_limits<double>::digits / 2;
  auto bracket = [&](std::size_t i) {
    double a = start + dt * static_cast<double>(i == 0 ? 0 : i - 1);
    double b = start + dt * static_cast<double>(std::min(i + 1, n - 1));
    return std::pair{a, b};
  };
  if (auto [a, b] = bracket(i_lo); b > a) {
    auto r = boost::math::tools::brent_find_minima(g, a, b, kBits);
    v_lo = std::min(v_lo, r.second);
  }
  if (auto [a, b] = bracket(i_hi); b > a) {
    auto neg = [&g](double t) { return -g(t); };
    auto r = boost::math::tools::brent_find_minima(neg, a, b, kBits);
    v_hi = std::max(v_hi, -r.second);
  }
  return {v_lo, v_hi};
}

// ---------------------------------------------------------------------------

Verdict check_hypothesis(const ModelSpec& m, std::string_view name, Family family) {
  namespace hy = hypothesis;
  if (!applies(name, family)) {
    throw Error(ErrorCode::FamilyMismatch,
                std::string(name) + " does not apply to the " + to_string(family) + " family");
  }
  if (name == hy::rho_floor) return make_verdict(name, m.rho.inf());
  if (name == hy::h1) {
    double margin = m.mortality.kappa.inf();
    for (const auto& r : m.recruitment) margin = std::min(margin, r.alpha.inf());
    return make_verdict(name, margin);
  }
  if (name == hy::growth_exceeds_mortality) {
    return make_verdict(name, sum_inf_alpha(m) - m.mortality.mu.sup());
  }
  if (name == hy::nicholson_lower) {
    return make_verdict(name, sum_inf_alpha(m) - m.mortality.mu.sup());
  }
  if (name == hy::nicholson_upper) {
    return make_verdict(name, std::numbers::e * m.mortality.mu.inf() - sum_sup_alpha(m));
  }
  // Envelope-based checks. Nondecreasing recruitment is a non-strict condition.
  try {
    EnvelopePair env = build_envelopes(m);
    if (name == hy::monotone) return make_verdict(name, monotone_margin(env), true);
    return make_verdict(name, roots_margin(env));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EnvelopeUnavailable) throw;
    return Verdict{std::string(name), false, kNaN};
  }
}

std::vector<Verdict> check_hypotheses(const ModelSpec& m, Family family) {
  namespace hy = hypothesis;
  std::vector<Verdict> out;
  for (auto name : {hy::rho_floor, hy::h1, hy::growth_exceeds_mortality, hy::nicholson_lower,
                    hy::nicholson_upper, hy::monotone, hy::roots}) {
    if (applies(name, family)) out.push_back(check_hypothesis(m, name, family));
  }
  return out;
}

std::vector<Verdict> check_hypotheses(const ModelSpec& m) {
  return check_hypotheses(m, detect_family(m));
}

// ---------------------------------------------------------------------------

EnvelopePair build_envelopes(const ModelSpec& m) {
  const auto& mort = m.mortality;
  if (!(mort.mu.inf() > 0.0) && !(mort.kappa.inf() > 0.0)) {
    throw Error(ErrorCode::EnvelopeUnavailable,
                "mortality has no positive lower bound (inf mu = inf kappa = 0)");
  }
  const bool has_ricker = !all_terms(m, [](const RecruitmentTerm& r) { return is_monotone(r.kind); });
  if (has_ricker) {
    namespace hy = hypothesis;
    if (!fits_family(m, Family::nicholson) ||
        !check_hypothesis(m, hy::nicholson_lower, Family::nicholson).pass ||
        !check_hypothesis(m, hy::nicholson_upper, Family::nicholson).pass) {
      throw Error(ErrorCode::EnvelopeUnavailable,
                  "Ricker recruitment needs both Nicholson conditions for a cooperative envelope");
    }
  }

  EnvelopePair env;
  for (ModelSpec* e : {&env.lower, &env.upper}) {
    e->rho = m.rho;
    e->tau_max = m.tau_max;
  }
  auto c = [](double v) { return TimeFunction::constant(v); };
  for (const auto& r : m.recruitment) {
    RecruitmentTerm lo{r.kind, c(r.alpha.inf()), c(0.0), r.delay};
    RecruitmentTerm hi{r.kind, c(r.alpha.sup()), c(0.0), r.delay};
    switch (r.kind) {
      case RecruitmentKind::linear:
      case RecruitmentKind::capped_ricker: break;
      case RecruitmentKind::beverton_holt:
        lo.beta = c(r.beta.sup());
        hi.beta = c(r.beta.inf());
        break;
      case RecruitmentKind::ricker:
        lo.kind = hi.kind = RecruitmentKind::capped_ricker;
        break;
    }
    env.lower.recruitment.push_back(std::move(lo));
    env.upper.recruitment.push_back(std::move(hi));
  }
  env.lower.mortality = {c(mort.mu.sup()), c(mort.kappa.sup())};
  env.upper.mortality = {c(mort.mu.inf()), c(mort.kappa.inf())};
  return env;
}

double positive_root(const std::function<double(double)>& g) {
  if (!(g(0.0) > 0.0)) throw Error(ErrorCode::BadParams, "positive_root needs g(0) > 0");
  double lo = 0.0, hi = 1.0;
  while (!(g(hi) < 0.0)) {
    if (g(hi) == 0.0) return hi;
    if (hi >= kBracketLimit) {
      throw Error(ErrorCode::NoSignChange, "g stays nonnegative up to 2^60");
    }
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > kRootTolerance) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double v = g(mid);
    if (v == 0.0) return mid;
    (v > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double envelope_growth(const ModelSpec& env, double x) {
  double r = 0.0;
  for (const auto& term : env.recruitment) {
    r += recruitment_per_capita(term.kind, term.alpha(0.0), term.beta(0.0), x);
  }
  return r - (env.mortality.mu(0.0) + env.mortality.kappa(0.0) * x);
}

EquilibriumBounds equilibrium_bounds(const EnvelopePair& env) {
  auto root_or_zero = [](const ModelSpec& e) {
    auto g = [&e](double x) { return envelope_growth(e, x); };
    return g(0.0) > 0.0 ? positive_root(g) : 0.0;
  };
  return {root_or_zero(env.lower), root_or_zero(env.upper)};
}

// ---------------------------------------------------------------------------

ClosedFormBounds closed_form_bounds(const ModelSpec& m, std::optional<Family> coerce,
                                    const TailSampling& sampling) {
  Family family = coerce.value_or(detect_family(m));
  if (family == Family::general) {
    throw Error(ErrorCode::UnsupportedFamily, "no closed-form bounds; use equilibrium_bounds");
  }
  if (!fits_family(m, family)) {
    throw Error(ErrorCode::FamilyMismatch, "model does not have " + to_string(family) + " structure");
  }

  ClosedFormBounds out;
  out.family = family;
  const auto inputs = coefficient_inputs(m);

  if (family == Family::nicholson) {
    auto g = [&m](double t) { return std::log(sum_alpha_at(m, t) / m.mortality.mu(t)); };
    std::tie(out.m0, out.M0) = tail_range(g, inputs, sampling);
    return out;
  }

  // Quadratic and Beverton-Holt share the net growth ratio; mu == 0 reduces it
  // to the quadratic form without changing a single bit.
  auto ratio = [&m](double t) {
    return (sum_alpha_at(m, t) - m.mortality.mu(t)) / m.mortality.kappa(t);
  };
  auto [lo, hi] = tail_range(ratio, inputs, sampling);
  out.M0 = hi;
  out.m0 = lo;
  if (family == Family::beverton_holt && !all_terms(m, beta_free)) {
    double c0 = sum_inf_alpha(m) - m.mortality.mu.sup();
    double c1 = m.mortality.kappa.sup();
    for (const auto& r : m.recruitment) {
      if (r.kind == RecruitmentKind::beverton_holt) c1 += r.alpha.inf() * r.beta.sup();
    }
    out.m0 = c0 / c1;
  }
  return out;
}

// ---------------------------------------------------------------------------

const Verdict* BoundsReport::find(std::string_view name) const {
  for (const auto& v : hypotheses) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

BoundsReport bounds_report(const ModelSpec& m, const TailSampling& sampling) {
  namespace hy = hypothesis;
  BoundsReport rep;
  rep.family = detect_family(m);
  rep.hypotheses = check_hypotheses(m, rep.family);
  auto passes = [&rep](std::string_view name) {
    const Verdict* v = rep.find(name);
    return v != nullptr && v->pass;
  };

  std::vector<double> lower{0.0};
  std::vector<double> upper;

  try {
    EquilibriumBounds eq = equilibrium_bounds(build_envelopes(m));
    rep.K_l = eq.K_l;
    rep.K_u = eq.K_u;
    if (passes(hy::monotone)) {
      lower.push_back(eq.K_l);
      upper.push_back(eq.K_u);
    }
    if (eq.K_l == 0.0) {
      rep.warnings.push_back("lower envelope has no positive equilibrium; zero is its attractor");
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EnvelopeUnavailable && e.code() != ErrorCode::NoSignChange) throw;
    rep.warnings.push_back(e.what());
  }

  if (rep.family != Family::general) {
    ClosedFormBounds cf = closed_form_bounds(m, rep.family, sampling);
    rep.m0 = cf.m0;
    rep.M0 = cf.M0;
    bool gated = false;
    switch (rep.family) {
      case Family::quadratic: gated = passes(hy::h1); break;
      case Family::beverton_holt: gated = passes(hy::h1) && passes(hy::growth_exceeds_mortality); break;
      case Family::nicholson: gated = passes(hy::nicholson_lower) && passes(hy::nicholson_upper); break;
      case Family::general: break;
    }
    if (gated) {
      lower.push_back(cf.m0);
      upper.push_back(cf.M0);
    }
  }
  if (rep.family == Family::nicholson) {
    rep.warnings.push_back(
        "certification relies on the capped-Ricker envelope; it does not cover the e^2 regime");
  }

  if (!passes(hy::rho_floor)) {
    rep.warnings.push_back("rho has no positive lower bound; nothing is certified");
    lower.assign(1, 0.0);
    upper.clear();
  }

  rep.certified_lo = *std::max_element(lower.begin(), lower.end());
  rep.certified_hi = upper.empty() ? std::numeric_limits<double>::infinity()
                                   : *std::min_element(upper.begin(), upper.end());
  // Roots are only bracketed to kRootTolerance, so a bisected K and an exact
  // closed form for the same point can cross by that much.
  if (rep.certified_lo > rep.certified_hi &&
      rep.certified_lo - rep.certified_hi <= 2.0 * kRootTolerance) {
    rep.certified_lo = rep.certified_hi;
  }
  rep.permanent = rep.certified_lo > 0.0 && std::isfinite(rep.certified_hi) &&
                  rep.certified_lo <= rep.certified_hi;
  if (rep.certified_lo > rep.certified_hi) {
    rep.warnings.push_back("certified interval is empty; declared extrema are inconsistent");
  }
  return rep;
}

}  // namespace permadde
