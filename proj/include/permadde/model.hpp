#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "permadde/time_function.hpp"

namespace permadde {

// ---------------------------------------------------------------------------
// Delays

struct DelayAtom {
  TimeFunction lag;
  double weight = 1.0;
};

/// Finite atomic delay distribution: the aggregate delayed state is
/// sum_j weight_j * x(t - lag_j(t)) with weights summing to one.
struct DelayTerm {
  std::vector<DelayAtom> atoms;

  static DelayTerm point(TimeFunction lag) { return DelayTerm{{DelayAtom{std::move(lag), 1.0}}}; }
  static DelayTerm point(double lag) { return point(TimeFunction::constant(lag)); }
};

// ---------------------------------------------------------------------------
// Recruitment and mortality

enum class RecruitmentKind { linear, beverton_holt, ricker, capped_ricker };

std::string to_string(RecruitmentKind kind);

/// Ricker is the only kind that is not nondecreasing in the delayed state.
constexpr bool is_monotone(RecruitmentKind kind) { return kind != RecruitmentKind::ricker; }

/// min(y, 1) * exp(-min(y, 1)): the nondecreasing cap of y e^{-y}.
double capped_hump(double y);

/// Recruitment value for frozen coefficients. `beta` is ignored except for
/// the Beverton-Holt kind.
double recruitment_value(RecruitmentKind kind, double alpha, double beta, double y);

/// Recruitment per unit of delayed state, extended continuously to y = 0.
double recruitment_per_capita(RecruitmentKind kind, double alpha, double beta, double y);

struct RecruitmentTerm {
  RecruitmentKind kind = RecruitmentKind::linear;
  TimeFunction alpha;
  TimeFunction beta;  // Beverton-Holt only
  DelayTerm delay;

  double value(double t, double y) const {
    return recruitment_value(kind, alpha(t), beta(t), y);
  }
};

/// D(t, x) = mu(t) x + kappa(t) x^2
struct MortalityTerm {
  TimeFunction mu;
  TimeFunction kappa;

  double value(double t, double x) const { return mu(t) * x + kappa(t) * x * x; }
};

/// x'(t) = rho(t) [ sum_k R_k(t, y_k(t)) - D(t, x(t)) ]
struct ModelSpec {
  TimeFunction rho = TimeFunction::constant(1.0);
  std::vector<RecruitmentTerm> recruitment;
  MortalityTerm mortality;
  double tau_max = 1.0;

  bool cooperative() const;
  /// All recruitment and mortality coefficients constant (rho and lags may vary).
  bool autonomous_coefficients() const;
};

/// Right-hand side given one weight-aggregated delayed state per recruitment
/// term. Throws ArityMismatch on a length mismatch.
double eval_rhs(const ModelSpec& model, double t, double x_now, std::span<const double> delayed);

// ---------------------------------------------------------------------------
// Validation

enum class ViolationCode {
  NoRecruitment,
  BadTauMax,
  NonFiniteMetadata,
  MetadataUnordered,
  ConstantMetadataMismatch,
  SampledValueBelowDeclaredInf,
  SampledValueExceedsDeclaredSup,
  TailSampleOutsideDeclaredTail,
  EmptyDelay,
  NonPositiveWeight,
  WeightsNotNormalized,
  LagOutOfRange,
  AlphaNotBoundedAway,
  KappaNotBoundedAway,
  NegativeMu,
  NegativeBeta,
  NegativeRho,
};

std::string to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string where;
  std::string detail;
};

/// Sampled consistency checks over [0, horizon]; never throws. An empty
/// result means the model is usable by the integrator and bounds engine.
std::vector<Violation> validate_model(const ModelSpec& model, double horizon = check_horizon());

/// Same metadata checks for a single coefficient.
std::vector<Violation> validate_time_function(const TimeFunction& f, const std::string& where,
                                              double horizon = check_horizon());

// ---------------------------------------------------------------------------
// Initial histories on [-tau_max, 0]

struct ConstantHistory {
  double value = 1.0;
};

/// max(0, a + b sin(omega theta + phase)) when clipped, the raw sinusoid otherwise.
struct SinusoidHistory {
  double a = 1.0;
  double b = 0.0;
  double omega = 1.0;
  double phase = 0.0;
  bool clip_at_zero = false;
};

/// Linear interpolation through (theta, value) knots, constant beyond them.
struct TabulatedHistory {
  std::vector<std::pair<double, double>> knots;
};

struct HistorySpec {
  std::variant<ConstantHistory, SinusoidHistory, TabulatedHistory> shape;

  static HistorySpec constant(double c) { return HistorySpec{ConstantHistory{c}}; }
  double operator()(double theta) const;
  /// Supremum norm over [-tau_max, 0], sampled.
  double sup_norm(double tau_max) const;
};

/// phi >= 0 on [-tau_max, 0] and phi(0) > 0.
bool admissible(const HistorySpec& history, double tau_max);
/// phi >= 0 on [-tau_max, 0]; the nonnegative cone, which also admits phi(0) = 0.
bool nonnegative(const HistorySpec& history, double tau_max);

}  // namespace permadde
