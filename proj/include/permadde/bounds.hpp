#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "permadde/model.hpp"

namespace permadde {

/// Structural classes with closed-form bounds.
///   quadratic       linear recruitment (or Beverton-Holt with beta == 0), mu == 0
///   beverton_holt   linear / Beverton-Holt recruitment, kappa > 0
///   nicholson       Ricker-type recruitment, kappa == 0
///   general         anything else; equilibrium bounds only
enum class Family { quadratic, beverton_holt, nicholson, general };

std::string to_string(Family f);
Family family_from_string(std::string_view s);

/// Most specific family whose structure the model fits.
Family detect_family(const ModelSpec& model);
bool fits_family(const ModelSpec& model, Family family);

/// Hypothesis verdict. The margin is (satisfied side) - (threshold), NaN
/// when the check could not be evaluated.
struct Verdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;
};

namespace hypothesis {
inline constexpr std::string_view rho_floor = "A1-rho";
inline constexpr std::string_view h1 = "h1";
inline constexpr std::string_view growth_exceeds_mortality = "cond-3.4";
inline constexpr std::string_view nicholson_lower = "cond-3.14-left";
inline constexpr std::string_view nicholson_upper = "cond-3.14-right";
inline constexpr std::string_view monotone = "H2-monotone";
inline constexpr std::string_view roots = "H3-roots";
}  // namespace hypothesis

/// Window over which tail liminf/limsup of composite coefficient expressions
/// are sampled: `samples` points on [start, start + max(min_window, periods *
/// longest period)], start = max(t_tail, last piecewise knot), followed by a
/// Brent refinement around the best sample.
struct TailSampling {
  double t_tail = 100.0;
  std::size_t samples = 4096;
  double min_window = 100.0;
  double periods = 8.0;
};

/// Sampled (liminf, limsup) of g over the tail window implied by `inputs`.
std::pair<double, double> tail_range(const std::function<double(double)>& g,
                                     const std::vector<const TimeFunction*>& inputs,
                                     const TailSampling& sampling = {});

/// Every hypothesis applicable to the model's detected family.
std::vector<Verdict> check_hypotheses(const ModelSpec& model);
std::vector<Verdict> check_hypotheses(const ModelSpec& model, Family family);
/// One named check; FamilyMismatch if it does not apply to `family`.
Verdict check_hypothesis(const ModelSpec& model, std::string_view name, Family family);

/// Autonomous cooperative comparison models: lower pairs minimal recruitment
/// with maximal mortality, upper the reverse. Rho and lags are copied as is.
struct EnvelopePair {
  ModelSpec lower;
  ModelSpec upper;
};

/// Throws EnvelopeUnavailable for Ricker terms without both Nicholson
/// conditions, or when mu and kappa both have zero lower bound.
EnvelopePair build_envelopes(const ModelSpec& model);

/// Unique positive zero of a decreasing g with g(0) > 0: bracket by doubling
/// (up to 2^60), then bisection to width 1e-12. NoSignChange if no bracket.
double positive_root(const std::function<double(double)>& g);

/// Per-capita net growth sum_k r_k(x) - d(x) of a constant-coefficient model.
double envelope_growth(const ModelSpec& envelope, double x);

struct EquilibriumBounds {
  double K_l = 0.0;
  double K_u = 0.0;
};

/// K_u from the upper envelope, K_l from the lower; zero when the envelope's
/// growth at the origin is not positive.
EquilibriumBounds equilibrium_bounds(const EnvelopePair& envelopes);

struct ClosedFormBounds {
  Family family = Family::general;
  double m0 = 0.0;
  double M0 = 0.0;
};

/// Closed-form asymptotic bounds of the model's family, or of `coerce` when
/// given (FamilyMismatch if the structure does not fit). UnsupportedFamily
/// for the general family.
ClosedFormBounds closed_form_bounds(const ModelSpec& model, std::optional<Family> coerce = {},
                                    const TailSampling& sampling = {});

struct BoundsReport {
  Family family = Family::general;
  std::vector<Verdict> hypotheses;
  std::optional<double> m0;
  std::optional<double> M0;
  std::optional<double> K_l;
  std::optional<double> K_u;
  double certified_lo = 0.0;
  double certified_hi = 0.0;  // +inf when no upper bound is certified
  bool permanent = false;
  std::vector<std::string> warnings;

  const Verdict* find(std::string_view name) const;
};

BoundsReport bounds_report(const ModelSpec& model, const TailSampling& sampling = {});

/// {family, hypotheses: [{name, pass, margin}], m0, M0, K_l, K_u,
///  certified: [lo, hi], permanent, warnings}; unavailable numbers are null.
nlohmann::json to_json(const BoundsReport& report);
BoundsReport bounds_report_from_json(const nlohmann::json& j);

}  // namespace permadde
