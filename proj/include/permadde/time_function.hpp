#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace permadde {

/// Declared range of a coefficient over t >= 0 together with its asymptotic
/// range as t -> infinity. The bounds engine consumes exactly these numbers.
struct Extrema {
  double inf = 0.0;
  double sup = 0.0;
  double tail_liminf = 0.0;
  double tail_limsup = 0.0;

  bool ordered() const {
    return inf <= tail_liminf && tail_liminf <= tail_limsup && tail_limsup <= sup;
  }
};

struct Constant {
  double value = 0.0;
};

/// a + b sin(omega t + phase)
struct Sinusoid {
  double a = 0.0;
  double b = 0.0;
  double omega = 1.0;
  double phase = 0.0;
};

/// Linear interpolation between knots; constant extension on both sides.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;
};

enum class TimeFunctionKind { constant, sinusoid, piecewise_linear };

/// Bounded coefficient function of time carrying declared extrema metadata.
class TimeFunction {
public:
  using Shape = std::variant<Constant, Sinusoid, PiecewiseLinear>;

  TimeFunction() : TimeFunction(constant(0.0)) {}

  static TimeFunction constant(double c);
  static TimeFunction sinusoid(double a, double b, double omega, double phase = 0.0);
  /// Knots must be sorted by strictly increasing time; throws BadParams otherwise.
  static TimeFunction piecewise_linear(std::vector<std::pair<double, double>> knots);

  /// Replaces the derived metadata with user-declared values. Consistency is
  /// checked by validate_model, not here.
  TimeFunction with_extrema(Extrema e) const;

  double operator()(double t) const;

  TimeFunctionKind kind() const;
  const Shape& shape() const { return shape_; }
  const Extrema& extrema() const { return extrema_; }

  double inf() const { return extrema_.inf; }
  double sup() const { return extrema_.sup; }
  double tail_liminf() const { return extrema_.tail_liminf; }
  double tail_limsup() const { return extrema_.tail_limsup; }

  bool is_constant() const { return kind() == TimeFunctionKind::constant; }
  /// True when the declared range is the single point zero.
  bool identically_zero() const { return extrema_.inf == 0.0 && extrema_.sup == 0.0; }

  /// Period of the oscillating part, if any.
  std::optional<double> period() const;
  /// Time after which the function is constant (last knot), if piecewise.
  std::optional<double> settles_after() const;

  /// Metadata implied by the shape alone.
  static Extrema derived_extrema(const Shape& shape);

private:
  TimeFunction(Shape shape, Extrema extrema) : shape_(std::move(shape)), extrema_(extrema) {}

  Shape shape_;
  Extrema extrema_;
};

std::string to_string(TimeFunctionKind kind);

/// Horizon used by sampled validations; PERMADDE_CHECK_HORIZON overrides the
/// default of 200 time units.
double check_horizon();

}  // namespace permadde
