#include "permadde/time_function.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

#include "permadde/error.hpp"

namespace permadde {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TimeFunction TimeFunction::constant(double c) {
  Shape s = Constant{c};
  return TimeFunction(s, derived_extrema(s));
}

TimeFunction TimeFunction::sinusoid(double a, double b, double omega, double phase) {
  Shape s = Sinusoid{a, b, omega, phase};
  return TimeFunction(s, derived_extrema(s));
}

TimeFunction TimeFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) {
    throw Error(ErrorCode::BadParams, "piecewise-linear function needs at least one knot");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first)) {
      throw Error(ErrorCode::BadParams, "piecewise-linear knots must have increasing times");
    }
  }
  Shape s = PiecewiseLinear{std::move(knots)};
  return TimeFunction(s, derived_extrema(s));
}

TimeFunction TimeFunction::with_extrema(Extrema e) const { return TimeFunction(shape_, e); }

Extrema TimeFunction::derived_extrema(const Shape& shape) {
  return std::visit(
      overloaded{
          [](const Constant& c) { return Extrema{c.value, c.value, c.value, c.value}; },
          [](const Sinusoid& s) {
            if (s.omega == 0.0) {
              double v = s.a + s.b * std::sin(s.phase);
              return Extrema{v, v, v, v};
            }
            double amp = std::abs(s.b);
            return Extrema{s.a - amp, s.a + amp, s.a - amp, s.a + amp};
          },
          [](const PiecewiseLinear& p) {
            auto [lo, hi] = std::minmax_element(
                p.knots.begin(), p.knots.end(),
                [](const auto& l, const auto& r) { return l.second < r.second; });
            double last = p.knots.back().second;
            return Extrema{lo->second, hi->second, last, last};
          },
      },
      shape);
}

double TimeFunction::operator()(double t) const {
  return std::visit(
      overloaded{
          [](const Constant& c) { return c.value; },
          [t](const Sinusoid& s) { return s.a + s.b * std::sin(s.omega * t + s.phase); },
          [t](const PiecewiseLinear& p) {
            const auto& k = p.knots;
            if (t <= k.front().first) return k.front().second;
            if (t >= k.back().first) return k.back().second;
            auto it = std::upper_bound(k.begin(), k.end(), t,
                                       [](double v, const auto& knot) { return v < knot.first; });
            const auto& [t1, v1] = *it;
            const auto& [t0, v0] = *(it - 1);
            double w = (t - t0) / (t1 - t0);
            return v0 + w * (v1 - v0);
          },
      },
      shape_);
}

TimeFunctionKind TimeFunction::kind() const {
  return static_cast<TimeFunctionKind>(shape_.index());
}

std::optional<double> TimeFunction::period() const {
  if (const auto* s = std::get_if<Sinusoid>(&shape_); s && s->omega != 0.0 && s->b != 0.0) {
    return 2.0 * std::numbers::pi / std::abs(s->omega);
  }
  return std::nullopt;
}

std::optional<double> TimeFunction::settles_after() const {
  if (const auto* p = std::get_if<PiecewiseLinear>(&shape_)) return p->knots.back().first;
  return std::nullopt;
}

std::string to_string(TimeFunctionKind kind) {
  switch (kind) {
    case TimeFunctionKind::constant: return "constant";
    case TimeFunctionKind::sinusoid: return "sinusoid";
    case TimeFunctionKind::piecewise_linear: return "piecewise-linear";
  }
  return "unknown";
}

double check_horizon() {
  constexpr double kDefault = 200.0;
  const char* env = std::getenv("PERMADDE_CHECK_HORIZON");
  if (env == nullptr) return kDefault;
  std::string_view sv(env);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size() || !(v > 0.0) || !std::isfinite(v)) {
    return kDefault;
  }
  return v;
}

}  // namespace permadde
