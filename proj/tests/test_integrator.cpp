#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "permadde/bounds.hpp"
#include "permadde/error.hpp"
#include "permadde/integrator.hpp"
#include "permadde/presets.hpp"

using namespace permadde;

namespace {

SolverConfig config(double h, double T) {
  SolverConfig c;
  c.h = h;
  c.T = T;
  return c;
}

ModelSpec pure_decay() {
  ModelSpec m;
  m.recruitment.push_back({RecruitmentKind::linear, TimeFunction::constant(0.0), {},
                           DelayTerm::point(1.0)});
  m.mortality = {TimeFunction::constant(1.0), TimeFunction::constant(0.0)};
  return m;
}

std::vector<ModelSpec> preset_zoo() {
  return {
      preset("bastinec-quadratic", {{"alpha", {2}}, {"alpha_amp", {1}}, {"beta", {1}}}),
      preset("bastinec-constant", {{"alpha", {1, 0.5}}, {"beta", {0.8}}, {"tau", {0.3, 1.0}},
                                   {"rho", {1}}, {"rho_amp", {0.5}}}),
      preset("bh-logistic", {{"alpha", {2}}, {"alpha_amp", {0.5}}, {"beta", {1}}, {"mu", {0.2}},
                             {"tau_amp", {0.5}}, {"tau", {0.5}}}),
      preset("arino", {{"gamma", {3}}, {"mu", {0.5}}, {"kappa", {1}}, {"tau", {1}}}),
      preset("nicholson", {{"beta", {2}}, {"beta_amp", {0.5}}, {"d", {1}}}),
      preset("nicholson-autonomous", {{"beta", {M_E}}, {"d", {1}}, {"tau", {0.5}}}),
  };
}

/// Admissible histories drawn independently of the library's ensemble code.
HistorySpec draw_history(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double level = std::pow(10.0, -1.5 + 2.5 * u(rng));
  if (u(rng) < 0.5) return HistorySpec::constant(level);
  return HistorySpec{SinusoidHistory{level, 2.0 * level * u(rng), 1.0 + 5.0 * u(rng), M_PI / 2, true}};
}

}  // namespace

TEST_CASE("equilibrium history stays at the equilibrium") {
  ModelSpec m = preset("bastinec-constant", {{"alpha", {1.5, 0.5}}, {"beta", {0.5}},
                                             {"tau", {0.4, 0.8}}, {"tau_amp", {0.2, 0.1}}});
  double K = (1.5 + 0.5) / 0.5;
  Trajectory traj = integrate(m, HistorySpec::constant(K), config(0.01, 100));
  for (std::size_t i = 0; i < traj.size(); ++i) CHECK(std::abs(traj.value(i) - K) < 1e-9);
}

TEST_CASE("zero history stays at zero") {
  for (const auto& m : preset_zoo()) {
    Trajectory traj = integrate(m, HistorySpec::constant(0.0), config(0.01, 20));
    for (double v : traj.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("nicholson autonomous agrees with a fine Euler oracle") {
  ModelSpec m = preset("nicholson-autonomous", {{"beta", {M_E}}, {"d", {1}}, {"tau", {0.5}}});
  Trajectory traj = integrate(m, HistorySpec::constant(0.5), config(0.01, 100));

  auto ref = oracle::euler(
      [](double t, double x, const oracle::Past& past) {
        double y = past(t - 0.5);
        return -x + M_E * y * std::exp(-y);
      },
      [](double) { return 0.5; }, 1e-4, 100.0);
  CHECK(std::abs(traj.final_value() - ref.back()) < 1e-4);
  CHECK(std::abs(traj.final_value() - 1.0) < 1e-4);
}

TEST_CASE("time-varying lag agrees with a Heun oracle") {
  ModelSpec m = preset("bh-logistic", {{"alpha", {2}}, {"alpha_amp", {0.5}}, {"omega", {1.3}},
                                       {"beta", {1}}, {"mu", {0.2}}, {"tau", {0.6}},
                                       {"tau_amp", {0.3}}, {"tau_omega", {2}}});
  Trajectory traj = integrate(m, HistorySpec::constant(0.3), config(0.01, 30));
  auto ref = oracle::heun(
      [](double t, double x, const oracle::Past& past) {
        double y = past(t - (0.6 + 0.3 * std::sin(2 * t)));
        double a = 2 + 0.5 * std::sin(1.3 * t);
        return a * y / (1 + y) - 0.2 * x - x * x;
      },
      [](double) { return 0.3; }, 1e-3, 30.0);
  CHECK(std::abs(traj.final_value() - ref.back()) < 1e-5);
}

TEST_CASE("history segment holds exact samples") {
  HistorySpec phi{SinusoidHistory{1.0, 0.5, 3.0, 0.2, false}};
  ModelSpec m = preset("bastinec-quadratic", {{"alpha", {2}}});
  Trajectory traj = integrate(m, phi, config(0.01, 5));
  CHECK(traj.start_time() == doctest::Approx(-1.0));
  for (std::size_t i = 0; i <= traj.zero_index(); ++i) CHECK(traj.value(i) == phi(traj.time(i)));
}

TEST_CASE("sampling: nodes exact, constant trajectory constant, range checked") {
  ModelSpec m = preset("bastinec-constant", {{"alpha", {2}}, {"beta", {1}}});
  Trajectory eq = integrate(m, HistorySpec::constant(2.0), config(0.01, 20));
  CHECK(sample_trajectory(eq, 3.14159) == doctest::Approx(2.0).epsilon(1e-12));

  Trajectory traj = integrate(m, HistorySpec::constant(0.5), config(0.01, 20));
  for (std::size_t i = 0; i < traj.size(); i += 37) {
    CHECK(sample_trajectory(traj, traj.time(i)) == traj.value(i));
  }
  CHECK_THROWS_AS(sample_trajectory(traj, 20.5), Error);
  CHECK_THROWS_AS(sample_trajectory(traj, -1.5), Error);
}

TEST_CASE("midpoint samples agree with an h/10 run") {
  ModelSpec m = preset("bh-logistic", {{"alpha", {2}}, {"alpha_amp", {0.5}}, {"beta", {1}},
                                       {"tau", {0.7}}});
  double h = 0.01;
  Trajectory coarse = integrate(m, HistorySpec::constant(0.2), config(h, 10));
  Trajectory fine = integrate(m, HistorySpec::constant(0.2), config(h / 10, 10));
  double worst = 0.0;
  for (double t = 0.005; t < 10.0; t += 0.1) {
    worst = std::max(worst, std::abs(sample_trajectory(coarse, t) - sample_trajectory(fine, t)));
  }
  CHECK(worst < 10 * std::pow(h, 4));
}

TEST_CASE("order on pure decay against the exact solution") {
  auto est = observed_order(pure_decay(), HistorySpec::constant(1.0), 0.1, 5.0, std::exp(-5.0));
  REQUIRE(est.order);
  CHECK(*est.order == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("self-convergence with a constant delay is at least third order") {
  ModelSpec m = preset("bh-logistic", {{"alpha", {2}}, {"beta", {1}}, {"tau", {1}}});
  auto est = self_convergence_order(m, HistorySpec::constant(0.2), 0.05, 10.0);
  REQUIRE(est.order);
  CHECK(*est.order >= 3.0);
}

TEST_CASE("equilibrium history gives a degenerate order estimate") {
  ModelSpec m = preset("bastinec-constant", {{"alpha", {2}}, {"beta", {1}}});
  auto est = self_convergence_order(m, HistorySpec::constant(2.0), 0.05, 10.0);
  CHECK(est.degenerate);
  CHECK_FALSE(est.order);
}

TEST_CASE("vanishing lag is integrated like the undelayed equation") {
  ModelSpec m = preset("bh-logistic", {{"alpha", {2}}, {"beta", {1}}, {"tau", {0}}});
  Trajectory traj = integrate(m, HistorySpec::constant(0.1), config(0.01, 5));
  auto ref = oracle::heun(
      [](double, double x, const oracle::Past&) { return 2 * x / (1 + x) - x * x; },
      [](double) { return 0.1; }, 1e-4, 5.0);
  CHECK(std::abs(traj.final_value() - ref.back()) < 1e-6);
}

TEST_CASE("positivity over random admissible histories") {
  std::mt19937_64 rng(2024);
  for (const auto& m : preset_zoo()) {
    for (int i = 0; i < 20; ++i) {
      Trajectory traj = integrate(m, draw_history(rng), config(0.01, 40));
      bool positive = true;
      for (std::size_t j = traj.zero_index() + 1; j < traj.size(); ++j) {
        positive = positive && traj.value(j) > 0.0;
      }
      CHECK(positive);
    }
  }
}

TEST_CASE("monotone comparison for cooperative models") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : preset_zoo()) {
    if (!m.cooperative()) continue;
    for (int i = 0; i < 4; ++i) {
      HistorySpec lo = draw_history(rng);
      double lift = 0.5 * u(rng);
      TabulatedHistory raised;
      for (int k = 0; k <= 400; ++k) {
        double th = -m.tau_max + m.tau_max * k / 400.0;
        raised.knots.push_back({th, lo(th) + lift});
      }
      HistorySpec hi{raised};
      Trajectory a = integrate(m, lo, config(0.01, 30));
      Trajectory b = integrate(m, hi, config(0.01, 30));
      double worst = 0.0;
      for (std::size_t j = a.zero_index(); j < a.size(); ++j) {
        worst = std::max(worst, a.value(j) - b.value(j));
      }
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("dissipativity bound") {
  std::mt19937_64 rng(7);
  for (const auto& m : preset_zoo()) {
    auto report = bounds_report(m);
    if (!report.permanent || !report.K_u) continue;
    for (int i = 0; i < 5; ++i) {
      HistorySpec phi = draw_history(rng);
      Trajectory traj = integrate(m, phi, config(0.01, 40));
      double cap = 2.0 * std::max(*report.K_u, phi.sup_norm(m.tau_max));
      double peak = 0.0;
      for (double v : traj.values()) peak = std::max(peak, v);
      CHECK(peak < cap);
    }
  }
}

TEST_CASE("determinism") {
  ModelSpec m = preset("nicholson", {{"beta", {2}}, {"beta_amp", {0.5}}, {"tau_amp", {0.4}},
                                     {"tau", {0.5}}});
  HistorySpec phi{SinusoidHistory{0.7, 0.3, 2.0, 0.1, true}};
  Trajectory a = integrate(m, phi, config(0.01, 50));
  Trajectory b = integrate(m, phi, config(0.01, 50));
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a.value(i) == b.value(i) && a.derivative(i) == b.derivative(i);
  }
  CHECK(same);
}

TEST_CASE("integration errors") {
  ModelSpec m = preset("bastinec-quadratic", {{"alpha", {2}}});
  HistorySpec negative{SinusoidHistory{0.0, 1.0, 1.0, 0.0, false}};
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::BadParams;
  };
  CHECK(code([&] { integrate(m, negative, config(0.01, 5)); }) == ErrorCode::InadmissibleHistory);

  ModelSpec broken = m;
  broken.tau_max = -1.0;
  CHECK(code([&] { integrate(broken, HistorySpec::constant(1), config(0.01, 5)); }) ==
        ErrorCode::InvalidModel);

  // Linear growth with no crowding term explodes in finite precision.
  ModelSpec growth = m;
  growth.recruitment[0].alpha = TimeFunction::constant(50.0);
  growth.mortality.kappa = TimeFunction::constant(0.0);
  growth.recruitment[0].delay = DelayTerm::point(0.0);
  CHECK(code([&] { integrate(growth, HistorySpec::constant(1), config(0.01, 100)); }) ==
        ErrorCode::NonFiniteValue);

  // A step far too large for strong crowding overshoots below zero.
  ModelSpec crowded = preset("bastinec-quadratic", {{"alpha", {0.01}}, {"beta", {1}}});
  ErrorCode c = code([&] { integrate(crowded, HistorySpec::constant(100), config(0.1, 10)); });
  CHECK((c == ErrorCode::PositivityLoss || c == ErrorCode::NonFiniteValue));
  CHECK_NOTHROW(integrate(crowded, HistorySpec::constant(1), config(0.1, 10)));
}

TEST_CASE("CSV export") {
  ModelSpec m = preset("bastinec-constant", {{"alpha", {2}}, {"beta", {1}}});
  Trajectory traj = integrate(m, HistorySpec::constant(2.0), config(0.5, 2));
  std::ostringstream plain, full;
  write_csv(traj, plain, 2);
  write_csv(traj, full, 1, true);
  std::string p = plain.str(), f = full.str();
  CHECK(p.rfind("t,x\n", 0) == 0);
  CHECK(f.rfind("t,x,f\n", 0) == 0);
  CHECK(std::count(f.begin(), f.end(), '\n') == static_cast<long>(traj.size()) + 1);
  CHECK(std::count(p.begin(), p.end(), '\n') < std::count(f.begin(), f.end(), '\n'));
}
