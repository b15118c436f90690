#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "permadde/bounds.hpp"
#include "permadde/error.hpp"
#include "permadde/presets.hpp"

using namespace permadde;

namespace {

ModelSpec quadratic_sinusoid() {
  return preset("bastinec-quadratic",
                {{"alpha", {2}}, {"alpha_amp", {1}}, {"omega", {1}}, {"beta", {1}}, {"tau", {1}}});
}

ModelSpec bh_constant() {
  return preset("bh-logistic", {{"alpha", {2}}, {"beta", {1}}, {"mu", {0}}, {"kappa", {1}}});
}

ModelSpec nicholson_sinusoid() {
  return preset("nicholson", {{"beta", {2}}, {"beta_amp", {0.5}}, {"omega", {1}}, {"d", {1}}});
}

double margin(const ModelSpec& m, std::string_view name) {
  return check_hypothesis(m, name, detect_family(m)).margin;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::BadParams;
}

}  // namespace

TEST_CASE("family detection") {
  CHECK(detect_family(quadratic_sinusoid()) == Family::quadratic);
  CHECK(detect_family(bh_constant()) == Family::beverton_holt);
  CHECK(detect_family(nicholson_sinusoid()) == Family::nicholson);
  CHECK(detect_family(preset("bh-logistic", {{"alpha", {2}}, {"mu", {0}}})) == Family::quadratic);
  CHECK(detect_family(preset("bh-logistic", {{"alpha", {2}}, {"mu", {0.5}}})) ==
        Family::beverton_holt);
  ModelSpec mixed = bh_constant();
  mixed.recruitment.push_back(nicholson_sinusoid().recruitment[0]);
  CHECK(detect_family(mixed) == Family::general);
  for (auto f : {Family::quadratic, Family::beverton_holt, Family::nicholson, Family::general}) {
    CHECK(family_from_string(to_string(f)) == f);
  }
}

TEST_CASE("nicholson margins") {
  ModelSpec m = nicholson_sinusoid();
  CHECK(std::abs(margin(m, hypothesis::nicholson_lower) - 0.5) < 1e-12);
  CHECK(std::abs(margin(m, hypothesis::nicholson_upper) - (M_E - 2.5)) < 1e-12);
}

TEST_CASE("growth equal to mortality fails with margin zero") {
  ModelSpec m = preset("bh-logistic", {{"alpha", {1, 1}}, {"mu", {2}}, {"beta", {1}}});
  Verdict v = check_hypothesis(m, hypothesis::growth_exceeds_mortality, Family::beverton_holt);
  CHECK(v.margin == 0.0);
  CHECK_FALSE(v.pass);
}

TEST_CASE("h1 margins for constant coefficients") {
  ModelSpec m = preset("bastinec-quadratic", {{"alpha", {1.5}}, {"beta", {0.7}}});
  Verdict v = check_hypothesis(m, hypothesis::h1, Family::quadratic);
  CHECK(v.pass);
  CHECK(v.margin == 0.7);
}

TEST_CASE("inapplicable hypotheses are rejected") {
  CHECK(code_of([] {
          check_hypothesis(quadratic_sinusoid(), hypothesis::nicholson_lower, Family::quadratic);
        }) == ErrorCode::FamilyMismatch);
  CHECK(code_of([] {
          check_hypothesis(quadratic_sinusoid(), hypothesis::h1, Family::nicholson);
        }) == ErrorCode::FamilyMismatch);
}

TEST_CASE("quadratic envelopes") {
  EnvelopePair env = build_envelopes(quadratic_sinusoid());
  CHECK(env.upper.recruitment[0].alpha(0.3) == 3.0);
  CHECK(env.lower.recruitment[0].alpha(0.3) == 1.0);
  CHECK(env.upper.mortality.kappa(0.0) == 1.0);
  CHECK(env.upper.autonomous_coefficients());
  CHECK(env.lower.cooperative());
}

TEST_CASE("nicholson envelopes use the capped hump") {
  EnvelopePair env = build_envelopes(nicholson_sinusoid());
  CHECK(env.upper.recruitment[0].kind == RecruitmentKind::capped_ricker);
  CHECK(env.lower.recruitment[0].kind == RecruitmentKind::capped_ricker);
  CHECK(env.upper.recruitment[0].alpha(0) == 2.5);
  CHECK(env.lower.recruitment[0].alpha(0) == 1.5);
}

TEST_CASE("envelopes of a constant model are the model") {
  ModelSpec m = bh_constant();
  EnvelopePair env = build_envelopes(m);
  for (double x : {0.0, 0.3, 1.0, 4.0}) {
    for (double y : {0.0, 0.5, 2.0}) {
      std::vector<double> d{y};
      CHECK(eval_rhs(env.lower, 1.0, x, d) == eval_rhs(m, 1.0, x, d));
      CHECK(eval_rhs(env.upper, 1.0, x, d) == eval_rhs(m, 1.0, x, d));
    }
  }
}

TEST_CASE("envelopes are unavailable without crowding or mortality") {
  ModelSpec m = quadratic_sinusoid();
  m.mortality.kappa = TimeFunction::constant(0.0);
  CHECK(code_of([&] { build_envelopes(m); }) == ErrorCode::EnvelopeUnavailable);
  ModelSpec n = nicholson_sinusoid();
  n.recruitment[0].alpha = TimeFunction::sinusoid(3.0, 0.5, 1.0);
  CHECK(code_of([&] { build_envelopes(n); }) == ErrorCode::EnvelopeUnavailable);
}

TEST_CASE("envelope soundness on random samples") {
  std::vector<ModelSpec> models{
      quadratic_sinusoid(),
      preset("bh-logistic", {{"alpha", {2, 1}}, {"alpha_amp", {0.5, 0.2}}, {"beta", {1, 0.5}},
                             {"beta_amp", {0.3, 0.1}}, {"mu", {0.4}}, {"mu_amp", {0.2}},
                             {"kappa", {1}}, {"kappa_amp", {0.5}}, {"omega", {1.7}}}),
      nicholson_sinusoid(),
      preset("nicholson", {{"beta", {1.2, 0.8}}, {"beta_amp", {0.2, 0.1}}, {"d", {1.4}},
                           {"d_amp", {0.1}}}),
  };
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> t(0.0, 500.0), x(0.0, 10.0), y(0.0, 10.0), y1(0.0, 1.0);
  for (const auto& m : models) {
    EnvelopePair env = build_envelopes(m);
    bool ricker = !m.cooperative();
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      double ti = t(rng), xi = x(rng);
      std::vector<double> d;
      // The lower capped envelope minorises y e^-y only for y <= 1.
      for (std::size_t k = 0; k < m.recruitment.size(); ++k) d.push_back(ricker ? y1(rng) : y(rng));
      double f = eval_rhs(m, ti, xi, d);
      if (!(eval_rhs(env.lower, ti, xi, d) <= f && f <= eval_rhs(env.upper, ti, xi, d))) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("positive roots") {
  CHECK(positive_root([](double x) { return M_E * std::exp(-x) - 1; }) ==
        doctest::Approx(1.0).epsilon(1e-11));
  CHECK(positive_root([](double x) { return 2 / (1 + x) - x; }) ==
        doctest::Approx(1.0).epsilon(1e-11));
  CHECK(code_of([] { positive_root([](double x) { return -1 - x; }); }) == ErrorCode::BadParams);
  CHECK(code_of([] { positive_root([](double) { return 1.0; }); }) == ErrorCode::NoSignChange);
}

TEST_CASE("root residual is within the local slope times 1e-11") {
  std::vector<std::function<double(double)>> gs{
      [](double x) { return M_E * std::exp(-x) - 1; },
      [](double x) { return 2 / (1 + x) - x; },
      [](double x) { return 3 - x - x * x; },
      [](double x) { return 5 * std::exp(-x) - 0.5 - 0.1 * x; },
      [](double x) { return 1e4 - x; },
  };
  for (const auto& g : gs) {
    double r = positive_root(g);
    double slope = std::abs(g(r + 1e-6) - g(r - 1e-6)) / 2e-6;
    CHECK(std::abs(g(r)) <= slope * 1e-11);
    CHECK(std::abs(r - oracle::bisect(g, 0.0, 2e4)) < 1e-10 * std::max(1.0, r));
  }
}

TEST_CASE("equilibrium bounds") {
  auto q = equilibrium_bounds(build_envelopes(quadratic_sinusoid()));
  CHECK(std::abs(q.K_l - 1.0) < 1e-10);
  CHECK(std::abs(q.K_u - 3.0) < 1e-10);
  auto b = equilibrium_bounds(build_envelopes(bh_constant()));
  CHECK(std::abs(b.K_l - 1.0) < 1e-10);
  CHECK(std::abs(b.K_u - 1.0) < 1e-10);
  auto n = equilibrium_bounds(build_envelopes(nicholson_sinusoid()));
  CHECK(std::abs(n.K_l - std::log(1.5)) < 1e-10);
  CHECK(std::abs(n.K_u - std::log(2.5)) < 1e-10);
  auto e = equilibrium_bounds(build_envelopes(preset("bh-logistic", {{"alpha", {1}}, {"mu", {2}}})));
  CHECK(e.K_l == 0.0);
}

TEST_CASE("closed forms against sampled oracles") {
  auto q = closed_form_bounds(quadratic_sinusoid());
  CHECK(std::abs(q.m0 - 1.0) < 1e-6);
  CHECK(std::abs(q.M0 - 3.0) < 1e-6);

  auto b = closed_form_bounds(bh_constant());
  CHECK(b.M0 == 2.0);
  CHECK(b.m0 == 2.0 / 3.0);

  auto n = closed_form_bounds(nicholson_sinusoid());
  CHECK(std::abs(n.m0 - std::log(1.5)) < 1e-6);
  CHECK(std::abs(n.M0 - std::log(2.5)) < 1e-6);

  // Incommensurate frequencies: the ratio's extrema are not those of its parts.
  // The engine samples [100, 200] (100 time units exceed eight periods here).
  ModelSpec m = preset("bastinec-quadratic", {{"alpha", {2}}, {"alpha_amp", {1}}, {"omega", {1}},
                                              {"beta", {1.5}}});
  m.mortality.kappa = TimeFunction::sinusoid(1.5, 0.5, std::sqrt(2.0));
  auto ratio = [](double t) { return (2 + std::sin(t)) / (1.5 + 0.5 * std::sin(std::sqrt(2.0) * t)); };
  auto r = closed_form_bounds(m);
  CHECK(r.m0 == doctest::Approx(oracle::grid_extremum(ratio, 100, 200, false)).epsilon(1e-9));
  CHECK(r.M0 == doctest::Approx(oracle::grid_extremum(ratio, 100, 200, true)).epsilon(1e-9));
  CHECK(r.m0 > 1.0 / 2.0);
  CHECK(r.M0 < 3.0 / 1.0);
}

TEST_CASE("general family has no closed form") {
  ModelSpec mixed = bh_constant();
  mixed.recruitment.push_back(nicholson_sinusoid().recruitment[0]);
  CHECK(code_of([&] { closed_form_bounds(mixed); }) == ErrorCode::UnsupportedFamily);
  CHECK(code_of([&] { closed_form_bounds(nicholson_sinusoid(), Family::quadratic); }) ==
        ErrorCode::FamilyMismatch);
}

TEST_CASE("beta-free BH reduces to the quadratic formulas exactly") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    ModelSpec m = preset("bh-logistic", {{"alpha", {1 + 2 * u(rng)}}, {"alpha_amp", {0.5 * u(rng)}},
                                         {"omega", {0.5 + u(rng)}}, {"kappa", {0.6 + u(rng)}},
                                         {"kappa_amp", {0.5 * u(rng)}}});
    auto q = closed_form_bounds(m, Family::quadratic);
    auto b = closed_form_bounds(m, Family::beverton_holt);
    CHECK(q.m0 == b.m0);
    CHECK(q.M0 == b.M0);
  }
}

TEST_CASE("reports") {
  BoundsReport q = bounds_report(quadratic_sinusoid());
  CHECK(q.permanent);
  CHECK(q.certified_lo == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(q.certified_hi == doctest::Approx(3.0).epsilon(1e-6));

  BoundsReport b = bounds_report(bh_constant());
  CHECK(b.permanent);
  CHECK(std::abs(b.certified_lo - 1.0) < 1e-10);
  CHECK(std::abs(b.certified_hi - 1.0) < 1e-10);

  BoundsReport n = bounds_report(nicholson_sinusoid());
  CHECK(n.permanent);
  CHECK_FALSE(n.warnings.empty());

  BoundsReport e = bounds_report(preset("bh-logistic", {{"alpha", {1}}, {"mu", {2}}}));
  CHECK_FALSE(e.permanent);
  REQUIRE(e.K_l);
  CHECK(*e.K_l == 0.0);
  CHECK_FALSE(e.find(hypothesis::growth_exceeds_mortality)->pass);
}

TEST_CASE("BH ordering m0 <= K_l") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 30; ++i) {
    ModelSpec m = preset("bh-logistic", {{"alpha", {1 + 3 * u(rng), 0.5 + u(rng)}},
                                         {"alpha_amp", {0.5 * u(rng), 0.3 * u(rng)}},
                                         {"beta", {0.2 + u(rng), 2 * u(rng)}},
                                         {"beta_amp", {0.1 * u(rng), 0.1 * u(rng)}},
                                         {"mu", {0.5 * u(rng)}}, {"kappa", {0.5 + u(rng)}},
                                         {"kappa_amp", {0.3 * u(rng)}}, {"omega", {0.5 + u(rng)}}});
    BoundsReport r = bounds_report(m);
    bool all = true;
    for (const auto& v : r.hypotheses) all = all && v.pass;
    if (!all) continue;
    ++checked;
    REQUIRE(r.m0);
    REQUIRE(r.K_l);
    CHECK(*r.m0 <= *r.K_l + 1e-12);
    CHECK(r.certified_lo <= r.certified_hi);
  }
  CHECK(checked > 10);
}

TEST_CASE("scaling rho leaves the bounds alone") {
  for (ModelSpec m : {quadratic_sinusoid(), bh_constant(), nicholson_sinusoid()}) {
    BoundsReport a = bounds_report(m);
    m.rho = TimeFunction::constant(3.7);
    BoundsReport b = bounds_report(m);
    CHECK(a.m0 == b.m0);
    CHECK(a.M0 == b.M0);
    CHECK(a.K_l == b.K_l);
    CHECK(a.K_u == b.K_u);
  }
}

TEST_CASE("failing rho floor clears certification") {
  ModelSpec m = quadratic_sinusoid();
  m.rho = TimeFunction::constant(0.0);
  BoundsReport r = bounds_report(m);
  CHECK_FALSE(r.permanent);
  CHECK_FALSE(r.find(hypothesis::rho_floor)->pass);
}

TEST_CASE("report JSON round trip") {
  for (const auto& m : {quadratic_sinusoid(), nicholson_sinusoid(),
                        preset("bh-logistic", {{"alpha", {1}}, {"mu", {2}}})}) {
    BoundsReport r = bounds_report(m);
    nlohmann::json j = to_json(r);
    CHECK(to_json(bounds_report_from_json(j)) == j);
  }
}
