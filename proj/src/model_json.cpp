#include "permadde/model_json.hpp"

#include <charconv>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "permadde/error.hpp"

namespace permadde {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) fail(where + ": unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where + ": missing '" + key + "'");
  if (!it->is_number()) fail(where + "." + key + ": expected a number");
  return it->get<double>();
}

const json& member(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where + ": missing '" + key + "'");
  return *it;
}

TimeFunction time_function_at(const json& j, const std::string& where) {
  if (j.is_number()) return TimeFunction::constant(j.get<double>());
  reject_unknown(j, {"kind", "params", "inf", "sup", "tail_liminf", "tail_limsup"}, where);
  const json& kind = member(j, "kind", where);
  if (!kind.is_string()) fail(where + ".kind: expected a string");
  const json& params = member(j, "params", where);
  const std::string pw = where + ".params";

  TimeFunction f;
  const auto k = kind.get<std::string>();
  try {
    if (k == "constant") {
      reject_unknown(params, {"value"}, pw);
      f = TimeFunction::constant(number(params, "value", pw));
    } else if (k == "sinusoid") {
      reject_unknown(params, {"a", "b", "omega", "phase"}, pw);
      double phase = params.contains("phase") ? number(params, "phase", pw) : 0.0;
      f = TimeFunction::sinusoid(number(params, "a", pw), number(params, "b", pw),
                                 number(params, "omega", pw), phase);
    } else if (k == "piecewise-linear") {
      reject_unknown(params, {"knots"}, pw);
      const json& knots = member(params, "knots", pw);
      if (!knots.is_array()) fail(pw + ".knots: expected an array");
      std::vector<std::pair<double, double>> pts;
      for (const auto& knot : knots) {
        if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() || !knot[1].is_number()) {
          fail(pw + ".knots: each knot must be [t, value]");
        }
        pts.emplace_back(knot[0].get<double>(), knot[1].get<double>());
      }
      f = TimeFunction::piecewise_linear(std::move(pts));
    } else {
      fail(where + ".kind: unknown kind '" + k + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    fail(where + ": " + e.what());
  }

  Extrema e = f.extrema();
  bool declared = false;
  for (auto [key, slot] : {std::pair{"inf", &e.inf}, std::pair{"sup", &e.sup},
                           std::pair{"tail_liminf", &e.tail_liminf},
                           std::pair{"tail_limsup", &e.tail_limsup}}) {
    if (j.contains(key)) {
      *slot = number(j, key, where);
      declared = true;
    }
  }
  return declared ? f.with_extrema(e) : f;
}

RecruitmentKind kind_from_string(const std::string& s, const std::string& where) {
  for (auto k : {RecruitmentKind::linear, RecruitmentKind::beverton_holt, RecruitmentKind::ricker,
                 RecruitmentKind::capped_ricker}) {
    if (to_string(k) == s) return k;
  }
  fail(where + ": unknown recruitment kind '" + s + "'");
}

}  // namespace

json to_json(const TimeFunction& f) {
  json j;
  j["kind"] = to_string(f.kind());
  if (const auto* c = std::get_if<Constant>(&f.shape())) {
    j["params"] = {{"value", c->value}};
  } else if (const auto* s = std::get_if<Sinusoid>(&f.shape())) {
    j["params"] = {{"a", s->a}, {"b", s->b}, {"omega", s->omega}, {"phase", s->phase}};
  } else {
    json knots = json::array();
    for (const auto& [t, v] : std::get<PiecewiseLinear>(f.shape()).knots) knots.push_back({t, v});
    j["params"] = {{"knots", knots}};
  }
  j["inf"] = f.inf();
  j["sup"] = f.sup();
  j["tail_liminf"] = f.tail_liminf();
  j["tail_limsup"] = f.tail_limsup();
  return j;
}

TimeFunction time_function_from_json(const json& j) { return time_function_at(j, "$"); }

json to_json(const ModelSpec& model) {
  json terms = json::array();
  for (const auto& term : model.recruitment) {
    json t;
    t["kind"] = to_string(term.kind);
    t["alpha"] = to_json(term.alpha);
    if (term.kind == RecruitmentKind::beverton_holt) t["beta"] = to_json(term.beta);
    json atoms = json::array();
    for (const auto& atom : term.delay.atoms) {
      atoms.push_back({{"lag", to_json(atom.lag)}, {"weight", atom.weight}});
    }
    t["delay"] = atoms;
    terms.push_back(t);
  }
  return {{"rho", to_json(model.rho)},
          {"recruitment", terms},
          {"mortality", {{"mu", to_json(model.mortality.mu)}, {"kappa", to_json(model.mortality.kappa)}}},
          {"tau_max", model.tau_max}};
}

ModelSpec model_from_json(const json& j) {
  reject_unknown(j, {"rho", "recruitment", "mortality", "tau_max"}, "$");
  ModelSpec model;
  if (j.contains("rho")) model.rho = time_function_at(j["rho"], "$.rho");
  model.tau_max = number(j, "tau_max", "$");

  const json& terms = member(j, "recruitment", "$");
  if (!terms.is_array() || terms.empty()) fail("$.recruitment: expected a nonempty array");
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::string where = "$.recruitment[" + std::to_string(k) + "]";
    const json& t = terms[k];
    reject_unknown(t, {"kind", "alpha", "beta", "delay"}, where);
    const json& kind = member(t, "kind", where);
    if (!kind.is_string()) fail(where + ".kind: expected a string");

    RecruitmentTerm term;
    term.kind = kind_from_string(kind.get<std::string>(), where + ".kind");
    term.alpha = time_function_at(member(t, "alpha", where), where + ".alpha");
    if (term.kind == RecruitmentKind::beverton_holt) {
      term.beta = t.contains("beta") ? time_function_at(t["beta"], where + ".beta")
                                     : TimeFunction::constant(0.0);
    } else if (t.contains("beta")) {
      fail(where + ": 'beta' is only meaningful for beverton-holt terms");
    }

    const json& delay = member(t, "delay", where);
    if (!delay.is_array()) fail(where + ".delay: expected an array");
    for (std::size_t a = 0; a < delay.size(); ++a) {
      const std::string aw = where + ".delay[" + std::to_string(a) + "]";
      reject_unknown(delay[a], {"lag", "weight"}, aw);
      double w = delay[a].contains("weight") ? number(delay[a], "weight", aw) : 1.0;
      term.delay.atoms.push_back({time_function_at(member(delay[a], "lag", aw), aw + ".lag"), w});
    }
    model.recruitment.push_back(std::move(term));
  }

  const json& mort = member(j, "mortality", "$");
  reject_unknown(mort, {"mu", "kappa"}, "$.mortality");
  model.mortality.mu = mort.contains("mu") ? time_function_at(mort["mu"], "$.mortality.mu")
                                           : TimeFunction::constant(0.0);
  model.mortality.kappa = mort.contains("kappa")
                              ? time_function_at(mort["kappa"], "$.mortality.kappa")
                              : TimeFunction::constant(0.0);
  return model;
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

void save_model(const ModelSpec& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

namespace {

std::vector<double> numbers_csv(std::string_view s) {
  std::vector<double> out;
  while (!s.empty()) {
    auto comma = s.find(',');
    auto item = s.substr(0, comma);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      fail("history: '" + std::string(item) + "' is not a number");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

HistorySpec parse_history(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) fail("history: expected const:, sin: or table:");
  auto kind = text.substr(0, colon);
  auto rest = text.substr(colon + 1);

  if (kind == "const") {
    auto v = numbers_csv(rest);
    if (v.size() != 1) fail("history: const takes one value");
    return HistorySpec::constant(v[0]);
  }
  if (kind == "sin") {
    bool clip = false;
    constexpr std::string_view kClip = ",clip";
    if (rest.size() > kClip.size() && rest.substr(rest.size() - kClip.size()) == kClip) {
      clip = true;
      rest.remove_suffix(kClip.size());
    }
    auto v = numbers_csv(rest);
    if (v.size() != 4) fail("history: sin takes a,b,omega,phase");
    return HistorySpec{SinusoidHistory{v[0], v[1], v[2], v[3], clip}};
  }
  if (kind == "table") {
    std::ifstream in{std::string(rest)};
    if (!in) fail("history: cannot open " + std::string(rest));
    TabulatedHistory tab;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) {
        continue;
      }
      auto v = numbers_csv(line);
      if (v.size() != 2) fail("history table rows must be theta,value");
      if (!tab.knots.empty() && !(v[0] > tab.knots.back().first)) {
        fail("history table must have increasing theta");
      }
      tab.knots.emplace_back(v[0], v[1]);
    }
    if (tab.knots.empty()) fail("history table is empty");
    return HistorySpec{std::move(tab)};
  }
  fail("history: unknown kind '" + std::string(kind) + "'");
}

}  // namespace permadde
