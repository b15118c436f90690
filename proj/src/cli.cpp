#include "permadde/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "permadde/asymptotics.hpp"
#include "permadde/bounds.hpp"
#include "permadde/error.hpp"
#include "permadde/integrator.hpp"
#include "permadde/model_json.hpp"
#include "permadde/presets.hpp"

namespace permadde::cli {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string model;
  std::string preset;
  std::string history;
  double h = 0.01;
  double T = 200.0;
  int stride = 1;
  bool with_f = false;
  int N = 10;
  std::uint64_t seed = 0;
  double tail_fraction = 0.25;
  std::optional<double> tol;
  double sandwich_tol = 1e-6;
  bool envelopes = false;
  std::string report;
  std::string param;
  std::string range;
  std::string out;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  int count = 2;

  double at(int i) const {
    return i == count - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
};

Range parse_range(const std::string& s) {
  auto a = s.find(':');
  auto b = a == std::string::npos ? a : s.find(':', a + 1);
  if (b == std::string::npos) throw Error(ErrorCode::BadParams, "--range expects lo:hi:count");
  auto num = [](std::string_view v, auto& out) {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
      throw Error(ErrorCode::BadParams, "--range: '" + std::string(v) + "' is not a number");
    }
  };
  std::string_view sv(s);
  Range r;
  num(sv.substr(0, a), r.lo);
  num(sv.substr(a + 1, b - a - 1), r.hi);
  num(sv.substr(b + 1), r.count);
  if (r.count < 2) throw Error(ErrorCode::BadParams, "--range count must be at least 2");
  return r;
}

/// A model source: either a preset reference (kept symbolic so sweeps can
/// vary preset parameters) or a JSON document.
struct ModelSource {
  std::optional<PresetRef> preset;
  json document;

  ModelSpec build() const {
    return preset ? permadde::preset(preset->name, preset->params) : model_from_json(document);
  }
  json as_json() const { return preset ? to_json(build()) : document; }
};

ModelSource resolve_model(const RunConfig& cfg) {
  std::string ref = !cfg.preset.empty() ? cfg.preset : cfg.model;
  if (ref.empty()) throw Error(ErrorCode::BadParams, "either --model or --preset is required");
  ModelSource src;
  if (!cfg.preset.empty() || ref.rfind("preset:", 0) == 0) {
    src.preset = parse_preset_ref(ref);
    src.build();  // surface UnknownPreset / BadParams early
    return src;
  }
  std::ifstream in(ref);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open model file " + ref);
  try {
    src.document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, ref + ": " + e.what());
  }
  model_from_json(src.document);
  return src;
}

HistorySpec resolve_history(const RunConfig& cfg, double fallback) {
  if (cfg.history.empty()) return HistorySpec::constant(fallback);
  return parse_history(cfg.history);
}

SolverConfig solver(const RunConfig& cfg) {
  SolverConfig s;
  s.h = cfg.h;
  s.T = cfg.T;
  s.record_stride = cfg.stride;
  return s;
}

void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (cfg.out.empty() || cfg.out == "-") {
    write(out);
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw Error(ErrorCode::ParseError, "cannot write " + cfg.out);
  write(f);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteValue:
    case ErrorCode::PositivityLoss: return kSolverFailure;
    case ErrorCode::NotCertified: return kNotCertified;
    default: return kInvalidInput;
  }
}

// ---------------------------------------------------------------------------

int cmd_model(const RunConfig& cfg, std::ostream& out) {
  ModelSpec model = resolve_model(cfg).build();
  emit(cfg, out, [&](std::ostream& o) { o << to_json(model).dump(2) << '\n'; });
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ModelSpec model = resolve_model(cfg).build();
  HistorySpec history = resolve_history(cfg, 1.0);
  Trajectory traj = integrate(model, history, solver(cfg));
  for (const auto& w : traj.warnings()) err << "warning: " << w << '\n';
  emit(cfg, out, [&](std::ostream& o) { write_csv(traj, o, cfg.stride, cfg.with_f); });
  return kOk;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  BoundsReport report = bounds_report(resolve_model(cfg).build());
  emit(cfg, out, [&](std::ostream& o) { o << to_json(report).dump(2) << '\n'; });
  if (!report.permanent) err << "permanence not certified\n";
  return report.permanent ? kOk : kNotCertified;
}

BoundsReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open report " + path);
  try {
    return bounds_report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.N < 1) throw Error(ErrorCode::BadParams, "--N must be at least 1");
  ModelSpec model = resolve_model(cfg).build();
  BoundsReport report = cfg.report.empty() ? bounds_report(model) : load_report(cfg.report);

  double scale = 1.0;
  if (report.K_u && *report.K_u > 0.0) {
    scale = *report.K_u;
  } else if (std::isfinite(report.certified_hi) && report.certified_hi > 0.0) {
    scale = report.certified_hi;
  }
  auto histories = random_histories(scale, static_cast<std::size_t>(cfg.N), cfg.seed);
  SolverConfig sc = solver(cfg);
  auto trajs = integrate_ensemble(model, histories, sc);

  json result;
  bool pass = false;
  if (report.permanent) {
    double tol = cfg.tol.value_or(default_tolerance(report));
    PermanenceVerdict v = verify_permanence(trajs, report, tol, cfg.tail_fraction);
    result = to_json(v);
    result["mode"] = "permanence";
    result["certified"] = {report.certified_lo, report.certified_hi};
    pass = v.pass;
  } else if (report.K_u && *report.K_u == 0.0) {
    double tol = cfg.tol.value_or(1e-4);
    pass = verify_gas(trajs, 0.0, tol);
    json per = json::array();
    for (const auto& t : trajs) per.push_back({{"final", t.final_value()}});
    result = {{"mode", "gas-zero"}, {"pass", pass}, {"tolerance", tol}, {"per_trajectory", per}};
  } else {
    throw Error(ErrorCode::NotCertified,
                "report neither certifies permanence nor extinction; nothing to verify");
  }

  if (cfg.envelopes) {
    EnvelopePair env = build_envelopes(model);
    auto lower = integrate_ensemble(env.lower, histories, sc);
    auto upper = integrate_ensemble(env.upper, histories, sc);
    SandwichVerdict worst;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      SandwichVerdict s = verify_sandwich(trajs[i], lower[i], upper[i], cfg.sandwich_tol);
      if (!s.pass || s.max_violation > worst.max_violation) worst = s;
    }
    worst.pass = worst.max_violation <= cfg.sandwich_tol;
    result["sandwich"] = to_json(worst);
    pass = pass && worst.pass;
  }
  result["pass"] = pass;
  result["seed"] = cfg.seed;
  emit(cfg, out, [&](std::ostream& o) { o << result.dump(2) << '\n'; });
  if (!pass) err << "verification failed\n";
  return pass ? kOk : kNotCertified;
}

/// Strips declared extrema from every time function on the way to `ptr`, so
/// that they are re-derived from the modified parameters.
void forget_extrema(json& doc, const json::json_pointer& ptr) {
  json::json_pointer cur = ptr;
  while (!cur.empty()) {
    cur = cur.parent_pointer();
    json& node = doc.at(cur);
    if (node.is_object() && node.contains("kind") && node.contains("params")) {
      for (const char* key : {"inf", "sup", "tail_liminf", "tail_limsup"}) node.erase(key);
    }
  }
}

std::function<ModelSpec(double)> sweep_builder(const ModelSource& src, const std::string& param) {
  if (param.empty()) throw Error(ErrorCode::BadParamPath, "--param is required");
  if (param.front() == '/') {
    json base = src.as_json();
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(param);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::BadParamPath, param + ": " + e.what());
    }
    if (!base.contains(ptr) || !base.at(ptr).is_number()) {
      throw Error(ErrorCode::BadParamPath, param + " does not address a number in the model");
    }
    return [base, ptr](double v) {
      json doc = base;
      doc.at(ptr) = v;
      forget_extrema(doc, ptr);
      return model_from_json(doc);
    };
  }
  if (!src.preset) {
    throw Error(ErrorCode::BadParamPath, "parameter names need a preset; use a JSON pointer");
  }
  std::string name = param;
  std::optional<std::size_t> index;
  if (auto lb = param.find('['); lb != std::string::npos && param.back() == ']') {
    name = param.substr(0, lb);
    std::size_t k = 0;
    auto digits = std::string_view(param).substr(lb + 1, param.size() - lb - 2);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || p != digits.data() + digits.size()) {
      throw Error(ErrorCode::BadParamPath, "bad index in " + param);
    }
    index = k;
  }
  PresetRef ref = *src.preset;
  auto it = ref.params.find(name);
  if (index && (it == ref.params.end() || *index >= it->second.size())) {
    throw Error(ErrorCode::BadParamPath, param + " is out of range");
  }
  // Probe so that unknown parameter names fail before any work starts.
  try {
    PresetRef probe = ref;
    if (!index) probe.params[name] = {it == ref.params.end() ? 1.0 : it->second.front()};
    preset(probe.name, probe.params);
  } catch (const Error& e) {
    throw Error(ErrorCode::BadParamPath, e.what());
  }
  return [ref, name, index](double v) {
    PresetRef r = ref;
    if (index) {
      r.params[name][*index] = v;
    } else {
      r.params[name] = {v};
    }
    return preset(r.name, r.params);
  };
}

std::string csv_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ModelSource src = resolve_model(cfg);
  Range range = parse_range(cfg.range);
  auto build = sweep_builder(src, cfg.param);
  SolverConfig sc = solver(cfg);
  std::optional<HistorySpec> history;
  if (!cfg.history.empty()) history = parse_history(cfg.history);

  auto row = [&](double value) {
    std::ostringstream line;
    line.precision(17);
    ModelSpec model = build(value);
    BoundsReport rep = bounds_report(model);
    std::optional<double> tmin, tmax;
    try {
      double level = rep.K_u && *rep.K_u > 0.0 ? *rep.K_u : 1.0;
      Trajectory traj = integrate(model, history.value_or(HistorySpec::constant(level)), sc);
      TailEstimate tail = tail_extrema(traj, cfg.tail_fraction, false);
      tmin = tail.liminf_est;
      tmax = tail.limsup_est;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteValue && e.code() != ErrorCode::PositivityLoss &&
          e.code() != ErrorCode::HorizonTooShort) {
        throw;
      }
    }
    line << value << ',' << (rep.permanent ? 1 : 0) << ',' << csv_number(rep.m0) << ','
         << csv_number(rep.M0) << ',' << csv_number(rep.K_l) << ',' << csv_number(rep.K_u) << ','
         << csv_number(tmin) << ',' << csv_number(tmax);
    return line.str();
  };

  const int width = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::string> rows;
  for (int begin = 0; begin < range.count; begin += width) {
    std::vector<std::future<std::string>> jobs;
    for (int i = begin; i < std::min(begin + width, range.count); ++i) {
      jobs.push_back(std::async(std::launch::async, row, range.at(i)));
    }
    for (auto& j : jobs) rows.push_back(j.get());
  }

  emit(cfg, out, [&](std::ostream& o) {
    o << "value,permanent,m0,M0,K_l,K_u,tail_min,tail_max\n";
    for (const auto& r : rows) o << r << '\n';
  });
  (void)err;
  return kOk;
}

void add_model_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.model, "model JSON file, or preset:name?key=value&...");
  sub->add_option("--preset", cfg.preset, "preset reference name?key=value&...");
}

void add_solver_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--h", cfg.h, "step size")->check(CLI::PositiveNumber);
  sub->add_option("--T", cfg.T, "horizon")->check(CLI::PositiveNumber);
  sub->add_option("--stride", cfg.stride, "export every n-th node")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and permanence certification for scalar delayed population models",
               "permadde"};
  app.set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  app.require_subcommand(1);
  RunConfig cfg;

  auto* model = app.add_subcommand("model", "print the resolved model as JSON");
  add_model_flags(model, cfg);
  model->add_option("--out", cfg.out, "output path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory to CSV");
  add_model_flags(simulate, cfg);
  add_solver_flags(simulate, cfg);
  simulate->add_option("--history", cfg.history, "const:c | sin:a,b,omega,phase[,clip] | table:file");
  simulate->add_flag("--with-f", cfg.with_f, "add the right-hand side column");
  simulate->add_option("--out", cfg.out, "CSV path (default stdout)");

  auto* bounds = app.add_subcommand("bounds", "hypotheses, envelopes and certified bounds as JSON");
  add_model_flags(bounds, cfg);
  bounds->add_option("--out", cfg.out, "JSON path (default stdout)");

  auto* verify = app.add_subcommand("verify", "check tails of a seeded ensemble against the bounds");
  add_model_flags(verify, cfg);
  add_solver_flags(verify, cfg);
  verify->add_option("--N", cfg.N, "ensemble size");
  verify->add_option("--seed", cfg.seed, "64-bit seed");
  verify->add_option("--tail-fraction", cfg.tail_fraction, "tail window fraction")
      ->check(CLI::Range(0.0, 1.0));
  verify->add_option("--tol", cfg.tol, "verification tolerance");
  verify->add_option("--sandwich-tol", cfg.sandwich_tol, "envelope sandwich tolerance");
  verify->add_flag("--envelopes", cfg.envelopes, "co-simulate the envelope pair");
  verify->add_option("--report", cfg.report, "use this bounds report instead of computing one");
  verify->add_option("--out", cfg.out, "JSON path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "bounds and tails across one scalar parameter");
  add_model_flags(sweep, cfg);
  add_solver_flags(sweep, cfg);
  sweep->add_option("--param", cfg.param, "JSON pointer into the model, or a preset parameter")
      ->required();
  sweep->add_option("--range", cfg.range, "lo:hi:count")->required();
  sweep->add_option("--history", cfg.history, "reference history (default constant K_u)");
  sweep->add_option("--tail-fraction", cfg.tail_fraction, "tail window fraction")
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--out", cfg.out, "CSV path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*model) return cmd_model(cfg, out);
    if (*simulate) return cmd_simulate(cfg, out, err);
    if (*bounds) return cmd_bounds(cfg, out, err);
    if (*verify) return cmd_verify(cfg, out, err);
    if (*sweep) return cmd_sweep(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace permadde::cli
