#include "permadde/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "permadde/error.hpp"

namespace permadde {

namespace {

std::pair<double, double> window_extrema(const Trajectory& traj, double from) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = traj.size(); i-- > 0;) {
    if (traj.time(i) < from) break;
    lo = std::min(lo, traj.value(i));
    hi = std::max(hi, traj.value(i));
  }
  return {lo, hi};
}

}  // namespace

TailEstimate tail_extrema(const Trajectory& traj, double tail_fraction, bool nested) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw Error(ErrorCode::BadParams, "tail fraction must lie in (0, 1)");
  }
  const double T = traj.horizon();
  if (T < 10.0 * traj.tau_max()) {
    std::ostringstream os;
    os << "horizon " << T << " is below 10 tau_max = " << 10.0 * traj.tau_max();
    throw Error(ErrorCode::HorizonTooShort, os.str());
  }
  TailEstimate est;
  est.tail_start = T * (1.0 - tail_fraction);
  std::tie(est.liminf_est, est.limsup_est) = window_extrema(traj, est.tail_start);
  if (nested) {
    auto [lo, hi] = window_extrema(traj, T * (1.0 - 0.5 * tail_fraction));
    est.stability_gap = std::max(std::abs(lo - est.liminf_est), std::abs(hi - est.limsup_est));
  }
  return est;
}

SandwichVerdict verify_sandwich(const Trajectory& x, const Trajectory& lower,
                                const Trajectory& upper, double tol) {
  for (const Trajectory* other : {&lower, &upper}) {
    if (other->size() != x.size() || other->h() != x.h() ||
        other->zero_index() != x.zero_index()) {
      throw Error(ErrorCode::GridMismatch, "trajectories do not share a grid");
    }
  }
  SandwichVerdict v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double excess = std::max(lower.value(i) - x.value(i), x.value(i) - upper.value(i));
    if (excess > v.max_violation) {
      v.max_violation = excess;
      v.at_time = x.time(i);
    }
  }
  v.pass = v.max_violation <= tol;
  return v;
}

double default_tolerance(const BoundsReport& report) {
  double width = report.certified_hi - report.certified_lo;
  if (!std::isfinite(width)) width = 0.0;
  return std::max(1e-2 * width, 1e-6);
}

PermanenceVerdict verify_permanence(std::span<const Trajectory> trajs, const BoundsReport& report,
                                    double tol, double tail_fraction) {
  if (!report.permanent) {
    throw Error(ErrorCode::NotCertified, "report does not certify permanence");
  }
  PermanenceVerdict v;
  v.tolerance = tol;
  v.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& traj : trajs) {
    TrajectoryMargins m;
    m.tail = tail_extrema(traj, tail_fraction, true);
    m.lower_margin = m.tail.liminf_est - report.certified_lo;
    m.upper_margin = report.certified_hi - m.tail.limsup_est;
    v.worst_margin = std::min({v.worst_margin, m.lower_margin, m.upper_margin});
    v.per_trajectory.push_back(m);
  }
  v.pass = v.worst_margin >= -tol;
  return v;
}

bool verify_gas(std::span<const Trajectory> trajs, double K, double tol) {
  return std::all_of(trajs.begin(), trajs.end(), [&](const Trajectory& traj) {
    if (!(std::abs(traj.final_value() - K) <= tol)) return false;
    auto [lo, hi] = window_extrema(traj, 0.75 * traj.horizon());
    return hi - lo <= tol;
  });
}

nlohmann::json to_json(const PermanenceVerdict& v) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : v.per_trajectory) {
    per.push_back({{"liminf", m.tail.liminf_est},
                   {"limsup", m.tail.limsup_est},
                   {"stability_gap", m.tail.stability_gap},
                   {"margins", {m.lower_margin, m.upper_margin}}});
  }
  return {{"pass", v.pass},
          {"worst_margin", std::isfinite(v.worst_margin) ? nlohmann::json(v.worst_margin)
                                                          : nlohmann::json(nullptr)},
          {"tolerance", v.tolerance},
          {"per_trajectory", per}};
}

nlohmann::json to_json(const SandwichVerdict& v) {
  return {{"pass", v.pass}, {"max_violation", v.max_violation}, {"at_time", v.at_time}};
}

// ---------------------------------------------------------------------------

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::vector<HistorySpec> random_histories(double scale, std::size_t count, std::uint64_t seed) {
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  std::vector<HistorySpec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = stream_engine(seed, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double level = scale * std::pow(10.0, -1.0 + 2.0 * unit(rng));
    double amp = level * 1.5 * unit(rng);
    double omega = 1.0 + 9.0 * unit(rng);
    double phase = 2.0 * std::numbers::pi * unit(rng);
    if (i % 2 == 0) {
      out.push_back(HistorySpec::constant(level));
      continue;
    }
    SinusoidHistory s{level, amp, omega, phase, true};
    // Keep phi(0) clearly positive.
    if (s.a + s.b * std::sin(s.phase) <= 0.05 * s.a) s.phase = 0.5 * std::numbers::pi;
    out.push_back(HistorySpec{s});
  }
  return out;
}

std::vector<Trajectory> integrate_ensemble(const ModelSpec& model,
                                           std::span<const HistorySpec> histories,
                                           const SolverConfig& cfg) {
  // Batches of one job per hardware thread keep large ensembles from
  // spawning a thread per member.
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Trajectory> out;
  out.reserve(histories.size());
  for (std::size_t begin = 0; begin < histories.size(); begin += width) {
    std::vector<std::future<Trajectory>> jobs;
    for (std::size_t i = begin; i < std::min(begin + width, histories.size()); ++i) {
      const HistorySpec& h = histories[i];
      jobs.push_back(std::async(std::launch::async, [&model, &h, &cfg] { return integrate(model, h, cfg); }));
    }
    for (auto& j : jobs) out.push_back(j.get());
  }
  return out;
}

}  // namespace permadde
