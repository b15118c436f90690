#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "permadde/bounds.hpp"
#include "permadde/integrator.hpp"

namespace permadde {

/// Window extrema of the final tail as finite-horizon proxies for
/// liminf / limsup. The stability gap compares against the half-length tail.
struct TailEstimate {
  double liminf_est = 0.0;
  double limsup_est = 0.0;
  double stability_gap = 0.0;
  double tail_start = 0.0;
};

/// HorizonTooShort when the horizon is below 10 tau_max.
TailEstimate tail_extrema(const Trajectory& traj, double tail_fraction = 0.25, bool nested = true);

struct SandwichVerdict {
  bool pass = true;
  double max_violation = 0.0;  // largest amount by which x leaves [lower, upper]
  double at_time = 0.0;
};

/// Node-by-node check lower - tol <= x <= upper + tol; GridMismatch unless
/// all three share the same grid.
SandwichVerdict verify_sandwich(const Trajectory& x, const Trajectory& lower,
                                const Trajectory& upper, double tol);

struct TrajectoryMargins {
  TailEstimate tail;
  double lower_margin = 0.0;  // liminf_est - certified lo
  double upper_margin = 0.0;  // certified hi - limsup_est
};

struct PermanenceVerdict {
  bool pass = false;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::vector<TrajectoryMargins> per_trajectory;
};

/// 1e-2 of the certified width, at least 1e-6.
double default_tolerance(const BoundsReport& report);

/// NotCertified unless the report is permanent.
PermanenceVerdict verify_permanence(std::span<const Trajectory> trajs, const BoundsReport& report,
                                    double tol, double tail_fraction = 0.25);

/// |x(T) - K| <= tol and last-quarter oscillation <= tol for every trajectory.
bool verify_gas(std::span<const Trajectory> trajs, double K, double tol);

nlohmann::json to_json(const PermanenceVerdict& v);
nlohmann::json to_json(const SandwichVerdict& v);

// ---------------------------------------------------------------------------
// Seeded ensembles

/// Engine for stream `index` of a run seeded with `seed`. Streams are
/// independent std::mt19937_64 engines initialised through std::seed_seq from
/// the four 32-bit halves of (seed, index).
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index);

/// `count` admissible histories: constant level drawn log-uniformly from
/// [0.1 scale, 10 scale], half of them with a sinusoidal perturbation clipped
/// at zero. phi(0) > 0 always holds. Stream i feeds history i.
std::vector<HistorySpec> random_histories(double scale, std::size_t count, std::uint64_t seed);

/// Integrates every history; runs concurrently, results in input order.
std::vector<Trajectory> integrate_ensemble(const ModelSpec& model,
                                           std::span<const HistorySpec> histories,
                                           const SolverConfig& cfg);

}  // namespace permadde
