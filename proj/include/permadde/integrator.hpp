#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permadde/model.hpp"

namespace permadde {

struct SolverConfig {
  double h = 0.01;
  double T = 100.0;
  /// Export-only thinning; the trajectory always keeps every node.
  int record_stride = 1;
  double positivity_tolerance = 1e-8;
  double check_horizon = permadde::check_horizon();
};

/// Dense numerical solution on the uniform grid t_i = (i - zero_index) h.
/// Nodes with t_i <= 0 are exact samples of the initial history.
class Trajectory {
public:
  std::size_t size() const { return values_.size(); }
  std::size_t zero_index() const { return zero_index_; }
  double h() const { return h_; }
  double tau_max() const { return tau_max_; }

  double time(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(zero_index_)) * h_;
  }
  double value(std::size_t i) const { return values_[i]; }
  /// Right-hand side at the node; finite differences of the history for t_i < 0.
  double derivative(std::size_t i) const { return derivs_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<const double> derivatives() const { return derivs_; }

  double start_time() const { return time(0); }
  double horizon() const { return time(size() - 1); }
  double final_value() const { return values_.back(); }
  const HistorySpec& history() const { return history_; }

  /// Non-fatal configuration notes (step larger than tau_max, short horizon).
  const std::vector<std::string>& warnings() const { return warnings_; }

private:
  friend Trajectory integrate(const ModelSpec&, const HistorySpec&, const SolverConfig&);

  double h_ = 0.0;
  double tau_max_ = 0.0;
  std::size_t zero_index_ = 0;
  std::vector<double> values_;
  std::vector<double> derivs_;
  HistorySpec history_;
  std::vector<std::string> warnings_;
};

/// Classical RK4 by the method of steps. Delayed arguments that land on the
/// accepted part of the solution use cubic Hermite interpolation on (x_i, f_i);
/// arguments inside the current step (lags shorter than h, including zero)
/// use linear extrapolation from the last accepted node.
///
/// Throws InvalidModel, InadmissibleHistory (negative history), BadParams,
/// NonFiniteValue or PositivityLoss.
Trajectory integrate(const ModelSpec& model, const HistorySpec& history, const SolverConfig& cfg);

/// Exact node values at nodes, cubic Hermite in between, the history itself
/// for t <= 0. Throws OutOfRange outside [start_time, horizon].
double sample_trajectory(const Trajectory& traj, double t);

struct ConvergenceEstimate {
  std::optional<double> order;  // empty when the differences are degenerate
  bool degenerate = false;
  double coarse_difference = 0.0;
  double fine_difference = 0.0;
};

/// log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|) at the horizon. Differences
/// below 1e-13 set the degenerate flag instead of producing a number.
ConvergenceEstimate self_convergence_order(const ModelSpec& model, const HistorySpec& history,
                                           double h_base, double T);

/// log2(err_h / err_{h/2}) against a known exact value at the horizon.
ConvergenceEstimate observed_order(const ModelSpec& model, const HistorySpec& history,
                                   double h_base, double T, double exact);

/// `t,x` (and `,f`) rows with 17 significant digits, every `stride`-th node.
void write_csv(const Trajectory& traj, std::ostream& out, int stride = 1, bool with_f = false);

}  // namespace permadde
