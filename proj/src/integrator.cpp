#include "permadde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "permadde/error.hpp"

namespace permadde {

namespace {

constexpr double kDegenerate = 1e-13;

double hermite(double theta, double h, double x0, double f0, double x1, double f1) {
  double om = 1.0 - theta;
  double h00 = (1.0 + 2.0 * theta) * om * om;
  double h10 = theta * om * om;
  double h01 = theta * theta * (3.0 - 2.0 * theta);
  double h11 = theta * theta * (theta - 1.0);
  return h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1;
}

/// Method-of-steps state: nodes [0, last] are accepted.
class Stepper {
public:
  Stepper(const ModelSpec& model, const HistorySpec& history, double h, std::size_t zero,
          std::vector<double>& x, std::vector<double>& f)
      : model_(model), history_(history), h_(h), zero_(zero), x_(x), f_(f),
        delayed_(model.recruitment.size()) {}

  double time(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(zero_)) * h_;
  }

  /// Solution value at s, given nodes up to `last` accepted. When
  /// `pending` is set, x_[last + 1] is known but f_[last + 1] is not.
  double state(double s, std::size_t last, bool pending) const {
    if (s <= 0.0) return history_(std::max(s, -model_.tau_max));
    double t_last = time(last);
    if (s > t_last) {
      if (pending) {
        double w = (s - t_last) / h_;
        return x_[last] + w * (x_[last + 1] - x_[last]);
      }
      return x_[last] + (s - t_last) * f_[last];
    }
    auto j = zero_ + static_cast<std::size_t>(std::floor(s / h_));
    if (j >= last) return x_[last];
    double theta = (s - time(j)) / h_;
    if (theta == 0.0) return x_[j];
    return hermite(theta, h_, x_[j], f_[j], x_[j + 1], f_[j + 1]);
  }

  double rhs(double t, double x, std::size_t last, bool pending) {
    for (std::size_t k = 0; k < model_.recruitment.size(); ++k) {
      double agg = 0.0;
      for (const auto& atom : model_.recruitment[k].delay.atoms) {
        agg += atom.weight * state(t - atom.lag(t), last, pending);
      }
      delayed_[k] = agg;
    }
    return eval_rhs(model_, t, x, delayed_);
  }

private:
  const ModelSpec& model_;
  const HistorySpec& history_;
  double h_;
  std::size_t zero_;
  std::vector<double>& x_;
  std::vector<double>& f_;
  std::vector<double> delayed_;
};

std::string describe(double t, double x) {
  std::ostringstream os;
  os.precision(17);
  os << "x(" << t << ") = " << x;
  return os.str();
}

}  // namespace

Trajectory integrate(const ModelSpec& model, const HistorySpec& history, const SolverConfig& cfg) {
  if (!(cfg.h > 0.0) || !(cfg.T > 0.0) || !std::isfinite(cfg.h) || !std::isfinite(cfg.T)) {
    throw Error(ErrorCode::BadParams, "step and horizon must be positive");
  }
  if (cfg.record_stride < 1) throw Error(ErrorCode::BadParams, "record_stride must be >= 1");
  if (auto v = validate_model(model, cfg.check_horizon); !v.empty()) {
    throw Error(ErrorCode::InvalidModel, v.front().where + ": " + to_string(v.front().code) + " (" +
                                             v.front().detail + ")");
  }
  if (!nonnegative(history, model.tau_max)) {
    throw Error(ErrorCode::InadmissibleHistory, "initial history must be nonnegative");
  }

  Trajectory traj;
  traj.h_ = cfg.h;
  traj.tau_max_ = model.tau_max;
  traj.history_ = history;
  if (cfg.h > model.tau_max) {
    traj.warnings_.push_back("step exceeds tau_max; delayed lookups fall inside the current step");
  }
  if (cfg.T < 10.0 * model.tau_max) {
    traj.warnings_.push_back("horizon shorter than 10 tau_max; tail estimates are unreliable");
  }

  const auto steps = static_cast<std::size_t>(std::ceil(cfg.T / cfg.h - 1e-9));
  const auto zero = static_cast<std::size_t>(std::ceil(model.tau_max / cfg.h - 1e-9));
  traj.zero_index_ = zero;
  auto& x = traj.values_;
  auto& f = traj.derivs_;
  x.assign(zero + steps + 1, 0.0);
  f.assign(zero + steps + 1, 0.0);

  Stepper stepper(model, history, cfg.h, zero, x, f);
  const double hist_fd = 1e-6 * std::max(model.tau_max, 1.0);
  for (std::size_t i = 0; i < zero; ++i) {
    double theta = std::max(stepper.time(i), -model.tau_max);
    x[i] = history(theta);
    f[i] = (history(std::min(theta + hist_fd, 0.0)) - history(theta - hist_fd)) /
           (std::min(theta + hist_fd, 0.0) - (theta - hist_fd));
  }
  x[zero] = history(0.0);
  f[zero] = stepper.rhs(0.0, x[zero], zero, false);

  const double h = cfg.h;
  for (std::size_t n = zero; n < zero + steps; ++n) {
    const double t = stepper.time(n);
    const double xn = x[n];
    const double k1 = f[n];
    const double k2 = stepper.rhs(t + 0.5 * h, xn + 0.5 * h * k1, n, false);
    const double k3 = stepper.rhs(t + 0.5 * h, xn + 0.5 * h * k2, n, false);
    const double k4 = stepper.rhs(t + h, xn + h * k3, n, false);
    const double next = xn + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!std::isfinite(next)) {
      throw Error(ErrorCode::NonFiniteValue, describe(t + h, next));
    }
    if (next < -cfg.positivity_tolerance) {
      throw Error(ErrorCode::PositivityLoss, describe(t + h, next));
    }
    x[n + 1] = next;
    f[n + 1] = stepper.rhs(stepper.time(n + 1), next, n, true);
    if (!std::isfinite(f[n + 1])) {
      throw Error(ErrorCode::NonFiniteValue, "right-hand side at " + describe(t + h, next));
    }
  }
  return traj;
}

double sample_trajectory(const Trajectory& traj, double t) {
  const double eps = 1e-12 * std::max(1.0, std::abs(traj.horizon()));
  if (!(t >= traj.start_time() - eps) || !(t <= traj.horizon() + eps)) {
    std::ostringstream os;
    os << "t = " << t << " outside [" << traj.start_time() << ", " << traj.horizon() << "]";
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  if (t <= 0.0) return traj.history()(std::max(t, -traj.tau_max()));
  const double h = traj.h();
  auto j = traj.zero_index() + static_cast<std::size_t>(std::floor(t / h));
  if (j >= traj.size() - 1) return traj.final_value();
  double theta = (t - traj.time(j)) / h;
  if (theta == 0.0) return traj.value(j);
  return hermite(theta, h, traj.value(j), traj.derivative(j), traj.value(j + 1),
                 traj.derivative(j + 1));
}

namespace {

double final_value(const ModelSpec& model, const HistorySpec& history, double h, double T) {
  SolverConfig cfg;
  cfg.h = h;
  cfg.T = T;
  return integrate(model, history, cfg).final_value();
}

}  // namespace

ConvergenceEstimate self_convergence_order(const ModelSpec& model, const HistorySpec& history,
                                           double h_base, double T) {
  double x1 = final_value(model, history, h_base, T);
  double x2 = final_value(model, history, h_base / 2.0, T);
  double x4 = final_value(model, history, h_base / 4.0, T);
  ConvergenceEstimate est;
  est.coarse_difference = std::abs(x1 - x2);
  est.fine_difference = std::abs(x2 - x4);
  if (est.coarse_difference < kDegenerate || est.fine_difference < kDegenerate) {
    est.degenerate = true;
    return est;
  }
  est.order = std::log2(est.coarse_difference / est.fine_difference);
  return est;
}

ConvergenceEstimate observed_order(const ModelSpec& model, const HistorySpec& history,
                                   double h_base, double T, double exact) {
  ConvergenceEstimate est;
  est.coarse_difference = std::abs(final_value(model, history, h_base, T) - exact);
  est.fine_difference = std::abs(final_value(model, history, h_base / 2.0, T) - exact);
  if (est.coarse_difference < kDegenerate || est.fine_difference < kDegenerate) {
    est.degenerate = true;
    return est;
  }
  est.order = std::log2(est.coarse_difference / est.fine_difference);
  return est;
}

void write_csv(const Trajectory& traj, std::ostream& out, int stride, bool with_f) {
  stride = std::max(stride, 1);
  auto old_precision = out.precision(17);
  out << (with_f ? "t,x,f\n" : "t,x\n");
  const std::size_t last = traj.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    // Stride is counted from t = 0 so that the origin and horizon rows are kept.
    long offset = static_cast<long>(i) - static_cast<long>(traj.zero_index());
    if (offset % stride != 0 && i != last) continue;
    out << traj.time(i) << ',' << traj.value(i);
    if (with_f) out << ',' << traj.derivative(i);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace permadde
