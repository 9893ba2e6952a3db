#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmreach/errors.hpp"
#include "mmreach/model.hpp"

namespace mmreach {

enum class StepperKind { rk4_fixed, rkf45_adaptive };

struct IntegratorConfig {
  StepperKind method{StepperKind::rkf45_adaptive};
  double step{1e-3};      // fixed-step size (rk4_fixed)
  double rel_tol{1e-6};   // adaptive relative tolerance
  double abs_tol{1e-9};   // adaptive absolute tolerance
  long max_steps{1000000};
};

inline void validate_config(const IntegratorConfig& cfg) {
  if (!(cfg.step > 0.0)) throw ValidationError("integrator: step must be > 0");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw ValidationError("integrator: tolerances must be > 0");
  if (cfg.max_steps < 1) throw ValidationError("integrator: max_steps must be >= 1");
}

// Time-stamped solution samples at the integrator's accepted steps.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

using FieldFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using Observer = std::function<void(double t, const Eigen::VectorXd& y)>;

namespace detail {

inline void check_finite(const Eigen::VectorXd& y, double t) {
  if (!y.allFinite())
    throw DivergenceError("integrate: non-finite state at t = " + std::to_string(t));
}

// One classical RK4 step of size h.
inline Eigen::VectorXd rk4_step(const FieldFn& f, const Eigen::VectorXd& y, double h) {
  const Eigen::VectorXd k1 = f(y);
  const Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One Fehlberg 4(5) step: returns the 5th-order solution and the scaled error
// estimate E (accept if E <= 1). Classic Fehlberg tableau.
inline std::pair<Eigen::VectorXd, double> rkf45_step(const FieldFn& f, const Eigen::VectorXd& y,
                                                     double h, double rel_tol, double abs_tol) {
  const Eigen::VectorXd k1 = f(y);
  const Eigen::VectorXd k2 = f(y + h * (1.0 / 4.0) * k1);
  const Eigen::VectorXd k3 = f(y + h * ((3.0 / 32.0) * k1 + (9.0 / 32.0) * k2));
  const Eigen::VectorXd k4 =
      f(y + h * ((1932.0 / 2197.0) * k1 - (7200.0 / 2197.0) * k2 + (7296.0 / 2197.0) * k3));
  const Eigen::VectorXd k5 = f(y + h * ((439.0 / 216.0) * k1 - 8.0 * k2 + (3680.0 / 513.0) * k3 -
                                        (845.0 / 4104.0) * k4));
  const Eigen::VectorXd k6 =
      f(y + h * ((-8.0 / 27.0) * k1 + 2.0 * k2 - (3544.0 / 2565.0) * k3 + (1859.0 / 4104.0) * k4 -
                 (11.0 / 40.0) * k5));
  const Eigen::VectorXd y4 = y + h * ((25.0 / 216.0) * k1 + (1408.0 / 2565.0) * k3 +
                                      (2197.0 / 4104.0) * k4 - (1.0 / 5.0) * k5);
  const Eigen::VectorXd y5 = y + h * ((16.0 / 135.0) * k1 + (6656.0 / 12825.0) * k3 +
                                      (28561.0 / 56430.0) * k4 - (9.0 / 50.0) * k5 +
                                      (2.0 / 55.0) * k6);
  double err = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
  }
  return {y5, err};
}

}  // namespace detail

// Integrates dy/dt = field(y) from y(0) = x0 over [0, t_final] and returns
// y(t_final). The observer (if any) is called at t = 0 and after every
// accepted step; the final call is exactly at t_final (the last step is
// clipped). Fixed-step RK4 takes deterministic steps of cfg.step; RKF45
// adapts the step from the embedded 4th/5th-order error estimate.
inline Eigen::VectorXd integrate_observe(const FieldFn& field, Eigen::VectorXd y, double t_final,
                                         const IntegratorConfig& cfg = {},
                                         const Observer& obs = {}) {
  validate_config(cfg);
  if (!(t_final > 0.0)) throw ValidationError("integrate: t_final must be > 0");
  detail::check_finite(y, 0.0);
  if (obs) obs(0.0, y);

  // Stop once the remaining horizon is negligible relative to t_final; this
  // absorbs floating-point accumulation in t without an extra micro-step.
  const double t_eps = 1e-12 * std::max(1.0, t_final);
  double t = 0.0;
  long steps = 0;

  if (cfg.method == StepperKind::rk4_fixed) {
    while (t_final - t > t_eps) {
      if (++steps > cfg.max_steps)
        throw IntegrationError("integrate: exceeded max_steps = " + std::to_string(cfg.max_steps));
      const double h = std::min(cfg.step, t_final - t);
      y = detail::rk4_step(field, y, h);
      t += h;
      if (t_final - t <= t_eps) t = t_final;
      detail::check_finite(y, t);
      if (obs) obs(t, y);
    }
    return y;
  }

  // rkf45_adaptive
  double h = std::min(t_final / 100.0, t_final);
  while (t_final - t > t_eps) {
    if (++steps > cfg.max_steps)
      throw IntegrationError("integrate: exceeded max_steps = " + std::to_string(cfg.max_steps));
    h = std::min(h, t_final - t);
    auto [y_new, err] = detail::rkf45_step(field, y, h, cfg.rel_tol, cfg.abs_tol);
    if (err <= 1.0) {
      y = std::move(y_new);
      t += h;
      if (t_final - t <= t_eps) t = t_final;
      detail::check_finite(y, t);
      if (obs) obs(t, y);
    }
    const double factor =
        (err > 0.0) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    h *= factor;
    if (!(h > 0.0) || !std::isfinite(h))
      throw IntegrationError("integrate: step size underflow at t = " + std::to_string(t));
  }
  return y;
}

inline Trajectory integrate(const FieldFn& field, const Eigen::VectorXd& x0, double t_final,
                            const IntegratorConfig& cfg = {}) {
  Trajectory traj;
  integrate_observe(field, x0, t_final, cfg, [&](double t, const Eigen::VectorXd& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
  });
  return traj;
}

// Solution map Phi(t_final, x0) of the model ODE.
inline Eigen::VectorXd flow(const NeuralOdeModel& m, const Eigen::VectorXd& x0, double t_final,
                            const IntegratorConfig& cfg = {}) {
  return integrate_observe([&m](const Eigen::VectorXd& x) { return eval_field(m, x); }, x0,
                           t_final, cfg);
}

// Sensitivity S(t_final) = dPhi(t_final, x0)/dx0 via the variational system
//   dx/dt = f(x),   dS/dt = J(x) * S,   S(0) = I,
// integrated as one augmented ODE (state followed by S in column-major order).
inline Eigen::MatrixXd sensitivity(const NeuralOdeModel& m, const Eigen::VectorXd& x0,
                                   double t_final, const IntegratorConfig& cfg = {}) {
  const Eigen::Index n = m.state_dim;
  Eigen::VectorXd y0(n + n * n);
  y0.head(n) = x0;
  Eigen::Map<Eigen::MatrixXd>(y0.data() + n, n, n) = Eigen::MatrixXd::Identity(n, n);

  const FieldFn aug = [&m, n](const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(y.size());
    const Eigen::VectorXd x = y.head(n);
    dy.head(n) = eval_field(m, x);
    const Eigen::Map<const Eigen::MatrixXd> S(y.data() + n, n, n);
    Eigen::Map<Eigen::MatrixXd>(dy.data() + n, n, n) = eval_jacobian(m, x) * S;
    return dy;
  };

  const Eigen::VectorXd yf = integrate_observe(aug, y0, t_final, cfg);
  return Eigen::Map<const Eigen::MatrixXd>(yf.data() + n, n, n);
}

}  // namespace mmreach
