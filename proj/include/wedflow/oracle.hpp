#pragma once

// Implicit-Euler reference for d psi(u') + d phi1(u) - d phi2(u) = f(u):
// each step minimizes
//   tau psi((u - u_prev)/tau) + phi1(u) - phi2_l(u) - <f(u_prev), u>
// by Newton on its optimality condition. f is lagged, so every step is a
// convex problem and nothing here depends on the WED machinery.

#include <wedflow/errors.hpp>
#include <wedflow/wed.hpp>

#include <cmath>

namespace wedflow {

struct StepperConfig {
  enum class ForceTreatment {
    ExplicitLag,     // f(u^{n-1}, t_n)
    FrozenPrevious,  // f(u^{n-1}, t_{n-1})
  };
  int steps_N = 0;  // 0: use the problem's time grid
  double newton_tol = 1e-10;
  int newton_max_iter = 100;
  ForceTreatment treatment_f = ForceTreatment::ExplicitLag;
};

namespace detail {

inline double step_merit(const DualField& r) {
  const DiscreteSpace& s = *r.space;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) acc += s.weight(static_cast<std::size_t>(i)) * r.values[i] * r.values[i];
  return 0.5 * acc;
}

}  // namespace detail

/// Optimality residual of one implicit step, pinned entries zeroed.
inline DualField step_residual(const WedProblem& pb, const Field& u_prev, const Field& u, double tau,
                               const DualField& force) {
  Field v(u.space, (u.values - u_prev.values) / tau);
  DualField r = pb.psi.gradient(v);
  r.values += pb.energy.phi1.gradient(u).values - detail::phi2_gradient(pb, u).values - force.values;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (pb.is_pinned(i)) r.values[i] = 0.0;
  return r;
}

inline Field step(const WedProblem& pb, const Field& u_prev, double t, double tau, const StepperConfig& cfg = {}) {
  if (!(cfg.newton_tol > 0.0)) throw Error(ErrorKind::PreconditionViolated, "newton_tol must be positive");
  const double t_force = cfg.treatment_f == StepperConfig::ForceTreatment::ExplicitLag ? t : t - tau;
  const DualField force = pb.perturbation.is_zero() ? DualField(u_prev.space) : pb.perturbation.apply(u_prev, t_force);

  auto eval = [&](const Field& u, DualField& r) {
    if (!pb.energy.phi1.in_domain(u)) return std::numeric_limits<double>::infinity();
    r = step_residual(pb, u_prev, u, tau, force);
    const double m = detail::step_merit(r);
    return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
  };

  // Stiff energies put the roundoff floor of r above an absolute tolerance,
  // so the tolerance is taken relative to the size of the terms once they exceed 1.
  auto scaled_tol = [&](const Field& u) {
    const double scale = dual_norm(pb.energy.phi1.gradient(u)) + dual_norm(force);
    return cfg.newton_tol * std::max(1.0, scale);
  };

  Field u = u_prev;
  DualField r;
  double m0 = eval(u, r);
  for (int it = 0; it <= cfg.newton_max_iter; ++it) {
    if (dual_norm(r) <= scaled_tol(u)) return u;
    if (it == cfg.newton_max_iter) break;
    Eigen::MatrixXd J = pb.psi.hessian(Field(u.space, (u.values - u_prev.values) / tau)) / tau;
    J += pb.energy.phi1.hessian(u) - detail::phi2_jacobian(pb, u);
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
      if (!pb.is_pinned(i)) continue;
      J.row(i).setZero();
      J.col(i).setZero();
      J(i, i) = 1.0;
    }
    const Eigen::VectorXd dir = J.partialPivLu().solve(-r.values);
    if (!dir.allFinite()) throw Error(ErrorKind::NewtonFailed, "singular Jacobian in implicit step");
    double alpha = 1.0;
    bool accepted = false;
    Field trial = u;
    DualField r_trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial.values = u.values + alpha * dir;
      const double m1 = eval(trial, r_trial);
      if (m1 <= (1.0 - 2e-4 * alpha) * m0) {
        accepted = true;
        m0 = m1;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (dual_norm(r) <= 10.0 * scaled_tol(u)) return u;
      throw Error(ErrorKind::NewtonFailed, "line search stalled in implicit step");
    }
    u = std::move(trial);
    r = std::move(r_trial);
  }
  throw Error(ErrorKind::NewtonFailed, "implicit step did not reach newton_tol");
}

/// Runs the stepper over [0, T] with cfg.steps_N steps (or the problem's N).
inline Trajectory run(const WedProblem& pb, const StepperConfig& cfg = {}) {
  pb.validate();
  const int N = cfg.steps_N > 0 ? cfg.steps_N : pb.time.steps();
  const TimeGrid grid = pb.time.with_steps(N);
  std::vector<Field> states;
  states.reserve(static_cast<std::size_t>(N) + 1);
  states.push_back(pb.u0);
  for (int n = 1; n <= N; ++n) states.push_back(step(pb, states.back(), grid.time(n), grid.tau(), cfg));
  return Trajectory(grid, std::move(states));
}

}  // namespace wedflow
