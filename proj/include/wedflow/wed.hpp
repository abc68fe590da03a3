#pragma once

// Weighted energy-dissipation functional on piecewise-linear trajectories
//
//   I(u) = int_0^T exp(-t/eps) ( eps psi(u') + phi1(u) - phi2(u) - <w, u> ) dt
//
// The dissipation term is integrated exactly on each interval (u' is constant
// there); the bulk terms use the lumped hat-function weights
// mu_n = int exp(-t/eps) hat_n(t) dt. Dividing the stationarity condition at
// node n by mu_n gives the scaled Euler-Lagrange residual
//
//   r^n = kappa (xi^n - exp(-tau/eps) xi^{n+1}) + eta^n - w^n,   xi = d psi(v),
//
// with kappa = 1/(1 - exp(-tau/eps)) and no successor term at n = N, which is
// where the natural condition xi(T) = 0 comes from.

#include <wedflow/block_tridiagonal.hpp>
#include <wedflow/errors.hpp>
#include <wedflow/moreau_yosida.hpp>
#include <wedflow/potentials.hpp>
#include <wedflow/spaces.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wedflow {

class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, int steps, double epsilon) : horizon_(horizon), steps_(steps), epsilon_(epsilon) {
    if (!(horizon > 0.0)) throw Error(ErrorKind::PreconditionViolated, "horizon must be positive");
    if (steps < 2) throw Error(ErrorKind::PreconditionViolated, "at least 2 time steps required");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::PreconditionViolated, "epsilon must be positive");
  }

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double epsilon() const noexcept { return epsilon_; }
  double tau() const noexcept { return horizon_ / steps_; }
  double time(int n) const noexcept { return n == steps_ ? horizon_ : n * tau(); }
  TimeGrid with_epsilon(double eps) const { return TimeGrid(horizon_, steps_, eps); }
  TimeGrid with_steps(int steps) const { return TimeGrid(horizon_, steps, epsilon_); }

  /// tau / eps
  double ratio() const noexcept { return tau() / epsilon_; }
  /// exp(-tau/eps): ratio of consecutive interval weights.
  double decay() const noexcept { return std::exp(-ratio()); }
  /// Coefficient of the xi-difference in the scaled residual at interior nodes.
  double kappa() const noexcept { return 1.0 / one_minus_decay(); }
  /// Same coefficient at the final node (half hat function).
  double kappa_final() const noexcept { return one_minus_decay() / half_hat(); }

  /// int_{t_{n-1}}^{t_n} exp(-t/eps) dt, n = 1..N.
  double interval_weight(int n) const {
    return epsilon_ * std::exp(-time(n - 1) / epsilon_) * one_minus_decay();
  }

  /// int exp(-t/eps) hat_n(t) dt, n = 0..N.
  double node_weight(int n) const {
    const double e = epsilon_, x = ratio();
    if (n == 0) return e * (one_minus_decay() - half_hat() / x);
    if (n == steps_) return std::exp(-time(n - 1) / e) * e / x * half_hat();
    const double om = one_minus_decay();
    return std::exp(-time(n - 1) / e) * e / x * om * om;
  }

 private:
  double one_minus_decay() const noexcept { return -std::expm1(-ratio()); }
  // 1 - exp(-x)(1 + x)
  double half_hat() const noexcept {
    const double x = ratio();
    if (x < 1e-2) return x * x * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0 + x * x * x * x / 144.0);
    return -std::expm1(-x) - x * std::exp(-x);
  }

  double horizon_ = 1.0;
  int steps_ = 2;
  double epsilon_ = 1.0;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<Field> states;  // u^0 .. u^N

  Trajectory() = default;
  Trajectory(TimeGrid g, std::vector<Field> s) : grid(g), states(std::move(s)) {
    if (states.size() != static_cast<std::size_t>(grid.steps()) + 1)
      throw Error(ErrorKind::PreconditionViolated, "trajectory needs N+1 states");
  }

  static Trajectory constant(const TimeGrid& g, const Field& u0) {
    return Trajectory(g, std::vector<Field>(static_cast<std::size_t>(g.steps()) + 1, u0));
  }

  int steps() const noexcept { return grid.steps(); }
  const Field& operator[](int n) const { return states[static_cast<std::size_t>(n)]; }
  Field& operator[](int n) { return states[static_cast<std::size_t>(n)]; }

  Field velocity(int n) const {
    return Field(states[0].space, (states[n].values - states[n - 1].values) / grid.tau());
  }
};

struct WedProblem {
  TimeGrid time;
  PotentialHandle psi;
  EnergySplit energy;
  Perturbation perturbation = Perturbation::none();
  Field u0;
  std::optional<YosidaConfig> yosida;
  /// Nodes held at their initial value (Dirichlet-type elimination). Empty: none.
  std::vector<bool> pinned;

  const SpacePtr& space() const { return u0.space; }
  bool has_phi2() const { return !energy.convex(); }
  bool is_pinned(Eigen::Index i) const {
    return !pinned.empty() && pinned[static_cast<std::size_t>(i)];
  }

  WedProblem with_epsilon(double eps) const {
    WedProblem p = *this;
    p.time = time.with_epsilon(eps);
    return p;
  }
  WedProblem with_lambda(double lambda) const {
    WedProblem p = *this;
    YosidaConfig cfg = yosida.value_or(YosidaConfig{});
    cfg.lambda = lambda;
    p.yosida = cfg;
    return p;
  }

  void validate() const {
    if (!psi.valid() || !energy.phi1.valid()) throw Error(ErrorKind::PreconditionViolated, "psi and phi1 required");
    if (!std::isfinite(energy.phi1.value(u0)))
      throw Error(ErrorKind::DomainViolation, "initial state lies outside the domain of phi1");
    if (!pinned.empty() && pinned.size() != space()->size())
      throw Error(ErrorKind::PreconditionViolated, "pinned mask length does not match the space");
    if (yosida) yosida->validate();
  }
};

/// Which form of phi2 enters a WED evaluation.
enum class Phi2Mode {
  Regularized,  // Moreau envelope when a Yosida config is present, raw phi2 otherwise
  Excluded,     // phi2 is carried by w (fixed-point route)
};

namespace detail {

inline double phi2_value(const WedProblem& pb, const Field& u) {
  if (!pb.has_phi2()) return 0.0;
  return pb.yosida ? moreau_envelope(pb.energy.phi2, u, *pb.yosida) : pb.energy.phi2.value(u);
}

inline DualField phi2_gradient(const WedProblem& pb, const Field& u) {
  if (!pb.has_phi2()) return DualField(u.space);
  return pb.yosida ? yosida_gradient(pb.energy.phi2, u, *pb.yosida) : pb.energy.phi2.gradient(u);
}

inline Eigen::MatrixXd phi2_jacobian(const WedProblem& pb, const Field& u) {
  if (!pb.has_phi2()) return Eigen::MatrixXd::Zero(u.size(), u.size());
  return pb.yosida ? yosida_jacobian(pb.energy.phi2, u, *pb.yosida) : pb.energy.phi2.hessian(u);
}

inline void require_domain(const WedProblem& pb, const Field& u, int n) {
  if (!pb.energy.phi1.in_domain(u))
    throw Error(ErrorKind::DomainViolation, "phi1 is infinite at time index " + std::to_string(n));
}

inline void check_forcing(const WedProblem& pb, const std::vector<DualField>& w) {
  if (w.size() != static_cast<std::size_t>(pb.time.steps()))
    throw Error(ErrorKind::PreconditionViolated, "one dual field per time step required");
}

}  // namespace detail

/// Zero forcing, one dual field per step n = 1..N.
inline std::vector<DualField> zero_forcing(const WedProblem& pb) {
  return std::vector<DualField>(static_cast<std::size_t>(pb.time.steps()), DualField(pb.space()));
}

inline double wed_value(const WedProblem& pb, const Trajectory& traj, const std::vector<DualField>& w,
                        Phi2Mode mode = Phi2Mode::Regularized) {
  detail::check_forcing(pb, w);
  const TimeGrid& g = pb.time;
  const double eps = g.epsilon();
  double total = 0.0;
  for (int n = 0; n <= g.steps(); ++n) {
    const Field& u = traj[n];
    const double phi1 = pb.energy.phi1.value(u);
    if (!std::isfinite(phi1)) throw Error(ErrorKind::DomainViolation, "phi1 is infinite along the trajectory");
    double bulk = phi1;
    if (mode == Phi2Mode::Regularized) bulk -= detail::phi2_value(pb, u);
    if (n > 0) {
      bulk -= pairing(w[static_cast<std::size_t>(n - 1)], u);
      total += eps * g.interval_weight(n) * pb.psi.value(traj.velocity(n));
    }
    total += g.node_weight(n) * bulk;
  }
  return total;
}

/// dI/du^n for n = 1..N as dual densities.
inline std::vector<DualField> wed_gradient(const WedProblem& pb, const Trajectory& traj,
                                           const std::vector<DualField>& w, Phi2Mode mode = Phi2Mode::Regularized) {
  detail::check_forcing(pb, w);
  const TimeGrid& g = pb.time;
  const int N = g.steps();
  const double eps = g.epsilon(), tau = g.tau();
  std::vector<Eigen::VectorXd> xi(static_cast<std::size_t>(N) + 2);
  for (int n = 1; n <= N; ++n) xi[static_cast<std::size_t>(n)] = pb.psi.gradient(traj.velocity(n)).values;
  std::vector<DualField> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    const Field& u = traj[n];
    detail::require_domain(pb, u, n);
    Eigen::VectorXd eta = pb.energy.phi1.gradient(u).values;
    if (mode == Phi2Mode::Regularized) eta -= detail::phi2_gradient(pb, u).values;
    Eigen::VectorXd gn = g.node_weight(n) * (eta - w[static_cast<std::size_t>(n - 1)].values);
    gn += eps / tau * g.interval_weight(n) * xi[static_cast<std::size_t>(n)];
    if (n < N) gn -= eps / tau * g.interval_weight(n + 1) * xi[static_cast<std::size_t>(n + 1)];
    out.emplace_back(pb.space(), std::move(gn));
  }
  return out;
}

/// Scaled Euler-Lagrange residual r^n = gradient^n / mu_n, pinned entries zeroed.
inline std::vector<DualField> el_residual_fields(const WedProblem& pb, const Trajectory& traj,
                                                 const std::vector<DualField>& w,
                                                 Phi2Mode mode = Phi2Mode::Regularized) {
  detail::check_forcing(pb, w);
  const TimeGrid& g = pb.time;
  const int N = g.steps();
  const double kappa = g.kappa(), kappa_n = g.kappa_final(), decay = g.decay();
  std::vector<Eigen::VectorXd> xi(static_cast<std::size_t>(N) + 1);
  for (int n = 1; n <= N; ++n) xi[static_cast<std::size_t>(n)] = pb.psi.gradient(traj.velocity(n)).values;
  std::vector<DualField> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    const Field& u = traj[n];
    detail::require_domain(pb, u, n);
    Eigen::VectorXd r = pb.energy.phi1.gradient(u).values - w[static_cast<std::size_t>(n - 1)].values;
    if (mode == Phi2Mode::Regularized) r -= detail::phi2_gradient(pb, u).values;
    if (n < N) r += kappa * (xi[static_cast<std::size_t>(n)] - decay * xi[static_cast<std::size_t>(n + 1)]);
    else r += kappa_n * xi[static_cast<std::size_t>(n)];
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (pb.is_pinned(i)) r[i] = 0.0;
    out.emplace_back(pb.space(), std::move(r));
  }
  return out;
}

inline double max_dual_norm(const std::vector<DualField>& fields) {
  double worst = 0.0;
  for (const auto& f : fields) worst = std::max(worst, dual_norm(f));
  return worst;
}

struct WedOptions {
  enum class Init { Constant, Given };
  double tol = 1e-8;
  int max_iter = 5000;
  Init init = Init::Constant;
  std::optional<Trajectory> initial;
  Phi2Mode phi2_mode = Phi2Mode::Regularized;
};

struct WedReport {
  Trajectory minimizer;
  double functional_value = 0.0;
  double el_residual = 0.0;
  double final_xi_norm = 0.0;
  int iterations = 0;
};

/// eps |d psi(v^N)|_{p'}: the boundary flux of the natural final condition.
inline double final_xi_norm(const WedProblem& pb, const Trajectory& traj) {
  return pb.time.epsilon() * dual_norm(pb.psi.gradient(traj.velocity(pb.time.steps())));
}

namespace detail {

inline double merit(const std::vector<DualField>& r) {
  double acc = 0.0;
  for (const auto& f : r) {
    const DiscreteSpace& s = *f.space;
    for (Eigen::Index i = 0; i < f.size(); ++i) acc += s.weight(static_cast<std::size_t>(i)) * f.values[i] * f.values[i];
  }
  return 0.5 * acc;
}

inline BlockTridiagonal el_jacobian(const WedProblem& pb, const Trajectory& traj, Phi2Mode mode) {
  const TimeGrid& g = pb.time;
  const int N = g.steps();
  const double tau = g.tau(), kappa = g.kappa(), kappa_n = g.kappa_final(), decay = g.decay();
  std::vector<Eigen::MatrixXd> P(static_cast<std::size_t>(N) + 1);
  for (int n = 1; n <= N; ++n) P[static_cast<std::size_t>(n)] = pb.psi.hessian(traj.velocity(n));
  BlockTridiagonal J(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    const auto b = static_cast<std::size_t>(n - 1);
    const Field& u = traj[n];
    Eigen::MatrixXd D = pb.energy.phi1.hessian(u);
    if (mode == Phi2Mode::Regularized) D -= phi2_jacobian(pb, u);
    const double k = n < N ? kappa : kappa_n;
    D += k / tau * P[static_cast<std::size_t>(n)];
    if (n < N) {
      D += kappa * decay / tau * P[static_cast<std::size_t>(n + 1)];
      J.upper[b] = -kappa * decay / tau * P[static_cast<std::size_t>(n + 1)];
    }
    if (n > 1) J.lower[b] = -k / tau * P[static_cast<std::size_t>(n)];
    J.diag[b] = std::move(D);
  }
  if (!pb.pinned.empty()) {
    for (std::size_t b = 0; b < J.blocks(); ++b) {
      for (Eigen::Index i = 0; i < J.diag[b].rows(); ++i) {
        if (!pb.is_pinned(i)) continue;
        J.diag[b].row(i).setZero();
        J.diag[b].col(i).setZero();
        J.diag[b](i, i) = 1.0;
        if (J.lower[b].size()) { J.lower[b].row(i).setZero(); J.lower[b].col(i).setZero(); }
        if (J.upper[b].size()) { J.upper[b].row(i).setZero(); J.upper[b].col(i).setZero(); }
      }
    }
  }
  return J;
}

}  // namespace detail

/// Minimizes I_{eps,w} over trajectories with u(0) = u0 by damped Newton on
/// the scaled Euler-Lagrange system (block tridiagonal in time), globalized by
/// backtracking on the residual merit. Converged when max_n |r^n|_{p'} <= tol * max(1, s),
/// s the largest dual norm of d phi1(u^n) or w^n.
inline WedReport minimize_wed(const WedProblem& pb, const std::vector<DualField>& w, const WedOptions& opts = {}) {
  pb.validate();
  detail::check_forcing(pb, w);
  const int N = pb.time.steps();
  Trajectory traj = (opts.init == WedOptions::Init::Given && opts.initial) ? *opts.initial
                                                                          : Trajectory::constant(pb.time, pb.u0);
  if (traj.steps() != N) throw Error(ErrorKind::PreconditionViolated, "initial trajectory has the wrong length");
  traj.grid = pb.time;
  traj[0] = pb.u0;
  for (int n = 1; n <= N; ++n)
    for (Eigen::Index i = 0; i < pb.u0.size(); ++i)
      if (pb.is_pinned(i)) traj[n].values[i] = pb.u0.values[i];

  auto residual_or_inf = [&](const Trajectory& t, std::vector<DualField>& r) {
    try {
      r = el_residual_fields(pb, t, w, opts.phi2_mode);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DomainViolation) return std::numeric_limits<double>::infinity();
      throw;
    }
    const double m = detail::merit(r);
    return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
  };

  std::vector<DualField> r;
  double m0 = residual_or_inf(traj, r);
  if (!std::isfinite(m0)) throw Error(ErrorKind::DomainViolation, "initial trajectory outside the domain");
  // Relative to the size of the bulk terms once they exceed 1 (stiff energies).
  auto scaled_tol = [&](const Trajectory& t) {
    double scale = 0.0;
    for (int n = 1; n <= N; ++n) {
      scale = std::max(scale, dual_norm(pb.energy.phi1.gradient(t[n])));
      scale = std::max(scale, dual_norm(w[static_cast<std::size_t>(n - 1)]));
    }
    return opts.tol * std::max(1.0, scale);
  };
  int it = 0;
  double res = max_dual_norm(r);
  while (res > scaled_tol(traj)) {
    if (it >= opts.max_iter) throw Error(ErrorKind::MaxIterExceeded, "WED minimization did not reach tol");
    ++it;
    const BlockTridiagonal J = detail::el_jacobian(pb, traj, opts.phi2_mode);
    std::vector<Eigen::VectorXd> rhs(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) rhs[static_cast<std::size_t>(n)] = -r[static_cast<std::size_t>(n)].values;
    const std::vector<Eigen::VectorXd> step = J.solve(rhs);

    double alpha = 1.0;
    Trajectory trial = traj;
    std::vector<DualField> r_trial;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int n = 1; n <= N; ++n)
        trial[n].values = traj[n].values + alpha * step[static_cast<std::size_t>(n - 1)];
      const double m1 = residual_or_inf(trial, r_trial);
      if (m1 <= (1.0 - 2e-4 * alpha) * m0) {
        accepted = true;
        m0 = m1;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw Error(ErrorKind::LineSearchFailed, "no sufficient decrease along the Newton direction");
    traj = std::move(trial);
    r = std::move(r_trial);
    res = max_dual_norm(r);
  }

  WedReport rep;
  rep.iterations = it;
  rep.el_residual = res;
  rep.functional_value = wed_value(pb, traj, w, opts.phi2_mode);
  rep.final_xi_norm = final_xi_norm(pb, traj);
  rep.minimizer = std::move(traj);
  return rep;
}

/// Terms of the discrete energy inequality
///   sum tau <xi^n, v^n>  <=  eps psi(0) - phi1(u^N) + phi1(u^0) + phi2(u^N) - phi2(u^0)
///                            + sum tau <f(u^n), v^n>
/// with xi = d psi(v) and the raw (unregularized) phi2.
struct EnergyBalance {
  double dissipated = 0.0;  // left-hand side
  double bound = 0.0;       // right-hand side
  double slack = 0.0;       // bound - dissipated
  double scale = 1.0;       // data scale for the O(tau) allowance

  bool holds(double tau, double factor = 10.0) const { return slack >= -factor * tau * scale; }
};

inline EnergyBalance energy_balance(const WedProblem& pb, const Trajectory& traj) {
  const TimeGrid& g = pb.time;
  const int N = g.steps();
  const double tau = g.tau();
  EnergyBalance eb;
  double forcing = 0.0;
  for (int n = 1; n <= N; ++n) {
    const Field v = traj.velocity(n);
    eb.dissipated += tau * pairing(pb.psi.gradient(v), v);
    if (!pb.perturbation.is_zero()) forcing += tau * pairing(pb.perturbation.apply(traj[n], g.time(n)), v);
  }
  const Field zero(pb.space());
  const double psi0 = pb.psi.value(zero);
  const double phi1_0 = pb.energy.phi1.value(traj[0]), phi1_T = pb.energy.phi1.value(traj[N]);
  const double phi2_0 = pb.has_phi2() ? pb.energy.phi2.value(traj[0]) : 0.0;
  const double phi2_T = pb.has_phi2() ? pb.energy.phi2.value(traj[N]) : 0.0;
  eb.bound = g.epsilon() * psi0 - phi1_T + phi1_0 + phi2_T - phi2_0 + forcing;
  eb.slack = eb.bound - eb.dissipated;
  eb.scale = 1.0 + std::abs(phi1_0) + std::abs(phi2_0) + g.epsilon() * std::abs(psi0);
  return eb;
}

/// sup_n |a^n - b^n|_V over a common grid.
inline double sup_distance(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (int n = 0; n <= a.steps(); ++n)
    worst = std::max(worst, norm_p(Field(a[n].space, a[n].values - b[n].values)));
  return worst;
}

/// (sum_{n>=1} tau |a^n - b^n|_V^p)^{1/p}: discrete L^p(0,T;V).
inline double lp_distance(const Trajectory& a, const Trajectory& b) {
  const double p = a[0].space->exponent_p();
  double acc = 0.0;
  for (int n = 1; n <= a.steps(); ++n)
    acc += a.grid.tau() * std::pow(norm_p(Field(a[n].space, a[n].values - b[n].values)), p);
  return std::pow(acc, 1.0 / p);
}

/// Largest nodal difference over all times and nodes.
inline double max_abs_distance(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (int n = 0; n <= a.steps(); ++n) worst = std::max(worst, (a[n].values - b[n].values).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace wedflow
