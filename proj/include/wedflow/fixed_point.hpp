#pragma once

// Fixed-point closure of the nonpotential term.
//
//   S       : v  ->  w = f(v) + A_l(v)  ->  u = argmin I_{eps,w}
//   S_tilde : w  ->  u = argmin I_{eps,w}  ->  f(u) + A_l(u)
//
// Both are run as damped Picard iterations. A_l is the Yosida approximation
// of d phi2 (or d phi2 itself when no Yosida config is set).

#include <wedflow/errors.hpp>
#include <wedflow/wed.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace wedflow {

enum class FixedPointVariant { S, STilde };

struct FixedPointConfig {
  FixedPointVariant variant = FixedPointVariant::S;
  double damping_theta = 0.5;
  double outer_tol = 1e-6;
  int outer_max_iter = 200;
  double bound_guard = 1e6;

  void validate() const {
    if (!(damping_theta > 0.0 && damping_theta <= 1.0))
      throw Error(ErrorKind::PreconditionViolated, "damping_theta must lie in (0,1]");
    if (!(outer_tol > 0.0)) throw Error(ErrorKind::PreconditionViolated, "outer_tol must be positive");
    if (outer_max_iter < 1) throw Error(ErrorKind::PreconditionViolated, "outer_max_iter must be positive");
    if (!(bound_guard > 0.0)) throw Error(ErrorKind::PreconditionViolated, "bound_guard must be positive");
  }
};

struct FixedPointReport {
  Trajectory solution;
  std::vector<double> iterate_distances;
  std::vector<double> bound_history;
  bool converged = false;
  std::vector<WedReport> inner_reports;
  /// Scaled residual of the coupled system with w = f(u) + A_l(u) at the solution.
  double coupled_residual = 0.0;
  int outer_iterations() const { return static_cast<int>(iterate_distances.size()); }
};

/// w^n = f(u^n, t_n) + A_l(u^n), n = 1..N.
inline std::vector<DualField> feedback_forcing(const WedProblem& pb, const Trajectory& traj) {
  std::vector<DualField> w;
  w.reserve(static_cast<std::size_t>(pb.time.steps()));
  for (int n = 1; n <= pb.time.steps(); ++n) {
    DualField wn = pb.perturbation.is_zero() ? DualField(pb.space()) : pb.perturbation.apply(traj[n], pb.time.time(n));
    if (pb.has_phi2()) wn.values += detail::phi2_gradient(pb, traj[n]).values;
    w.push_back(std::move(wn));
  }
  return w;
}

/// (sum tau |u^n|_p^p + sum tau |v^n|_p^p)^{1/p}: discrete W^{1,p}(0,T;V).
inline double w1p_norm(const Trajectory& traj) {
  const double p = traj[0].space->exponent_p(), tau = traj.grid.tau();
  double acc = 0.0;
  for (int n = 1; n <= traj.steps(); ++n)
    acc += tau * (std::pow(norm_p(traj[n]), p) + std::pow(norm_p(traj.velocity(n)), p));
  return std::pow(acc, 1.0 / p);
}

/// (sum tau |a^n - b^n|_{p'}^{p'})^{1/p'}: discrete L^{p'}(0,T;V*).
inline double dual_lp_distance(const std::vector<DualField>& a, const std::vector<DualField>& b, double tau) {
  const double q = a.front().space->conjugate_p();
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n)
    acc += tau * std::pow(dual_norm(DualField(a[n].space, a[n].values - b[n].values)), q);
  return std::pow(acc, 1.0 / q);
}

inline FixedPointReport solve_regularized(const WedProblem& pb, const FixedPointConfig& cfg,
                                          const WedOptions& inner = {}) {
  cfg.validate();
  pb.validate();
  if (cfg.variant == FixedPointVariant::S && pb.perturbation.growth() == GrowthClass::XGrowth)
    throw Error(ErrorKind::PreconditionViolated,
                "the S iteration needs a V-growth perturbation; use S_tilde for X-growth terms");

  WedOptions opts = inner;
  opts.phi2_mode = Phi2Mode::Excluded;
  const double theta = cfg.damping_theta;
  const double tau = pb.time.tau();
  FixedPointReport rep;

  auto solve_inner = [&](const std::vector<DualField>& w, const Trajectory* warm) {
    if (warm) {
      opts.init = WedOptions::Init::Given;
      opts.initial = *warm;
    }
    WedReport r = minimize_wed(pb, w, opts);
    rep.bound_history.push_back(w1p_norm(r.minimizer));
    if (!std::isfinite(rep.bound_history.back()) || rep.bound_history.back() > cfg.bound_guard)
      throw Error(ErrorKind::DivergenceDetected,
                  "iterate norm " + std::to_string(rep.bound_history.back()) + " exceeds bound_guard");
    rep.inner_reports.push_back(r);
    return r.minimizer;
  };

  auto finish = [&](Trajectory u) {
    rep.converged = true;
    rep.coupled_residual = max_dual_norm(el_residual_fields(pb, u, feedback_forcing(pb, u), Phi2Mode::Excluded));
    rep.solution = std::move(u);
    return rep;
  };

  // Without feedback S is a constant map.
  if (pb.perturbation.is_zero() && !pb.has_phi2()) {
    Trajectory u = solve_inner(zero_forcing(pb), nullptr);
    rep.iterate_distances.push_back(0.0);
    return finish(std::move(u));
  }

  if (cfg.variant == FixedPointVariant::S) {
    Trajectory v = Trajectory::constant(pb.time, pb.u0);
    Trajectory warm = v;
    for (int k = 0; k < cfg.outer_max_iter; ++k) {
      Trajectory u = solve_inner(feedback_forcing(pb, v), &warm);
      const double dist = theta * lp_distance(u, v);
      rep.iterate_distances.push_back(dist);
      if (dist <= cfg.outer_tol) return finish(std::move(u));
      for (int n = 1; n <= v.steps(); ++n) v[n].values += theta * (u[n].values - v[n].values);
      warm = std::move(u);
    }
  } else {
    Trajectory warm = Trajectory::constant(pb.time, pb.u0);
    std::vector<DualField> w = feedback_forcing(pb, warm);
    for (int k = 0; k < cfg.outer_max_iter; ++k) {
      Trajectory u = solve_inner(w, &warm);
      const std::vector<DualField> z = feedback_forcing(pb, u);
      const double dist = theta * dual_lp_distance(z, w, tau);
      rep.iterate_distances.push_back(dist);
      if (dist <= cfg.outer_tol) return finish(std::move(u));
      for (std::size_t n = 0; n < w.size(); ++n) w[n].values += theta * (z[n].values - w[n].values);
      warm = std::move(u);
    }
  }
  throw Error(ErrorKind::MaxOuterIterExceeded,
              "fixed-point iteration did not converge in " + std::to_string(cfg.outer_max_iter) + " steps");
}

/// |argmin I_{w+dw} - argmin I_w|_{L^p} / |dw|_{L^{p'}} for a random direction
/// of size dw_scale (0 when dw_scale is 0).
inline double solution_map_continuity_probe(const WedProblem& pb, const std::vector<DualField>& w, double dw_scale,
                                            std::mt19937_64& rng, const WedOptions& opts = {}) {
  if (dw_scale == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DualField> dw;
  for (std::size_t n = 0; n < w.size(); ++n) {
    DualField d(pb.space());
    for (Eigen::Index i = 0; i < d.size(); ++i) d.values[i] = pb.is_pinned(i) ? 0.0 : normal(rng);
    dw.push_back(std::move(d));
  }
  std::vector<DualField> zero(w.size(), DualField(pb.space()));
  const double size = dual_lp_distance(dw, zero, pb.time.tau());
  std::vector<DualField> w2 = w;
  for (std::size_t n = 0; n < w.size(); ++n) {
    dw[n].values *= dw_scale / size;
    w2[n].values += dw[n].values;
  }
  const Trajectory a = minimize_wed(pb, w, opts).minimizer;
  const Trajectory b = minimize_wed(pb, w2, opts).minimizer;
  return lp_distance(a, b) / dw_scale;
}

/// Outcome of the discrete Gronwall check.
struct GronwallCheck {
  bool hypothesis = false;
  bool conclusion = false;
  explicit operator bool() const { return hypothesis && conclusion; }
};

/// Discrete Gronwall lemma on t_i = i tau with left-endpoint quadrature:
///   u_i <= a_i + sum_{j<i} tau B u_j   implies
///   u_i <= a_i + sum_{j<i} tau B a_j exp(B (t_i - t_j)).
/// Both sides are compared with the quadrature allowance 10 tau * scale.
inline GronwallCheck gronwall_bound(const std::vector<double>& alpha, double B, const std::vector<double>& u,
                                    double tau) {
  if (alpha.size() != u.size() || alpha.empty())
    throw Error(ErrorKind::PreconditionViolated, "alpha and u must share a non-empty grid");
  double scale = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) scale = std::max({scale, std::abs(alpha[i]), std::abs(u[i])});
  const double allowance = 10.0 * tau * scale;
  GronwallCheck out;
  double integral = 0.0;
  out.hypothesis = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > alpha[i] + integral + allowance) out.hypothesis = false;
    integral += tau * B * u[i];
  }
  if (!out.hypothesis) return out;
  out.conclusion = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double bound = alpha[i];
    for (std::size_t j = 0; j < i; ++j)
      bound += tau * B * alpha[j] * std::exp(B * tau * static_cast<double>(i - j));
    if (u[i] > bound + allowance) out.conclusion = false;
  }
  return out;
}

}  // namespace wedflow
