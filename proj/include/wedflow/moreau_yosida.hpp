#pragma once

// Resolvent, Yosida approximation and Moreau envelope of a convex potential
// with respect to the p-modulus duality map F(x) = |x|^{p-2} x.
//
//   J_l u      = argmin_v  (l/p) |(u - v)/l|_p^p + phi(v)
//   A_l(u)     = F((u - J_l u)/l)               (gradient of the envelope)
//   phi_l(u)   = (l/p) |(u - J_l u)/l|_p^p + phi(J_l u)
//
// phi(0) must be finite.

#include <wedflow/errors.hpp>
#include <wedflow/potentials.hpp>
#include <wedflow/spaces.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace wedflow {

struct YosidaConfig {
  double lambda = 1e-2;
  double exponent_p = 2.0;
  double inner_tol = 1e-10;
  int inner_max_iter = 100;

  void validate() const {
    if (!(lambda > 0.0)) throw Error(ErrorKind::PreconditionViolated, "yosida lambda must be positive");
    if (!(exponent_p > 1.0)) throw Error(ErrorKind::BadExponent, "yosida exponent must exceed 1");
    if (!(inner_tol > 0.0)) throw Error(ErrorKind::PreconditionViolated, "inner_tol must be positive");
    if (inner_max_iter < 1) throw Error(ErrorKind::PreconditionViolated, "inner_max_iter must be positive");
  }
};

namespace detail {

inline double duality_slope(double x, double p) {
  if (x == 0.0) return p < 2.0 ? std::numeric_limits<double>::infinity() : (p == 2.0 ? 1.0 : 0.0);
  return (p - 1.0) * std::pow(std::abs(x), p - 2.0);
}

inline double kernel_second(const ScalarKernel& k, double s) {
  if (k.second) return k.second(s);
  const double step = 1e-6 * std::max(1.0, std::abs(s));
  return (k.derivative(s + step) - k.derivative(s - step)) / (2.0 * step);
}

// Root of h(r) = F((r - s)/l) + A'(r); h is increasing in r.
inline double scalar_resolvent(const ScalarKernel& k, double s, const YosidaConfig& cfg, double tol) {
  const double l = cfg.lambda, p = cfg.exponent_p;
  auto h = [&](double r) { return signed_power((r - s) / l, p - 1.0) + k.derivative(r); };
  const double h0 = h(s);
  if (std::abs(h0) <= tol) return s;
  double lo, hi;
  double step = std::max(1e-3, 1e-3 * std::abs(s));
  if (h0 > 0.0) {
    hi = s;
    lo = s - step;
    for (int i = 0; i < 200 && h(lo) > 0.0; ++i) { step *= 2.0; lo = s - step; }
  } else {
    lo = s;
    hi = s + step;
    for (int i = 0; i < 200 && h(hi) < 0.0; ++i) { step *= 2.0; hi = s + step; }
  }
  if (h(lo) > 0.0 || h(hi) < 0.0) throw Error(ErrorKind::InnerSolveFailed, "resolvent bracket not found");

  double r = 0.5 * (lo + hi);
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    const double hr = h(r);
    if (std::abs(hr) <= tol) return r;
    if (hr > 0.0) hi = r; else lo = r;
    double next = 0.5 * (lo + hi);
    const double slope = duality_slope((r - s) / l, p) / l + kernel_second(k, r);
    if (std::isfinite(slope) && slope > 0.0) {
      const double newton = r - hr / slope;
      if (newton > lo && newton < hi) next = newton;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r))) return next;
    r = next;
  }
  throw Error(ErrorKind::InnerSolveFailed, "resolvent Newton/bisection did not reach inner_tol");
}

inline Eigen::VectorXd duality_slopes(const Eigen::VectorXd& x, double p, double lambda) {
  Eigen::VectorXd d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) d[i] = std::min(duality_slope(x[i], p) / lambda, 1e15);
  return d;
}

}  // namespace detail

/// Optimality residual F((J - u)/l) + gradient(J), as a dual density.
inline DualField resolvent_residual(const PotentialHandle& phi, const Field& u, const Field& j,
                                    const YosidaConfig& cfg) {
  Field x(u.space, (j.values - u.values) / cfg.lambda);
  DualField r = duality_map(x, cfg.exponent_p);
  r.values += phi.gradient(j).values;
  return r;
}

inline Field resolvent(const PotentialHandle& phi, const Field& u, const YosidaConfig& cfg) {
  cfg.validate();
  if (phi.is_zero()) return u;
  Field j = u;
  if (phi.separable()) {
    const double tol = cfg.inner_tol / std::max(1.0, u.space->measure() * static_cast<double>(u.space->components()));
    for (Eigen::Index i = 0; i < u.size(); ++i)
      j.values[i] = detail::scalar_resolvent(phi.kernel_for(static_cast<std::size_t>(i)), u.values[i], cfg, tol);
    return j;
  }

  // Damped Newton on the strongly coercive objective.
  const double l = cfg.lambda, p = cfg.exponent_p;
  auto objective = [&](const Field& v) {
    Field x(u.space, (u.values - v.values) / l);
    return l / p * std::pow(norm_with_exponent(x, p), p) + phi.value(v);
  };
  const Eigen::VectorXd w = u.space->weight_vector();
  // Explicit guess from F((j - u)/l) = -gradient(u). Starting at j = u stalls
  // for p < 2, where F' is infinite at the origin.
  {
    const DualField g = phi.gradient(u);
    const double pc = p / (p - 1.0);
    Field guess = u;
    for (Eigen::Index i = 0; i < u.size(); ++i) guess.values[i] -= l * detail::signed_power(g.values[i], pc - 1.0);
    if (phi.in_domain(guess) && objective(guess) < objective(j)) j = guess;
  }
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    const DualField r = resolvent_residual(phi, u, j, cfg);
    if (dual_norm(r) <= cfg.inner_tol) return j;
    Eigen::MatrixXd H = phi.hessian(j);
    // Floor |x| so an entry sitting exactly at j_i = u_i (infinite slope for
    // p < 2) can still move.
    const Eigen::VectorXd x = ((j.values - u.values) / l).cwiseAbs().cwiseMax(1e-8);
    H.diagonal() += detail::duality_slopes(x, p, l);
    const Eigen::VectorXd dir = -H.partialPivLu().solve(r.values);
    const double g_dot_d = (w.array() * r.values.array() * dir.array()).sum();
    const double f0 = objective(j), r0 = dual_norm(r);
    double step = 1.0;
    Field trial = j;
    for (int ls = 0; ls < 60; ++ls) {
      trial.values = j.values + step * dir;
      // Near a nonsmooth point the objective decrease can drop below rounding;
      // a smaller residual is accepted as progress too.
      if (objective(trial) <= f0 + 1e-4 * step * g_dot_d) break;
      if (dual_norm(resolvent_residual(phi, u, trial, cfg)) < (1.0 - 1e-4 * step) * r0) break;
      step *= 0.5;
    }
    j = trial;
  }
  if (dual_norm(resolvent_residual(phi, u, j, cfg)) <= cfg.inner_tol) return j;
  throw Error(ErrorKind::InnerSolveFailed, "resolvent descent did not reach inner_tol");
}

inline DualField yosida_gradient(const PotentialHandle& phi, const Field& u, const YosidaConfig& cfg) {
  if (phi.is_zero()) return DualField(u.space);
  const Field j = resolvent(phi, u, cfg);
  return duality_map(Field(u.space, (u.values - j.values) / cfg.lambda), cfg.exponent_p);
}

inline double moreau_envelope(const PotentialHandle& phi, const Field& u, const YosidaConfig& cfg) {
  if (phi.is_zero()) return 0.0;
  const Field j = resolvent(phi, u, cfg);
  const Field x(u.space, (u.values - j.values) / cfg.lambda);
  return cfg.lambda / cfg.exponent_p * std::pow(norm_with_exponent(x, cfg.exponent_p), cfg.exponent_p) +
         phi.value(j);
}

/// Jacobian of A_l at u: D (D + H)^{-1} H with D = F'((J-u)/l)/l and H the Hessian of phi at J.
inline Eigen::MatrixXd yosida_jacobian(const PotentialHandle& phi, const Field& u, const YosidaConfig& cfg) {
  const Eigen::Index n = u.size();
  if (phi.is_zero()) return Eigen::MatrixXd::Zero(n, n);
  const Field j = resolvent(phi, u, cfg);
  const Eigen::MatrixXd H = phi.hessian(j);
  const Eigen::VectorXd d = detail::duality_slopes((j.values - u.values) / cfg.lambda, cfg.exponent_p, cfg.lambda);
  if (phi.separable()) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = H(i, i);
      out[i] = (d[i] + h) > 0.0 ? d[i] * h / (d[i] + h) : 0.0;
    }
    return Eigen::MatrixXd(out.asDiagonal());
  }
  Eigen::MatrixXd S = H;
  S.diagonal() += d;
  return d.asDiagonal() * S.partialPivLu().solve(H);
}

/// The envelope phi_l packaged as a potential (value, gradient A_l, Jacobian).
inline PotentialHandle make_moreau_envelope(const PotentialHandle& phi, const YosidaConfig& cfg) {
  cfg.validate();
  if (phi.is_zero()) return PotentialHandle::zero(phi.space());
  auto base = std::make_shared<const PotentialHandle>(phi);
  return PotentialHandle(
      phi.space(), [base, cfg](const Field& u) { return moreau_envelope(*base, u, cfg); },
      [base, cfg](const Field& u) { return yosida_gradient(*base, u, cfg); },
      [base, cfg](const Field& u) { return yosida_jacobian(*base, u, cfg); }, {}, "moreau(" + phi.name() + ")");
}

/// Observed max of |A_l(u)|_{p'}^{p'} / ((2/l) phi(0) + 2C |u|_p^p / l^p) with the
/// Young constant C = (2/p')^{p-1}/p. Values <= 1 confirm the growth bound.
inline double yosida_growth_ratio(const PotentialHandle& phi, const YosidaConfig& cfg, std::mt19937_64& rng,
                                  int samples, double amplitude) {
  const double p = cfg.exponent_p, pc = p / (p - 1.0);
  const double young = std::pow(2.0 / pc, p - 1.0) / p;
  const double phi0 = phi.value(Field(phi.space()));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Field u = random_field(phi.space(), rng, amplitude);
    const DualField a = yosida_gradient(phi, u, cfg);
    const double lhs = std::pow(detail::weighted_power_sum(*u.space, a.values, pc), 1.0);
    const double rhs = 2.0 / cfg.lambda * phi0 +
                       2.0 * young * detail::weighted_power_sum(*u.space, u.values, p) / std::pow(cfg.lambda, p);
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

}  // namespace wedflow
