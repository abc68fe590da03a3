#pragma once

// Convex potentials (dissipation psi, energy parts phi1/phi2) and the
// nonpotential perturbation f. Gradients are returned as dual densities so
// that pairing(gradient(u), v) is the directional derivative.

#include <wedflow/errors.hpp>
#include <wedflow/spaces.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace wedflow {

/// Nodewise integrand A with derivative alpha = A' and (optional) alpha'.
struct ScalarKernel {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second;
};

class PotentialHandle {
 public:
  using ValueFn = std::function<double(const Field&)>;
  using GradientFn = std::function<DualField(const Field&)>;
  using HessianFn = std::function<Eigen::MatrixXd(const Field&)>;
  using DomainFn = std::function<bool(const Field&)>;

  PotentialHandle() = default;

  PotentialHandle(SpacePtr space, ValueFn value, GradientFn gradient, HessianFn hessian = {},
                  DomainFn domain = {}, std::string name = "custom")
      : space_(std::move(space)),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        hessian_(std::move(hessian)),
        domain_(std::move(domain)),
        name_(std::move(name)) {}

  /// Zero functional; gradient 0, hessian 0.
  static PotentialHandle zero(SpacePtr space) {
    PotentialHandle h(
        space, [](const Field&) { return 0.0; }, [](const Field& u) { return DualField(u.space); },
        [](const Field& u) {
          const Eigen::Index n = u.size();
          return Eigen::MatrixXd::Zero(n, n).eval();
        },
        {}, "zero");
    h.zero_ = true;
    return h;
  }

  /// value(u) = sum_j w_j A_c(u_j), c the component of node j.
  static PotentialHandle separable(SpacePtr space, std::vector<ScalarKernel> per_component, std::string name) {
    if (per_component.size() != space->components())
      throw Error(ErrorKind::PreconditionViolated, "one scalar kernel per component required");
    auto kernels = std::make_shared<const std::vector<ScalarKernel>>(std::move(per_component));
    PotentialHandle h(
        space,
        [kernels](const Field& u) {
          const DiscreteSpace& s = *u.space;
          double acc = 0.0;
          for (Eigen::Index i = 0; i < u.size(); ++i) {
            const auto iu = static_cast<std::size_t>(i);
            acc += s.weight(iu) * (*kernels)[s.component_of(iu)].value(u.values[i]);
          }
          return acc;
        },
        [kernels](const Field& u) {
          DualField g(u.space);
          const DiscreteSpace& s = *u.space;
          for (Eigen::Index i = 0; i < u.size(); ++i)
            g.values[i] = (*kernels)[s.component_of(static_cast<std::size_t>(i))].derivative(u.values[i]);
          return g;
        },
        [kernels](const Field& u) {
          const DiscreteSpace& s = *u.space;
          Eigen::VectorXd d(u.size());
          for (Eigen::Index i = 0; i < u.size(); ++i) {
            const ScalarKernel& k = (*kernels)[s.component_of(static_cast<std::size_t>(i))];
            if (k.second) {
              d[i] = k.second(u.values[i]);
            } else {
              const double step = 1e-6 * std::max(1.0, std::abs(u.values[i]));
              d[i] = (k.derivative(u.values[i] + step) - k.derivative(u.values[i] - step)) / (2.0 * step);
            }
          }
          return Eigen::MatrixXd(d.asDiagonal());
        },
        {}, std::move(name));
    h.kernels_ = std::move(kernels);
    return h;
  }

  double value(const Field& u) const {
    if (!in_domain(u)) return std::numeric_limits<double>::infinity();
    return value_(u);
  }
  DualField gradient(const Field& u) const { return gradient_(u); }

  /// Jacobian of the gradient density with respect to nodal values.
  /// Falls back to central differences of the gradient when no analytic form is set.
  Eigen::MatrixXd hessian(const Field& u) const {
    if (hessian_) return hessian_(u);
    const Eigen::Index n = u.size();
    Eigen::MatrixXd H(n, n);
    Field probe = u;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double step = 1e-6 * std::max(1.0, std::abs(u.values[l]));
      probe.values[l] = u.values[l] + step;
      const Eigen::VectorXd gp = gradient_(probe).values;
      probe.values[l] = u.values[l] - step;
      const Eigen::VectorXd gm = gradient_(probe).values;
      probe.values[l] = u.values[l];
      H.col(l) = (gp - gm) / (2.0 * step);
    }
    return H;
  }

  bool in_domain(const Field& u) const { return domain_ ? domain_(u) : true; }
  bool separable() const noexcept { return kernels_ != nullptr; }
  bool is_zero() const noexcept { return zero_; }
  const ScalarKernel& kernel_for(std::size_t node) const {
    return (*kernels_)[space_->component_of(node)];
  }
  const SpacePtr& space() const noexcept { return space_; }
  const std::string& name() const noexcept { return name_; }
  bool valid() const noexcept { return static_cast<bool>(value_); }

 private:
  SpacePtr space_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  DomainFn domain_;
  std::string name_;
  std::shared_ptr<const std::vector<ScalarKernel>> kernels_;
  bool zero_ = false;
};

/// phi = phi1 - phi2 with declared domination factor kappa in [0,1).
struct EnergySplit {
  PotentialHandle phi1;
  PotentialHandle phi2;
  double kappa = 0.0;

  bool convex() const { return !phi2.valid() || phi2.is_zero(); }
};

enum class GrowthClass { VGrowth, XGrowth };

class Perturbation {
 public:
  using ApplyFn = std::function<DualField(const Field&, double)>;

  Perturbation() = default;
  Perturbation(ApplyFn apply, GrowthClass growth, std::string name = "custom")
      : apply_(std::move(apply)), growth_(growth), name_(std::move(name)) {}

  static Perturbation none() {
    Perturbation p([](const Field& u, double) { return DualField(u.space); }, GrowthClass::VGrowth, "none");
    p.zero_ = true;
    return p;
  }

  DualField apply(const Field& u, double t) const { return apply_(u, t); }
  GrowthClass growth() const noexcept { return growth_; }
  bool is_zero() const noexcept { return zero_ || !apply_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ApplyFn apply_;
  GrowthClass growth_ = GrowthClass::VGrowth;
  std::string name_;
  bool zero_ = false;
};

// ---------------------------------------------------------------------------
// Shipped potentials.

inline ScalarKernel p_power_kernel(double p) {
  return ScalarKernel{
      [p](double s) { return std::pow(std::abs(s), p) / p; },
      [p](double s) { return detail::signed_power(s, p - 1.0); },
      // Floor |s| so that p < 2 stays finite at the origin.
      [p](double s) { return (p - 1.0) * std::pow(std::max(std::abs(s), 1e-8), p - 2.0); },
  };
}

inline PotentialHandle make_p_power_dissipation(const SpacePtr& space, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorKind::BadExponent, "dissipation exponent must exceed 1");
  return PotentialHandle::separable(space, std::vector<ScalarKernel>(space->components(), p_power_kernel(p)),
                                    "p-power");
}

/// (c/2) sum_j w_j u_j^2.
inline PotentialHandle make_quadratic_potential(const SpacePtr& space, double coefficient) {
  ScalarKernel k{
      [coefficient](double s) { return 0.5 * coefficient * s * s; },
      [coefficient](double s) { return coefficient * s; },
      [coefficient](double) { return coefficient; },
  };
  return PotentialHandle::separable(space, std::vector<ScalarKernel>(space->components(), k), "quadratic");
}

/// Checks that alpha is nondecreasing on a sampling grid of [-range, range].
inline void check_monotone(const std::function<double(double)>& alpha, double range = 10.0, int samples = 4001) {
  double prev = alpha(-range);
  for (int i = 1; i < samples; ++i) {
    const double s = -range + 2.0 * range * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double a = alpha(s);
    if (a < prev - 1e-12)
      throw Error(ErrorKind::MonotonicityViolation, "alpha decreases near s = " + std::to_string(s));
    prev = a;
  }
}

/// Dissipation sum_j w_j A(u_j) from a monotone alpha and its exact primitive A.
inline PotentialHandle make_general_dissipation(const SpacePtr& space, std::function<double(double)> alpha,
                                                std::function<double(double)> primitive,
                                                std::function<double(double)> alpha_prime = {}) {
  check_monotone(alpha);
  ScalarKernel k{std::move(primitive), std::move(alpha), std::move(alpha_prime)};
  return PotentialHandle::separable(space, std::vector<ScalarKernel>(space->components(), k), "general");
}

namespace detail {

// Solve alpha(s) = target for nondecreasing alpha, safeguarded Newton on an
// expanding bracket.
inline double invert_monotone(const ScalarKernel& k, double target, double tol, int max_iter = 200) {
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && k.derivative(lo) > target; ++i) lo *= 2.0;
  for (int i = 0; i < 200 && k.derivative(hi) < target; ++i) hi *= 2.0;
  if (k.derivative(lo) > target || k.derivative(hi) < target)
    throw Error(ErrorKind::InnerSolveFailed, "could not bracket the inverse of alpha");
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double r = k.derivative(s) - target;
    if (std::abs(r) <= tol) return s;
    if (r > 0.0) hi = s; else lo = s;
    double next = 0.5 * (lo + hi);
    if (k.second) {
      const double d = k.second(s);
      if (d > 0.0 && std::isfinite(d)) {
        const double newton = s - r / d;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s))) return next;
    s = next;
  }
  return s;
}

}  // namespace detail

/// psi*(xi) = sup_w { <xi, w> - psi(w) }, computed nodewise for separable psi.
inline double fenchel_conjugate_value(const PotentialHandle& psi, const DualField& xi, double solver_tol = 1e-12) {
  if (!psi.separable()) throw Error(ErrorKind::NonSeparable, "Fenchel conjugate needs a separable potential");
  const DiscreteSpace& s = *xi.space;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const ScalarKernel& k = psi.kernel_for(iu);
    const double w = detail::invert_monotone(k, xi.values[i], solver_tol);
    acc += s.weight(iu) * (xi.values[i] * w - k.value(w));
  }
  return acc;
}

/// Nodewise inverse of the dissipation gradient: the w with gradient(w) = xi.
inline Field gradient_inverse(const PotentialHandle& psi, const DualField& xi, double solver_tol = 1e-12) {
  if (!psi.separable()) throw Error(ErrorKind::NonSeparable, "gradient inverse needs a separable potential");
  Field w(xi.space);
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    w.values[i] = detail::invert_monotone(psi.kernel_for(static_cast<std::size_t>(i)), xi.values[i], solver_tol);
  return w;
}

// ---------------------------------------------------------------------------
// Perturbations.

/// Nodewise coupling g : R^k -> R^k applied at every grid node, plus the
/// optional lower-order shift |u_i|^{m-2} u_i.
using CouplingFn = std::function<void(const std::vector<double>& u, std::vector<double>& out)>;

inline Perturbation make_perturbation_coupling(CouplingFn g, std::size_t k, bool lower_order_shift = false,
                                               double exponent_m = 2.0) {
  if (!g && !lower_order_shift) return Perturbation::none();
  return Perturbation(
      [g = std::move(g), k, lower_order_shift, exponent_m](const Field& u, double) {
        const DiscreteSpace& s = *u.space;
        if (s.components() != k)
          throw Error(ErrorKind::PreconditionViolated, "coupling component count does not match the space");
        const std::size_t M = s.nodes();
        DualField out(u.space);
        std::vector<double> local(k), res(k);
        for (std::size_t j = 0; j < M; ++j) {
          for (std::size_t c = 0; c < k; ++c) local[c] = u.values[static_cast<Eigen::Index>(c * M + j)];
          std::fill(res.begin(), res.end(), 0.0);
          if (g) g(local, res);
          for (std::size_t c = 0; c < k; ++c) {
            double v = res[c];
            if (lower_order_shift) v += detail::signed_power(local[c], exponent_m - 1.0);
            out.values[static_cast<Eigen::Index>(c * M + j)] = v;
          }
        }
        return out;
      },
      GrowthClass::VGrowth, lower_order_shift ? "coupling+shift" : "coupling");
}

/// f(u) = c u, a scalar linear perturbation.
inline Perturbation make_linear_perturbation(double c) {
  if (c == 0.0) return Perturbation::none();
  return Perturbation([c](const Field& u, double) { return DualField(u.space, c * u.values); },
                      GrowthClass::VGrowth, "linear");
}

/// f(u) = beta * Du: centered differences inside, one-sided at the ends.
inline Perturbation make_transport_perturbation(const SpacePtr& space, std::vector<double> beta) {
  const std::size_t M = space->nodes();
  if (M < 3) throw Error(ErrorKind::GridTooSmall, "transport perturbation needs at least 3 nodes");
  if (beta.size() == 1) beta.assign(M, beta.front());
  if (beta.size() != M) throw Error(ErrorKind::PreconditionViolated, "beta must have one value per node");
  return Perturbation(
      [beta = std::move(beta)](const Field& u, double) {
        const DiscreteSpace& s = *u.space;
        const std::size_t M = s.nodes();
        const auto& x = s.coordinates();
        DualField out(u.space);
        for (std::size_t c = 0; c < s.components(); ++c) {
          auto at = [&](std::size_t j) { return u.values[static_cast<Eigen::Index>(c * M + j)]; };
          for (std::size_t j = 0; j < M; ++j) {
            double d;
            if (j == 0) d = (at(1) - at(0)) / (x[1] - x[0]);
            else if (j + 1 == M) d = (at(M - 1) - at(M - 2)) / (x[M - 1] - x[M - 2]);
            else d = (at(j + 1) - at(j - 1)) / (x[j + 1] - x[j - 1]);
            out.values[static_cast<Eigen::Index>(c * M + j)] = beta[j] * d;
          }
        }
        return out;
      },
      GrowthClass::XGrowth, "transport");
}

/// Adds a time-dependent force g(t) (given as a dual density) to f.
inline Perturbation with_forcing(Perturbation base, std::function<DualField(const SpacePtr&, double)> force) {
  const GrowthClass growth = base.growth();
  return Perturbation(
      [base = std::move(base), force = std::move(force)](const Field& u, double t) {
        DualField out = base.apply(u, t);
        out.values += force(u.space, t).values;
        return out;
      },
      growth, "forced");
}

// ---------------------------------------------------------------------------
// Sampled structure diagnostics. These report observed quantities; the
// constants of the abstract assumptions are not available in closed form.

inline Field random_field(const SpacePtr& space, std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Field u(space);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.values[i] = dist(rng);
  return u;
}

/// Largest observed violation of value(theta u + (1-theta) v) <= theta value(u) + (1-theta) value(v).
inline double max_convexity_violation(const PotentialHandle& phi, std::mt19937_64& rng, int samples,
                                      double amplitude) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Field u = random_field(phi.space(), rng, amplitude);
    const Field v = random_field(phi.space(), rng, amplitude);
    const double theta = unit(rng);
    Field mid(phi.space(), theta * u.values + (1.0 - theta) * v.values);
    worst = std::max(worst, phi.value(mid) - theta * phi.value(u) - (1.0 - theta) * phi.value(v));
  }
  return worst;
}

/// Largest observed violation of value(v) >= value(u) + <gradient(u), v - u>.
inline double max_subgradient_violation(const PotentialHandle& phi, std::mt19937_64& rng, int samples,
                                        double amplitude) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Field u = random_field(phi.space(), rng, amplitude);
    const Field v = random_field(phi.space(), rng, amplitude);
    const Field d(phi.space(), v.values - u.values);
    worst = std::max(worst, phi.value(u) + pairing(phi.gradient(u), d) - phi.value(v));
  }
  return worst;
}

/// Observed sup of |gradient(u)|_{p'}^{p'} / (|u|_p^p + 1).
inline double growth_ratio_bound(const PotentialHandle& phi, std::mt19937_64& rng, int samples, double amplitude) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Field u = random_field(phi.space(), rng, amplitude);
    const DualField g = phi.gradient(u);
    const double q = u.space->conjugate_p();
    const double num = std::pow(dual_norm(g), q);
    const double den = std::pow(norm_p(u), u.space->exponent_p()) + 1.0;
    worst = std::max(worst, num / den);
  }
  return worst;
}

/// Fitted C in phi2(u) <= kappa phi1(u) + C (|u|_p^p + 1); never negative.
inline double fit_domination_constant(const EnergySplit& split, std::mt19937_64& rng, int samples,
                                      double amplitude) {
  if (split.convex()) return 0.0;
  double c = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Field u = random_field(split.phi1.space(), rng, amplitude);
    const double excess = split.phi2.value(u) - split.kappa * split.phi1.value(u);
    c = std::max(c, excess / (std::pow(norm_p(u), u.space->exponent_p()) + 1.0));
  }
  return c;
}

}  // namespace wedflow
