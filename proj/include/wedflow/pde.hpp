#pragma once

// 1-D discretizations of
//   (a) k coupled doubly-nonlinear equations alpha_i(u_i') - div(a_i |u_i'|^{m-2} u_i') = g_i(u),
//       with Neumann or Dirichlet boundary conditions;
//   (b) the clamped biharmonic flow u' + u'''' = beta u_x.
// Energies are assembled cell by cell; gradients are exact derivatives of the
// discrete energies, so Neumann conditions come out as natural conditions.

#include <wedflow/errors.hpp>
#include <wedflow/fixed_point.hpp>
#include <wedflow/moreau_yosida.hpp>
#include <wedflow/potentials.hpp>
#include <wedflow/spaces.hpp>
#include <wedflow/wed.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace wedflow {

enum class BoundaryCondition { Neumann, Dirichlet };

/// How the lower-order term |u|^{m-2}u needed for coercivity under Neumann
/// conditions is balanced.
enum class Wiring {
  NonconvexSplit,     // phi2 = (1/m) int |u|^m, f = g
  NonpotentialShift,  // phi2 = 0, f = g + |u|^{m-2} u
};

struct ParabolicSystemSpec {
  std::size_t components_k = 1;
  std::vector<ScalarKernel> alpha;  // dissipation integrand A_i with alpha_i = A_i'
  double exponent_p = 2.0;          // growth of A_i
  std::vector<std::vector<double>> coeff_a;
  double a_lower = 1.0;
  double a_upper = 1.0;
  double exponent_m = 2.0;
  CouplingFn coupling;
  BoundaryCondition bc = BoundaryCondition::Neumann;
  Field u0;

  const SpacePtr& space() const { return u0.space; }

  void validate() const {
    if (!u0.space) throw Error(ErrorKind::PreconditionViolated, "u0 is required");
    const DiscreteSpace& s = *u0.space;
    if (s.nodes() < 3) throw Error(ErrorKind::GridTooSmall, "m-Laplacian needs at least 3 nodes");
    if (s.components() != components_k || alpha.size() != components_k || coeff_a.size() != components_k)
      throw Error(ErrorKind::PreconditionViolated, "component counts of alpha, coeff_a and u0 disagree");
    if (!(exponent_m > 1.0) || !(exponent_p > 1.0)) throw Error(ErrorKind::BadExponent, "exponents must exceed 1");
    if (!(a_lower > 0.0) || a_upper < a_lower) throw Error(ErrorKind::BadBounds, "need 0 < a_lower <= a_upper");
    for (const auto& a : coeff_a) {
      if (a.size() != s.nodes()) throw Error(ErrorKind::PreconditionViolated, "coeff_a needs one value per node");
      for (double v : a)
        if (v < a_lower || v > a_upper) throw Error(ErrorKind::BadBounds, "coefficient a(x) outside declared bounds");
    }
  }
};

struct BiharmonicSpec {
  std::vector<double> beta;  // one value per node, or a single constant
  Field u0;

  void validate() const {
    if (!u0.space) throw Error(ErrorKind::PreconditionViolated, "u0 is required");
    const DiscreteSpace& s = *u0.space;
    const std::size_t M = s.nodes();
    if (M < 5) throw Error(ErrorKind::GridTooSmall, "biharmonic stencil needs at least 5 nodes");
    if (s.components() != 1) throw Error(ErrorKind::PreconditionViolated, "biharmonic flow is scalar");
    const auto& v = u0.values;
    const double h = s.coordinates()[1] - s.coordinates()[0];
    double curvature = 1.0;
    for (std::size_t j = 1; j + 1 < M; ++j)
      curvature = std::max(curvature, std::abs(v[static_cast<Eigen::Index>(j + 1)] - 2.0 * v[static_cast<Eigen::Index>(j)] +
                                               v[static_cast<Eigen::Index>(j - 1)]) / (h * h));
    const auto last = static_cast<Eigen::Index>(M - 1);
    const double zero_tol = 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff());
    if (std::abs(v[0]) > zero_tol || std::abs(v[last]) > zero_tol) throw Error(ErrorKind::PreconditionViolated, "u0 must vanish on the boundary");
    if (std::abs(v[1] - v[0]) / h > h * curvature || std::abs(v[last] - v[last - 1]) / h > h * curvature)
      throw Error(ErrorKind::PreconditionViolated, "u0 violates the clamped slope condition");
  }
};

namespace detail {

struct CellEnergy {
  std::size_t M = 0, k = 0;
  double m = 2.0;
  std::vector<std::vector<double>> cell_a;  // averaged coefficient per cell
  std::vector<double> h;
  bool lower_order = false;
};

inline std::shared_ptr<const CellEnergy> make_cell_energy(const ParabolicSystemSpec& spec, bool lower_order) {
  auto e = std::make_shared<CellEnergy>();
  const DiscreteSpace& s = *spec.space();
  e->M = s.nodes();
  e->k = s.components();
  e->m = spec.exponent_m;
  e->lower_order = lower_order;
  const auto& x = s.coordinates();
  for (std::size_t j = 0; j + 1 < e->M; ++j) e->h.push_back(x[j + 1] - x[j]);
  for (std::size_t c = 0; c < e->k; ++c) {
    std::vector<double> ca(e->M - 1);
    for (std::size_t j = 0; j + 1 < e->M; ++j) ca[j] = 0.5 * (spec.coeff_a[c][j] + spec.coeff_a[c][j + 1]);
    e->cell_a.push_back(std::move(ca));
  }
  return e;
}

}  // namespace detail

/// phi1 = (1/m) sum_i int ( a_i |u_i'|^m [+ |u_i|^m] ), the bracketed term present under Neumann.
inline PotentialHandle m_laplacian_phi1(const ParabolicSystemSpec& spec) {
  const bool lower = spec.bc == BoundaryCondition::Neumann;
  auto e = detail::make_cell_energy(spec, lower);
  auto value = [e](const Field& u) {
    const DiscreteSpace& s = *u.space;
    double acc = 0.0;
    for (std::size_t c = 0; c < e->k; ++c) {
      const std::size_t off = c * e->M;
      for (std::size_t j = 0; j + 1 < e->M; ++j) {
        const double d = (u.values[static_cast<Eigen::Index>(off + j + 1)] - u.values[static_cast<Eigen::Index>(off + j)]) / e->h[j];
        acc += e->cell_a[c][j] * e->h[j] * std::pow(std::abs(d), e->m) / e->m;
      }
      if (e->lower_order)
        for (std::size_t j = 0; j < e->M; ++j)
          acc += s.weight(j) * std::pow(std::abs(u.values[static_cast<Eigen::Index>(off + j)]), e->m) / e->m;
    }
    return acc;
  };
  auto gradient = [e](const Field& u) {
    const DiscreteSpace& s = *u.space;
    DualField g(u.space);
    for (std::size_t c = 0; c < e->k; ++c) {
      const std::size_t off = c * e->M;
      for (std::size_t j = 0; j + 1 < e->M; ++j) {
        const auto i0 = static_cast<Eigen::Index>(off + j), i1 = i0 + 1;
        const double d = (u.values[i1] - u.values[i0]) / e->h[j];
        const double flux = e->cell_a[c][j] * detail::signed_power(d, e->m - 1.0);
        g.values[i0] -= flux;
        g.values[i1] += flux;
      }
      for (std::size_t j = 0; j < e->M; ++j) {
        const auto i = static_cast<Eigen::Index>(off + j);
        g.values[i] /= s.weight(j);
        if (e->lower_order) g.values[i] += detail::signed_power(u.values[i], e->m - 1.0);
      }
    }
    return g;
  };
  auto hessian = [e](const Field& u) {
    const DiscreteSpace& s = *u.space;
    const Eigen::Index n = u.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t c = 0; c < e->k; ++c) {
      const std::size_t off = c * e->M;
      for (std::size_t j = 0; j + 1 < e->M; ++j) {
        const auto i0 = static_cast<Eigen::Index>(off + j), i1 = i0 + 1;
        const double d = (u.values[i1] - u.values[i0]) / e->h[j];
        const double stiff =
            e->cell_a[c][j] * (e->m - 1.0) * std::pow(std::max(std::abs(d), 1e-8), e->m - 2.0) / e->h[j];
        H(i0, i0) += stiff;
        H(i1, i1) += stiff;
        H(i0, i1) -= stiff;
        H(i1, i0) -= stiff;
      }
      for (std::size_t j = 0; j < e->M; ++j) {
        const auto i = static_cast<Eigen::Index>(off + j);
        H.row(i) /= s.weight(j);
        if (e->lower_order)
          H(i, i) += (e->m - 1.0) * std::pow(std::max(std::abs(u.values[i]), 1e-8), e->m - 2.0);
      }
    }
    return H;
  };
  return PotentialHandle(spec.space(), value, gradient, hessian, {}, "m-laplacian");
}

/// Energy split for the wiring; Dirichlet problems carry no lower-order term.
inline EnergySplit m_laplacian_energy(const ParabolicSystemSpec& spec, Wiring wiring = Wiring::NonpotentialShift) {
  spec.validate();
  EnergySplit split;
  split.phi1 = m_laplacian_phi1(spec);
  if (spec.bc == BoundaryCondition::Neumann && wiring == Wiring::NonconvexSplit) {
    split.phi2 = PotentialHandle::separable(
        spec.space(), std::vector<ScalarKernel>(spec.components_k, p_power_kernel(spec.exponent_m)), "lower-order");
  } else {
    split.phi2 = PotentialHandle::zero(spec.space());
  }
  split.kappa = 0.0;
  return split;
}

namespace detail {

// Second difference with reflected ghost values (u_{-1} = u_1, u_M = u_{M-2}).
inline Eigen::MatrixXd clamped_second_difference(const DiscreteSpace& s) {
  const auto M = static_cast<Eigen::Index>(s.nodes());
  const double h = s.coordinates()[1] - s.coordinates()[0];
  const double ih2 = 1.0 / (h * h);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(M, M);
  for (Eigen::Index j = 0; j < M; ++j) {
    B(j, j) = -2.0 * ih2;
    if (j == 0) B(0, 1) = 2.0 * ih2;
    else if (j == M - 1) B(M - 1, M - 2) = 2.0 * ih2;
    else {
      B(j, j - 1) = ih2;
      B(j, j + 1) = ih2;
    }
  }
  return B;
}

}  // namespace detail

/// phi1 = 1/2 sum_j w_j (D^2 u)_j^2 with clamped ghosts; phi2 = 0.
/// The gradient is the 5-point biharmonic stencil, applied matrix-free.
inline EnergySplit biharmonic_energy(const SpacePtr& space) {
  if (space->nodes() < 5) throw Error(ErrorKind::GridTooSmall, "biharmonic stencil needs at least 5 nodes");
  const std::size_t M = space->nodes();
  const double h = space->coordinates()[1] - space->coordinates()[0];
  const double ih2 = 1.0 / (h * h);
  auto second_diff = [M, ih2](const Eigen::VectorXd& u) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(M));
    const auto last = static_cast<Eigen::Index>(M - 1);
    d[0] = 2.0 * (u[1] - u[0]) * ih2;
    d[last] = 2.0 * (u[last - 1] - u[last]) * ih2;
    for (Eigen::Index j = 1; j < last; ++j) d[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * ih2;
    return d;
  };
  // B^T c for the same stencil.
  auto second_diff_adjoint = [M, ih2](const Eigen::VectorXd& c) {
    const auto last = static_cast<Eigen::Index>(M - 1);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
    out[0] += -2.0 * ih2 * c[0];
    out[1] += 2.0 * ih2 * c[0];
    out[last] += -2.0 * ih2 * c[last];
    out[last - 1] += 2.0 * ih2 * c[last];
    for (Eigen::Index j = 1; j < last; ++j) {
      out[j - 1] += ih2 * c[j];
      out[j] += -2.0 * ih2 * c[j];
      out[j + 1] += ih2 * c[j];
    }
    return out;
  };
  const Eigen::VectorXd w = space->weight_vector();
  auto value = [second_diff, w](const Field& u) {
    const Eigen::VectorXd d = second_diff(u.values);
    return 0.5 * (w.array() * d.array().square()).sum();
  };
  auto gradient = [second_diff, second_diff_adjoint, w](const Field& u) {
    const Eigen::VectorXd c = (w.array() * second_diff(u.values).array()).matrix();
    return DualField(u.space, (second_diff_adjoint(c).array() / w.array()).matrix());
  };
  const Eigen::MatrixXd B = detail::clamped_second_difference(*space);
  const Eigen::MatrixXd hess = w.cwiseInverse().asDiagonal() * B.transpose() * w.asDiagonal() * B;
  auto hessian = [hess](const Field&) { return hess; };
  EnergySplit split;
  split.phi1 = PotentialHandle(space, value, gradient, hessian, {}, "biharmonic");
  split.phi2 = PotentialHandle::zero(space);
  return split;
}

/// Boundary nodes of every component (Dirichlet elimination).
inline std::vector<bool> boundary_mask(const DiscreteSpace& s) {
  std::vector<bool> mask(s.size(), false);
  for (std::size_t c = 0; c < s.components(); ++c) {
    mask[c * s.nodes()] = true;
    mask[c * s.nodes() + s.nodes() - 1] = true;
  }
  return mask;
}

inline WedProblem assemble_problem(const ParabolicSystemSpec& spec, const TimeGrid& time, Wiring wiring,
                                   std::optional<YosidaConfig> yosida = std::nullopt) {
  spec.validate();
  const bool neumann = spec.bc == BoundaryCondition::Neumann;
  if (neumann && wiring == Wiring::NonpotentialShift && spec.exponent_p < spec.exponent_m)
    throw Error(ErrorKind::ExponentMismatch, "the nonpotential shift needs exponent_p >= exponent_m");
  WedProblem pb;
  pb.time = time;
  pb.psi = PotentialHandle::separable(spec.space(), spec.alpha, "system-dissipation");
  pb.energy = m_laplacian_energy(spec, wiring);
  const bool shift = neumann && wiring == Wiring::NonpotentialShift;
  pb.perturbation = make_perturbation_coupling(spec.coupling, spec.components_k, shift, spec.exponent_m);
  pb.u0 = spec.u0;
  if (pb.has_phi2()) {
    YosidaConfig cfg = yosida.value_or(YosidaConfig{});
    cfg.exponent_p = spec.space()->exponent_p();
    pb.yosida = cfg;
  }
  if (!neumann) pb.pinned = boundary_mask(*spec.space());
  pb.validate();
  return pb;
}

inline WedProblem assemble_problem(const BiharmonicSpec& spec, const TimeGrid& time) {
  spec.validate();
  WedProblem pb;
  pb.time = time;
  pb.psi = make_p_power_dissipation(spec.u0.space, 2.0);
  pb.energy = biharmonic_energy(spec.u0.space);
  pb.perturbation = make_transport_perturbation(spec.u0.space, spec.beta);
  pb.u0 = spec.u0;
  pb.pinned = boundary_mask(*spec.u0.space);
  pb.validate();
  return pb;
}

/// Scalar-coefficient system spec on a uniform grid: alpha_i = p-power, a_i constant.
inline ParabolicSystemSpec uniform_system_spec(const SpacePtr& space, double exponent_p, double a, BoundaryCondition bc,
                                               Field u0, CouplingFn coupling = {}) {
  ParabolicSystemSpec spec;
  spec.components_k = space->components();
  spec.alpha.assign(space->components(), p_power_kernel(exponent_p));
  spec.exponent_p = exponent_p;
  spec.coeff_a.assign(space->components(), std::vector<double>(space->nodes(), a));
  spec.a_lower = spec.a_upper = a;
  spec.exponent_m = space->exponent_m();
  spec.coupling = std::move(coupling);
  spec.bc = bc;
  spec.u0 = std::move(u0);
  return spec;
}

/// Fitted C in |u|_m^m <= C |Du|_m^m over random fields vanishing on the boundary.
inline double fit_poincare_constant(const SpacePtr& space, std::mt19937_64& rng, int samples) {
  const std::size_t M = space->nodes();
  const double m = space->exponent_m();
  const auto& x = space->coordinates();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Field u = random_field(space, rng, 1.0);
    for (std::size_t c = 0; c < space->components(); ++c) {
      u.values[static_cast<Eigen::Index>(c * M)] = 0.0;
      u.values[static_cast<Eigen::Index>(c * M + M - 1)] = 0.0;
    }
    const double lhs = detail::weighted_power_sum(*space, u.values, m);
    double rhs = 0.0;
    for (std::size_t c = 0; c < space->components(); ++c)
      for (std::size_t j = 0; j + 1 < M; ++j) {
        const double h = x[j + 1] - x[j];
        const double d = (u.values[static_cast<Eigen::Index>(c * M + j + 1)] - u.values[static_cast<Eigen::Index>(c * M + j)]) / h;
        rhs += h * std::pow(std::abs(d), m);
      }
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

}  // namespace wedflow
