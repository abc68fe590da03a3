#pragma once

// Finite-dimensional stand-ins for V = L^p(Omega) and X = W^{1,m}(Omega) on a
// 1-D grid over [0,1]. Fields hold nodal values; dual fields hold nodal
// densities, with the quadrature weights living in the pairing.

#include <wedflow/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace wedflow {

class DiscreteSpace {
 public:
  /// General grid with caller-supplied coordinates and positive quadrature
  /// weights. `components` stacks k copies of the grid component-major.
  DiscreteSpace(std::vector<double> coordinates, std::vector<double> weights, double exponent_p,
                double exponent_m, std::size_t components = 1)
      : coordinates_(std::move(coordinates)),
        weights_(std::move(weights)),
        p_(exponent_p),
        m_(exponent_m),
        components_(components) {
    if (weights_.empty() || weights_.size() != coordinates_.size())
      throw Error(ErrorKind::GridTooSmall, "coordinates and weights must be non-empty and of equal length");
    if (!(p_ > 1.0) || !std::isfinite(p_)) throw Error(ErrorKind::BadExponent, "exponent_p must lie in (1, inf)");
    if (!(m_ > 1.0) || !std::isfinite(m_)) throw Error(ErrorKind::BadExponent, "exponent_m must lie in (1, inf)");
    if (components_ == 0) throw Error(ErrorKind::GridTooSmall, "at least one component required");
    for (double w : weights_)
      if (!(w > 0.0)) throw Error(ErrorKind::GridTooSmall, "quadrature weights must be strictly positive");
  }

  /// Uniform grid on [0,1] with trapezoid weights.
  static std::shared_ptr<const DiscreteSpace> uniform(std::size_t nodes, double exponent_p, double exponent_m,
                                                      std::size_t components = 1) {
    if (nodes < 2) throw Error(ErrorKind::GridTooSmall, "uniform grid needs at least 2 nodes");
    const double h = 1.0 / static_cast<double>(nodes - 1);
    std::vector<double> x(nodes), w(nodes, h);
    for (std::size_t j = 0; j < nodes; ++j) x[j] = static_cast<double>(j) * h;
    x.back() = 1.0;
    w.front() = w.back() = 0.5 * h;
    return std::make_shared<const DiscreteSpace>(std::move(x), std::move(w), exponent_p, exponent_m, components);
  }

  static std::shared_ptr<const DiscreteSpace> from_weights(std::vector<double> weights, double exponent_p,
                                                           double exponent_m = 2.0) {
    std::vector<double> x(weights.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      x[j] = acc;
      acc += weights[j];
    }
    return std::make_shared<const DiscreteSpace>(std::move(x), std::move(weights), exponent_p, exponent_m, 1);
  }

  std::size_t nodes() const noexcept { return weights_.size(); }
  std::size_t components() const noexcept { return components_; }
  /// Length of a stacked field: nodes() * components().
  std::size_t size() const noexcept { return weights_.size() * components_; }

  const std::vector<double>& coordinates() const noexcept { return coordinates_; }
  const std::vector<double>& quad_weights() const noexcept { return weights_; }
  double weight(std::size_t i) const noexcept { return weights_[i % weights_.size()]; }
  double coordinate(std::size_t i) const noexcept { return coordinates_[i % coordinates_.size()]; }
  std::size_t component_of(std::size_t i) const noexcept { return i / weights_.size(); }

  double exponent_p() const noexcept { return p_; }
  double exponent_m() const noexcept { return m_; }
  double conjugate_p() const noexcept { return p_ / (p_ - 1.0); }
  double conjugate_m() const noexcept { return m_ / (m_ - 1.0); }

  double measure() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

  /// Stacked weight vector of length size().
  Eigen::VectorXd weight_vector() const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) w[static_cast<Eigen::Index>(i)] = weight(i);
    return w;
  }

 private:
  std::vector<double> coordinates_;
  std::vector<double> weights_;
  double p_;
  double m_;
  std::size_t components_;
};

using SpacePtr = std::shared_ptr<const DiscreteSpace>;

/// Nodal values of a state variable.
struct Field {
  Eigen::VectorXd values;
  SpacePtr space;

  Field() = default;
  explicit Field(SpacePtr s) : values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s->size()))), space(std::move(s)) {}
  Field(SpacePtr s, Eigen::VectorXd v) : values(std::move(v)), space(std::move(s)) {
    if (static_cast<std::size_t>(values.size()) != space->size())
      throw Error(ErrorKind::PreconditionViolated, "field length does not match its space");
  }

  Eigen::Index size() const noexcept { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }
};

/// Nodal densities of a dual element.
struct DualField {
  Eigen::VectorXd values;
  SpacePtr space;

  DualField() = default;
  explicit DualField(SpacePtr s)
      : values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s->size()))), space(std::move(s)) {}
  DualField(SpacePtr s, Eigen::VectorXd v) : values(std::move(v)), space(std::move(s)) {
    if (static_cast<std::size_t>(values.size()) != space->size())
      throw Error(ErrorKind::PreconditionViolated, "dual field length does not match its space");
  }

  Eigen::Index size() const noexcept { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }
};

namespace detail {

inline double signed_power(double s, double exponent_minus_one) {
  if (s == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(s), exponent_minus_one), s);
}

// sum_j w_j |v_j|^q, summed in index order
inline double weighted_power_sum(const DiscreteSpace& space, const Eigen::VectorXd& v, double q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    acc += space.weight(static_cast<std::size_t>(i)) * std::pow(std::abs(v[i]), q);
  return acc;
}

}  // namespace detail

/// <xi, u> = sum_j w_j xi_j u_j.
inline double pairing(const DualField& xi, const Field& u) {
  const DiscreteSpace& s = *u.space;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += s.weight(static_cast<std::size_t>(i)) * xi.values[i] * u.values[i];
  return acc;
}

inline double norm_p(const Field& u) {
  const double p = u.space->exponent_p();
  return std::pow(detail::weighted_power_sum(*u.space, u.values, p), 1.0 / p);
}

/// Norm with an explicit exponent, same weights.
inline double norm_with_exponent(const Field& u, double q) {
  return std::pow(detail::weighted_power_sum(*u.space, u.values, q), 1.0 / q);
}

/// Dual norm (sum_j w_j |xi_j|^{p'})^{1/p'} of the V* density representation.
inline double dual_norm(const DualField& xi) {
  const double q = xi.space->conjugate_p();
  return std::pow(detail::weighted_power_sum(*xi.space, xi.values, q), 1.0 / q);
}

/// (|u|_m^m + |Du|_m^m)^{1/m} with forward differences on cells, per component.
inline double norm_sobolev_m(const Field& u) {
  const DiscreteSpace& s = *u.space;
  const std::size_t M = s.nodes();
  if (M < 2) throw Error(ErrorKind::GridTooSmall, "Sobolev norm needs at least 2 nodes");
  const double m = s.exponent_m();
  double acc = detail::weighted_power_sum(s, u.values, m);
  const auto& x = s.coordinates();
  for (std::size_t c = 0; c < s.components(); ++c) {
    for (std::size_t j = 0; j + 1 < M; ++j) {
      const double h = x[j + 1] - x[j];
      const double du = (u.values[static_cast<Eigen::Index>(c * M + j + 1)] -
                         u.values[static_cast<Eigen::Index>(c * M + j)]) / h;
      acc += h * std::pow(std::abs(du), m);
    }
  }
  return std::pow(acc, 1.0 / m);
}

/// p-modulus duality map: nodal |u_j|^{q-2} u_j.
inline DualField duality_map(const Field& u, double exponent) {
  if (!(exponent > 1.0)) throw Error(ErrorKind::BadExponent, "duality map exponent must exceed 1");
  DualField out(u.space);
  for (Eigen::Index i = 0; i < u.size(); ++i) out.values[i] = detail::signed_power(u.values[i], exponent - 1.0);
  return out;
}

inline Field make_field(const SpacePtr& space, const std::vector<double>& values) {
  return Field(space, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

template <class Fn>
Field sample_field(const SpacePtr& space, Fn&& fn) {
  Field out(space);
  for (std::size_t i = 0; i < space->size(); ++i)
    out.values[static_cast<Eigen::Index>(i)] = fn(space->coordinate(i), space->component_of(i));
  return out;
}

}  // namespace wedflow
