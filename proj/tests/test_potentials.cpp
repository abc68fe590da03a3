#include <wedflow/potentials.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wedflow;

namespace {

double fd_directional(const PotentialHandle& phi, const Field& u, const Field& d, double h = 1e-6) {
  Field a(u.space, u.values + h * d.values), b(u.space, u.values - h * d.values);
  return (phi.value(a) - phi.value(b)) / (2.0 * h);
}

}  // namespace

TEST(PPower, ValueAndGradient) {
  auto sp = DiscreteSpace::uniform(6, 3.0, 2.0);
  const PotentialHandle psi = make_p_power_dissipation(sp, 3.0);
  Field u(sp, Eigen::VectorXd::Constant(6, -2.0));
  EXPECT_NEAR(psi.value(u), 8.0 / 3.0, 1e-14);
  EXPECT_NEAR(psi.gradient(u).values[3], -4.0, 1e-14);
  std::mt19937_64 rng(3);
  const Field v = random_field(sp, rng, 1.0), d = random_field(sp, rng, 1.0);
  EXPECT_NEAR(fd_directional(psi, v, d), pairing(psi.gradient(v), d), 1e-8);
}

TEST(PPower, FenchelConjugateClosedForm) {
  // psi = |v|^p/p  =>  psi*(xi) = |xi|^{p'}/p'
  for (double p : {1.5, 2.0, 3.5}) {
    auto sp = DiscreteSpace::uniform(5, p, 2.0);
    const PotentialHandle psi = make_p_power_dissipation(sp, p);
    DualField xi(sp, Eigen::VectorXd::LinSpaced(5, -1.5, 2.0));
    const double pc = p / (p - 1.0);
    double expect = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) expect += sp->weight(static_cast<std::size_t>(i)) * std::pow(std::abs(xi.values[i]), pc) / pc;
    EXPECT_NEAR(fenchel_conjugate_value(psi, xi), expect, 1e-10);
    const Field w = gradient_inverse(psi, xi);
    EXPECT_NEAR((psi.gradient(w).values - xi.values).cwiseAbs().maxCoeff(), 0.0, 1e-10);
  }
}

TEST(PPower, RejectsBadExponent) {
  auto sp = DiscreteSpace::uniform(4, 2.0, 2.0);
  EXPECT_THROW(make_p_power_dissipation(sp, 1.0), Error);
}

TEST(GeneralDissipation, MonotonicityChecked) {
  auto sp = DiscreteSpace::uniform(4, 2.0, 2.0);
  try {
    make_general_dissipation(sp, [](double s) { return std::sin(s); }, [](double s) { return 1.0 - std::cos(s); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MonotonicityViolation);
  }
  const PotentialHandle psi =
      make_general_dissipation(sp, [](double s) { return s + s * s * s; }, [](double s) { return 0.5 * s * s + 0.25 * s * s * s * s; });
  Field v(sp, Eigen::VectorXd::Constant(4, 1.0));
  EXPECT_NEAR(psi.gradient(v).values[0], 2.0, 1e-14);
}

TEST(Fenchel, NonSeparableRejected) {
  auto sp = DiscreteSpace::uniform(4, 2.0, 2.0);
  PotentialHandle custom(sp, [](const Field& u) { return u.values.squaredNorm(); },
                         [](const Field& u) { return DualField(u.space, 2.0 * u.values); });
  try {
    fenchel_conjugate_value(custom, DualField(sp));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonSeparable);
  }
}

TEST(Diagnostics, ConvexPotentialsHaveNoViolations) {
  auto sp = DiscreteSpace::uniform(8, 2.5, 2.0);
  std::mt19937_64 rng(11);
  const PotentialHandle psi = make_p_power_dissipation(sp, 2.5);
  EXPECT_LE(max_convexity_violation(psi, rng, 200, 2.0), 1e-12);
  EXPECT_LE(max_subgradient_violation(psi, rng, 200, 2.0), 1e-12);
}

TEST(Diagnostics, DominationConstantOfQuadraticSplit) {
  auto sp = DiscreteSpace::uniform(8, 2.0, 2.0);
  // phi1 = |u|^2, phi2 = |u|^2/4: with kappa = 1/4 no constant is needed,
  // with kappa = 1/10 the excess 0.15 |u|^2 stays below 0.15 (|u|^2 + 1)
  EnergySplit split{make_quadratic_potential(sp, 2.0), make_quadratic_potential(sp, 0.5), 0.25};
  std::mt19937_64 rng(5);
  EXPECT_NEAR(fit_domination_constant(split, rng, 100, 1.0), 0.0, 1e-14);
  split.kappa = 0.1;
  const double c = fit_domination_constant(split, rng, 100, 1.0);
  EXPECT_GT(c, 0.0);
  EXPECT_LT(c, 0.15);
}

TEST(Perturbation, LinearAndCoupling) {
  auto sp = DiscreteSpace::uniform(3, 2.0, 2.0, 2);
  Field u(sp, (Eigen::VectorXd(6) << 1, 2, 3, 4, 5, 6).finished());
  const Perturbation rot = make_perturbation_coupling(
      [](const std::vector<double>& x, std::vector<double>& out) {
        out[0] = x[1];
        out[1] = -x[0];
      },
      2);
  const DualField g = rot.apply(u, 0.0);
  EXPECT_DOUBLE_EQ(g.values[0], 4.0);
  EXPECT_DOUBLE_EQ(g.values[3], -1.0);
  EXPECT_EQ(rot.growth(), GrowthClass::VGrowth);
  EXPECT_TRUE(make_linear_perturbation(0.0).is_zero());
  const Perturbation shift = make_perturbation_coupling({}, 2, true, 3.0);
  EXPECT_DOUBLE_EQ(shift.apply(u, 0.0).values[1], 4.0);
}

TEST(Perturbation, TransportIsXGrowth) {
  auto sp = DiscreteSpace::uniform(5, 2.0, 2.0);
  const Perturbation f = make_transport_perturbation(sp, {2.0});
  EXPECT_EQ(f.growth(), GrowthClass::XGrowth);
  const Field u = sample_field(sp, [](double x, std::size_t) { return x * x; });
  // centered difference is exact for quadratics
  EXPECT_NEAR(f.apply(u, 0.0).values[2], 2.0 * 1.0, 1e-13);
  try {
    make_transport_perturbation(DiscreteSpace::uniform(2, 2.0, 2.0), {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooSmall);
  }
}

TEST(Perturbation, ForcingAddsTimeDependence) {
  auto sp = DiscreteSpace::uniform(3, 2.0, 2.0);
  const Perturbation f = with_forcing(make_linear_perturbation(1.0), [](const SpacePtr& s, double t) {
    return DualField(s, Eigen::VectorXd::Constant(3, t));
  });
  Field u(sp, Eigen::VectorXd::Constant(3, 1.0));
  EXPECT_DOUBLE_EQ(f.apply(u, 0.5).values[1], 1.5);
}
