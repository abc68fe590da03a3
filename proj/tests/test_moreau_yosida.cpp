#include <wedflow/moreau_yosida.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wedflow;

namespace {

ScalarKernel quartic_kernel() {
  return {[](double s) { return 0.25 * s * s * s * s; }, [](double s) { return s * s * s; },
          [](double s) { return 3.0 * s * s; }};
}

}  // namespace

TEST(Yosida, QuadraticClosedForms) {
  auto sp = DiscreteSpace::uniform(7, 2.0, 2.0);
  const PotentialHandle phi = make_quadratic_potential(sp, 1.0);
  const Field u = sample_field(sp, [](double x, std::size_t) { return 3.0 * x - 1.0; });
  for (double l : {1.0, 0.1, 1e-3}) {
    const YosidaConfig cfg{l, 2.0};
    const Eigen::VectorXd expect = u.values / (1.0 + l);
    EXPECT_LE((resolvent(phi, u, cfg).values - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((yosida_gradient(phi, u, cfg).values - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(moreau_envelope(phi, u, cfg), phi.value(u) / (1.0 + l), 1e-12);
  }
}

// Reference values from an independent scalar root solve (Brent / mpmath).
TEST(Yosida, QuarticScalarFrozen) {
  auto sp = DiscreteSpace::from_weights({1.0}, 2.0);
  const PotentialHandle phi = PotentialHandle::separable(sp, {quartic_kernel()}, "quartic");
  const Field u = make_field(sp, {1.3});
  const YosidaConfig cfg{0.1, 2.0};
  EXPECT_NEAR(resolvent(phi, u, cfg).values[0], 1.1485049072166529, 1e-11);
  EXPECT_NEAR(yosida_gradient(phi, u, cfg).values[0], 1.5149509278334716, 1e-9);
  EXPECT_NEAR(moreau_envelope(phi, u, cfg), 0.54973595938946584, 1e-11);

  auto sp3 = DiscreteSpace::from_weights({1.0}, 3.0);
  const PotentialHandle phi3 = PotentialHandle::separable(sp3, {quartic_kernel()}, "quartic");
  const YosidaConfig cfg3{0.1, 3.0};
  const Field u3 = make_field(sp3, {1.3});
  EXPECT_NEAR(resolvent(phi3, u3, cfg3).values[0], 1.1729639461099492, 1e-11);
  EXPECT_NEAR(yosida_gradient(phi3, u3, cfg3).values[0], 1.6138158987955902, 1e-8);
  EXPECT_NEAR(moreau_envelope(phi3, u3, cfg3), 0.54157456739923496, 1e-11);
}

TEST(Yosida, NonSeparableMatchesSeparable) {
  // the same quartic presented without its kernel takes the Newton route
  auto sp = DiscreteSpace::uniform(6, 2.0, 2.0);
  const PotentialHandle sep = PotentialHandle::separable(sp, {quartic_kernel()}, "quartic");
  const PotentialHandle opaque(
      sp, [sep](const Field& u) { return sep.value(u); }, [sep](const Field& u) { return sep.gradient(u); },
      [sep](const Field& u) { return sep.hessian(u); });
  ASSERT_FALSE(opaque.separable());
  std::mt19937_64 rng(4);
  const Field u = random_field(sp, rng, 2.0);
  for (double p : {1.5, 2.0, 3.0}) {
    auto spp = DiscreteSpace::uniform(6, p, 2.0);
    const Field up(spp, u.values);
    const YosidaConfig cfg{0.2, p};
    const PotentialHandle a = PotentialHandle::separable(spp, {quartic_kernel()}, "quartic");
    const PotentialHandle b(
        spp, [a](const Field& v) { return a.value(v); }, [a](const Field& v) { return a.gradient(v); },
        [a](const Field& v) { return a.hessian(v); });
    EXPECT_LE((resolvent(a, up, cfg).values - resolvent(b, up, cfg).values).cwiseAbs().maxCoeff(), 1e-9) << p;
  }
}

TEST(Yosida, EnvelopeGradientAndJacobian) {
  auto sp = DiscreteSpace::uniform(5, 2.0, 2.0);
  const PotentialHandle phi = PotentialHandle::separable(sp, {quartic_kernel()}, "quartic");
  const YosidaConfig cfg{0.05, 2.0};
  const PotentialHandle env = make_moreau_envelope(phi, cfg);
  std::mt19937_64 rng(9);
  const Field u = random_field(sp, rng, 1.5);
  const DualField g = env.gradient(u);
  const Eigen::MatrixXd J = env.hessian(u);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    Field a = u, b = u;
    a.values[i] += h;
    b.values[i] -= h;
    const double fd = (env.value(a) - env.value(b)) / (2.0 * h);
    EXPECT_NEAR(fd, sp->weight(static_cast<std::size_t>(i)) * g.values[i], 1e-7);
    const Eigen::VectorXd col = (env.gradient(a).values - env.gradient(b).values) / (2.0 * h);
    EXPECT_LE((col - J.col(i)).cwiseAbs().maxCoeff(), 1e-5);
  }
  // the envelope lies below phi
  EXPECT_LE(env.value(u), phi.value(u));
}

TEST(Yosida, NormIdentityAndGrowth) {
  std::mt19937_64 rng(12);
  for (double p : {1.5, 2.0, 3.0}) {
    auto sp = DiscreteSpace::uniform(8, p, 2.0);
    const PotentialHandle phi = PotentialHandle::separable(sp, {quartic_kernel()}, "quartic");
    const YosidaConfig cfg{0.1, p};
    const Field u = random_field(sp, rng, 2.0);
    const Field j = resolvent(phi, u, cfg);
    const double lhs = std::pow(dual_norm(yosida_gradient(phi, u, cfg)), sp->conjugate_p());
    const double rhs = std::pow(norm_p(Field(sp, (u.values - j.values) / cfg.lambda)), p);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
    EXPECT_LE(yosida_growth_ratio(phi, cfg, rng, 50, 2.0), 1.0);
  }
}

TEST(Yosida, ConfigValidation) {
  YosidaConfig cfg;
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = YosidaConfig{};
  cfg.exponent_p = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
}
