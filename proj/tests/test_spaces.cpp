#include <wedflow/spaces.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wedflow;

TEST(DiscreteSpace, UniformTrapezoidWeights) {
  auto sp = DiscreteSpace::uniform(5, 2.0, 2.0);
  EXPECT_EQ(sp->nodes(), 5u);
  EXPECT_DOUBLE_EQ(sp->measure(), 1.0);
  EXPECT_DOUBLE_EQ(sp->quad_weights().front(), 0.125);
  EXPECT_DOUBLE_EQ(sp->quad_weights()[2], 0.25);
  EXPECT_DOUBLE_EQ(sp->coordinates().back(), 1.0);
}

TEST(DiscreteSpace, RejectsBadInput) {
  EXPECT_THROW(DiscreteSpace::uniform(1, 2.0, 2.0), Error);
  try {
    DiscreteSpace::uniform(4, 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadExponent);
  }
  EXPECT_THROW(DiscreteSpace({0.0, 1.0}, {0.5, 0.0}, 2.0, 2.0), Error);
}

TEST(DiscreteSpace, StackedComponents) {
  auto sp = DiscreteSpace::uniform(4, 2.0, 2.0, 3);
  EXPECT_EQ(sp->size(), 12u);
  EXPECT_EQ(sp->component_of(5), 1u);
  EXPECT_DOUBLE_EQ(sp->weight(4), sp->weight(0));
  EXPECT_DOUBLE_EQ(sp->coordinate(7), 1.0);
}

TEST(Norms, ConstantFieldHasUnitMeasureNorm) {
  auto sp = DiscreteSpace::uniform(9, 3.0, 2.0);
  Field u(sp, Eigen::VectorXd::Constant(9, 2.0));
  EXPECT_NEAR(norm_p(u), 2.0, 1e-14);
}

TEST(Norms, DualityMapIdentities) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (double p : {1.3, 2.0, 2.7, 4.0}) {
    auto sp = DiscreteSpace::uniform(11, p, 2.0);
    Field u(sp);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.values[i] = dist(rng);
    const DualField F = duality_map(u, p);
    const double up = std::pow(norm_p(u), p);
    EXPECT_NEAR(pairing(F, u) / up, 1.0, 1e-12);
    EXPECT_NEAR(std::pow(dual_norm(F), sp->conjugate_p()) / up, 1.0, 1e-12);
  }
  auto sp = DiscreteSpace::uniform(3, 2.0, 2.0);
  EXPECT_THROW(duality_map(Field(sp), 0.5), Error);
}

TEST(Norms, SobolevNormOfLinearFunction) {
  // u = x: |u|_m^m = 1/(m+1) (trapezoid error O(h^2)), |u'|_m^m = 1
  auto sp = DiscreteSpace::uniform(201, 2.0, 2.0);
  const Field u = sample_field(sp, [](double x, std::size_t) { return x; });
  EXPECT_NEAR(norm_sobolev_m(u), std::sqrt(1.0 / 3.0 + 1.0), 1e-5);
  auto tiny = DiscreteSpace::from_weights({1.0}, 2.0);
  try {
    norm_sobolev_m(Field(tiny));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooSmall);
  }
}
