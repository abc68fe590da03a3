#include <wedflow/acceptance.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wedflow;
using acceptance::bvp_solution;
using acceptance::sampled_trajectory;
using acceptance::scalar_problem;

namespace {

ScalarKernel quartic_kernel() {
  return {[](double s) { return 0.25 * s * s * s * s; }, [](double s) { return s * s * s; },
          [](double s) { return 3.0 * s * s; }};
}

std::vector<DualField> constant_forcing(const WedProblem& pb, double c) {
  std::vector<DualField> w = zero_forcing(pb);
  for (auto& f : w) f.values.setConstant(c);
  return w;
}

}  // namespace

TEST(TimeGrid, WeightsSumToExponentialMass) {
  const TimeGrid g(1.0, 10, 0.1);
  double mu = 0.0, om = 0.0;
  for (int n = 0; n <= g.steps(); ++n) mu += g.node_weight(n);
  for (int n = 1; n <= g.steps(); ++n) om += g.interval_weight(n);
  const double mass = 0.1 * -std::expm1(-10.0);
  EXPECT_NEAR(mu, mass, 1e-15);
  EXPECT_NEAR(mu, 0.099995460007023751, 1e-15);
  EXPECT_NEAR(om, mass, 1e-15);
  // tiny tau/eps takes the series branch of the half hat weight
  const TimeGrid fine(1.0, 100000, 10.0);
  double fine_mu = 0.0;
  for (int n = 0; n <= fine.steps(); ++n) fine_mu += fine.node_weight(n);
  EXPECT_NEAR(fine_mu, 10.0 * -std::expm1(-0.1), 1e-12);
}

TEST(TimeGrid, RejectsBadParameters) {
  EXPECT_THROW(TimeGrid(0.0, 10, 0.1), Error);
  EXPECT_THROW(TimeGrid(1.0, 1, 0.1), Error);
  EXPECT_THROW(TimeGrid(1.0, 10, 0.0), Error);
}

// Reference from a dense linear solve of the quadratic discrete functional
// with quadrature-computed weights.
TEST(Wed, ScalarQuadraticFrozen) {
  const WedProblem pb = scalar_problem(0.1, 10, 1.0, 0.0);
  WedOptions o;
  o.tol = 1e-13;
  const WedReport rep = minimize_wed(pb, zero_forcing(pb), o);
  EXPECT_NEAR(rep.minimizer[5].values[0], 0.63482004977726103, 1e-11);
  EXPECT_NEAR(rep.minimizer[10].values[0], 0.43329526747770969, 1e-11);
  EXPECT_LE(rep.el_residual, 1e-13);

  const WedReport forced = minimize_wed(pb, constant_forcing(pb, 0.3), o);
  EXPECT_NEAR(forced.minimizer[5].values[0], 0.74437403484408249, 1e-11);
  EXPECT_NEAR(forced.minimizer[10].values[0], 0.6033066872343964, 1e-11);
}

TEST(Wed, MinimizerBeatsPerturbations) {
  const WedProblem pb = scalar_problem(0.1, 10, 1.0, 0.0);
  const auto w = constant_forcing(pb, 0.3);
  const WedReport rep = minimize_wed(pb, w);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0.0, 0.05);
  for (int k = 0; k < 20; ++k) {
    Trajectory t = rep.minimizer;
    for (int n = 1; n <= t.steps(); ++n) t[n].values[0] += nd(rng);
    EXPECT_GE(wed_value(pb, t, w), rep.functional_value);
  }
}

TEST(Wed, GradientMatchesFiniteDifferences) {
  auto sp = DiscreteSpace::from_weights({0.3, 0.5, 0.2}, 3.0);
  WedProblem pb;
  pb.time = TimeGrid(0.5, 6, 0.2);
  pb.psi = make_p_power_dissipation(sp, 3.0);
  pb.energy.phi1 = PotentialHandle::separable(sp, {quartic_kernel()}, "quartic");
  pb.energy.phi2 = PotentialHandle::zero(sp);
  pb.u0 = make_field(sp, {0.4, -0.7, 1.1});
  std::mt19937_64 rng(8);
  std::vector<Field> states{pb.u0};
  for (int n = 1; n <= 6; ++n) states.push_back(random_field(sp, rng, 1.0));
  const Trajectory traj(pb.time, states);
  const auto w = constant_forcing(pb, 0.2);
  const auto g = wed_gradient(pb, traj, w);
  const double h = 1e-6;
  for (int n = 1; n <= 6; ++n)
    for (Eigen::Index i = 0; i < 3; ++i) {
      Trajectory a = traj, b = traj;
      a[n].values[i] += h;
      b[n].values[i] -= h;
      const double fd = (wed_value(pb, a, w) - wed_value(pb, b, w)) / (2.0 * h);
      const double an = sp->weight(static_cast<std::size_t>(i)) * g[static_cast<std::size_t>(n - 1)].values[i];
      EXPECT_NEAR(fd, an, 1e-7 * std::max(1.0, std::abs(an))) << n << "," << i;
    }
}

TEST(Wed, BoundaryValueProblemConvergesAtSecondOrder) {
  auto error_at = [](int N) {
    const WedProblem pb = scalar_problem(1e-2, N, 1.0, 0.0);
    const WedReport rep = minimize_wed(pb, zero_forcing(pb));
    const Trajectory exact =
        sampled_trajectory(pb, [](double t, double) { return bvp_solution(1e-2, 1.0, 1.0, 1.0, t); });
    return sup_distance(rep.minimizer, exact);
  };
  const double e200 = error_at(200), e400 = error_at(400);
  EXPECT_LE(e400, 5e-4);
  EXPECT_GT(e200 / e400, 3.0);
}

TEST(Wed, ClosedFormBvpValues) {
  EXPECT_NEAR(bvp_solution(0.01, 1.0, 1.0, 1.0, 0.5), 0.60951143560533007, 1e-13);
  EXPECT_NEAR(bvp_solution(0.01, 1.0, 1.0, 1.0, 1.0), 0.37514673822016586, 1e-13);
  EXPECT_NEAR(bvp_solution(0.01, 0.5, 1.0, 1.0, 1.0), 0.61104401214284251, 1e-13);
}

TEST(Wed, PinnedNodesStayPut) {
  const WedProblem pb = acceptance::heat_problem().with_epsilon(0.05);
  ASSERT_FALSE(pb.pinned.empty());
  WedProblem small = pb;
  small.time = TimeGrid(0.1, 20, 0.05);
  const WedReport rep = minimize_wed(small, zero_forcing(small));
  const Eigen::Index last = small.u0.size() - 1;
  for (int n = 0; n <= rep.minimizer.steps(); ++n) {
    EXPECT_EQ(rep.minimizer[n].values[0], small.u0.values[0]);
    EXPECT_EQ(rep.minimizer[n].values[last], small.u0.values[last]);
  }
}

TEST(Wed, IterationCapRaises) {
  auto sp = DiscreteSpace::from_weights({1.0}, 2.0);
  WedProblem pb;
  pb.time = TimeGrid(1.0, 20, 0.1);
  pb.psi = make_p_power_dissipation(sp, 2.0);
  pb.energy.phi1 = PotentialHandle::separable(sp, {quartic_kernel()}, "quartic");
  pb.energy.phi2 = PotentialHandle::zero(sp);
  pb.u0 = make_field(sp, {2.0});
  WedOptions o;
  o.max_iter = 1;
  try {
    minimize_wed(pb, zero_forcing(pb), o);
    FAIL() << "expected MaxIterExceeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MaxIterExceeded);
  }
}

TEST(Wed, EnergyInequalityHolds) {
  for (double eps : {0.2, 0.05, 0.01}) {
    const WedProblem pb = scalar_problem(eps, 200, 1.0, 0.3);
    const FixedPointReport rep = solve_regularized(pb, FixedPointConfig{});
    const EnergyBalance eb = energy_balance(pb, rep.solution);
    EXPECT_TRUE(eb.holds(pb.time.tau())) << eps << " slack " << eb.slack;
  }
}

TEST(Wed, FinalFluxVanishesWithEpsilon) {
  const WedProblem pb = scalar_problem(1e-2, 400, 1.0, 0.0);
  const WedReport rep = minimize_wed(pb, zero_forcing(pb));
  EXPECT_LE(rep.final_xi_norm, 1e-3);
}
