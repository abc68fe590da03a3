#include <wedflow/acceptance.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wedflow;
using acceptance::bvp_solution;
using acceptance::sampled_trajectory;
using acceptance::scalar_problem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::PreconditionViolated;
}

}  // namespace

TEST(FixedPoint, LinearFeedbackMatchesShiftedBvp) {
  // f(u) = u/2 turns u' = -u + f(u) into the k = 1/2 boundary value problem
  const WedProblem pb = scalar_problem(1e-2, 400, 1.0, 0.5);
  FixedPointConfig cfg;
  const FixedPointReport rep = solve_regularized(pb, cfg);
  const Trajectory exact =
      sampled_trajectory(pb, [](double t, double) { return bvp_solution(1e-2, 0.5, 1.0, 1.0, t); });
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(sup_distance(rep.solution, exact), 5e-4);
  EXPECT_LE(rep.outer_iterations(), 50);
  EXPECT_LE(rep.coupled_residual, 10.0 * cfg.outer_tol);
  EXPECT_EQ(rep.bound_history.size(), static_cast<std::size_t>(rep.outer_iterations()));
}

TEST(FixedPoint, VariantsAgree) {
  const WedProblem pb = scalar_problem(5e-2, 200, 1.0, 0.5);
  FixedPointConfig s, st;
  s.outer_tol = st.outer_tol = 1e-9;
  st.variant = FixedPointVariant::STilde;
  const Trajectory a = solve_regularized(pb, s).solution;
  const Trajectory b = solve_regularized(pb, st).solution;
  EXPECT_LE(max_abs_distance(a, b), 1e-7);
}

TEST(FixedPoint, NoFeedbackIsOneSolve) {
  const WedProblem pb = scalar_problem(5e-2, 50, 1.0, 0.0);
  const FixedPointReport rep = solve_regularized(pb, FixedPointConfig{});
  EXPECT_EQ(rep.outer_iterations(), 1);
  EXPECT_EQ(rep.iterate_distances.front(), 0.0);
}

TEST(FixedPoint, XGrowthNeedsSTilde) {
  WedProblem pb = acceptance::biharmonic_problem();
  pb.time = TimeGrid(0.02, 20, 0.1);
  ASSERT_EQ(pb.perturbation.growth(), GrowthClass::XGrowth);
  EXPECT_EQ(kind_of([&] { solve_regularized(pb, FixedPointConfig{}); }), ErrorKind::PreconditionViolated);
  FixedPointConfig cfg;
  cfg.variant = FixedPointVariant::STilde;
  EXPECT_TRUE(solve_regularized(pb, cfg).converged);
}

TEST(FixedPoint, GuardsAndCaps) {
  const WedProblem pb = scalar_problem(5e-2, 50, 1.0, 0.5);
  FixedPointConfig tiny;
  tiny.bound_guard = 1e-3;
  EXPECT_EQ(kind_of([&] { solve_regularized(pb, tiny); }), ErrorKind::DivergenceDetected);
  FixedPointConfig capped;
  capped.outer_max_iter = 1;
  EXPECT_EQ(kind_of([&] { solve_regularized(pb, capped); }), ErrorKind::MaxOuterIterExceeded);
  FixedPointConfig bad;
  bad.damping_theta = 0.0;
  EXPECT_EQ(kind_of([&] { solve_regularized(pb, bad); }), ErrorKind::PreconditionViolated);
}

TEST(FixedPoint, AmplifyingFeedbackAtLargeEpsilonFails) {
  // f(u) = 5u: the coupled problem loses coercivity for large eps
  const WedProblem pb = scalar_problem(1.0, 100, 1.0, 5.0);
  const ErrorKind k = kind_of([&] { solve_regularized(pb, FixedPointConfig{}); });
  EXPECT_TRUE(k == ErrorKind::DivergenceDetected || k == ErrorKind::MaxOuterIterExceeded) << to_string(k);
}

TEST(FixedPoint, ContinuityProbe) {
  const WedProblem pb = scalar_problem(5e-2, 100, 1.0, 0.0);
  std::mt19937_64 rng(3);
  const auto w = zero_forcing(pb);
  EXPECT_EQ(solution_map_continuity_probe(pb, w, 0.0, rng), 0.0);
  const double small = solution_map_continuity_probe(pb, w, 1e-4, rng);
  EXPECT_GT(small, 0.0);
  EXPECT_TRUE(std::isfinite(small));
  // linear problem: the ratio does not depend on the size of the perturbation
  std::mt19937_64 rng2(3);
  solution_map_continuity_probe(pb, w, 0.0, rng2);
  const double large = solution_map_continuity_probe(pb, w, 1e-1, rng2);
  EXPECT_NEAR(large / small, 1.0, 1e-4);
}

TEST(Gronwall, ExponentialSolutionSatisfiesBound) {
  const double tau = 1e-3, B = 2.0;
  std::vector<double> alpha, u;
  for (int i = 0; i <= 1000; ++i) {
    alpha.push_back(1.0);
    u.push_back(std::exp(B * tau * i));
  }
  const GronwallCheck ok = gronwall_bound(alpha, B, u, tau);
  EXPECT_TRUE(ok.hypothesis);
  EXPECT_TRUE(ok.conclusion);
  EXPECT_TRUE(static_cast<bool>(ok));

  std::vector<double> big = u;
  for (auto& v : big) v *= 3.0;
  EXPECT_FALSE(gronwall_bound(alpha, B, big, tau).hypothesis);
  EXPECT_THROW(gronwall_bound({}, B, {}, tau), Error);
}
