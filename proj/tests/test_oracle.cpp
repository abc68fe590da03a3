#include <wedflow/acceptance.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace wedflow;
using acceptance::scalar_problem;

TEST(Oracle, ScalarDecay) {
  const WedProblem pb = scalar_problem(0.1, 20, 1.0, 0.0);
  const Trajectory u = run(pb);
  const double tau = pb.time.tau();
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(u[n].values[0], std::pow(1.0 + tau, -n), 1e-12) << n;
}

TEST(Oracle, LinearFeedbackIsLagged) {
  const WedProblem pb = scalar_problem(0.1, 20, 1.0, 0.5);
  const Trajectory u = run(pb);
  const double tau = pb.time.tau();
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(u[n].values[0], std::pow((1.0 + 0.5 * tau) / (1.0 + tau), n), 1e-12);
}

TEST(Oracle, ForceTreatments) {
  WedProblem pb = scalar_problem(0.1, 10, 1.0, 0.0);
  pb.perturbation = with_forcing(Perturbation::none(), [](const SpacePtr& s, double t) {
    DualField g(s);
    g.values.setConstant(t);
    return g;
  });
  const double tau = pb.time.tau();
  for (auto treatment : {StepperConfig::ForceTreatment::ExplicitLag, StepperConfig::ForceTreatment::FrozenPrevious}) {
    StepperConfig cfg;
    cfg.treatment_f = treatment;
    const Trajectory u = run(pb, cfg);
    double expect = 1.0;
    for (int n = 1; n <= 10; ++n) {
      const double t = treatment == StepperConfig::ForceTreatment::ExplicitLag ? n * tau : (n - 1) * tau;
      expect = (expect + tau * t) / (1.0 + tau);
      EXPECT_NEAR(u[n].values[0], expect, 1e-12);
    }
  }
}

TEST(Oracle, StepCountOverride) {
  const WedProblem pb = scalar_problem(0.1, 20, 1.0, 0.0);
  StepperConfig cfg;
  cfg.steps_N = 40;
  const Trajectory u = run(pb, cfg);
  EXPECT_EQ(u.steps(), 40);
  EXPECT_NEAR(u[40].values[0], std::pow(1.0 + 1.0 / 40.0, -40), 1e-12);
}

// Implicit Euler on the Dirichlet heat equation keeps the first discrete
// eigenmode: u^n = (1 + tau lambda_h)^{-n} sin(pi x).
TEST(Oracle, HeatEigenmode) {
  const WedProblem pb = acceptance::heat_problem();
  const Trajectory u = run(pb);
  const double h = 1.0 / 64.0, tau = pb.time.tau();
  const double lam = 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2.0), 2);
  double worst = 0.0;
  for (int n = 0; n <= u.steps(); ++n) {
    const double amp = std::pow(1.0 + tau * lam, -n);
    worst = std::max(worst, (u[n].values - amp * pb.u0.values).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Oracle, RejectsNonPositiveTolerance) {
  const WedProblem pb = scalar_problem(0.1, 20, 1.0, 0.0);
  StepperConfig cfg;
  cfg.newton_tol = 0.0;
  EXPECT_THROW(run(pb, cfg), Error);
}
