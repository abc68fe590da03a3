#include <wedflow/config.hpp>

#include <gtest/gtest.h>

using namespace wedflow;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(parse_config(emit_config(c)), c);
  EXPECT_EQ(parse_config("{}"), c);
}

TEST(Config, ModifiedRoundTrip) {
  RunConfig c;
  c.problem = "parabolic-system";
  c.components = 2;
  c.coupling = "rotation";
  c.bc = "neumann";
  c.sweep_kind = "lambda";
  c.sweep_lambdas = {0.1, 0.01};
  c.epsilon = 0.123456789012345;
  c.seed = 42;
  c.record_timing = true;
  const RunConfig back = parse_config(emit_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(emit_config(back), emit_config(c));
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(error_of(R"({"epsilon": -1})").find("epsilon"), std::string::npos);
  EXPECT_NE(error_of(R"({"epsilon": "big"})").find("epsilon: wrong type"), std::string::npos);
  EXPECT_NE(error_of(R"({"epsilonn": 0.1})").find("epsilonn: unknown key"), std::string::npos);
  EXPECT_NE(error_of(R"({"problem": "heat"})").find("problem"), std::string::npos);
  EXPECT_NE(error_of(R"({"sweep_epsilons": [0.1, 0.2]})").find("sweep_epsilons"), std::string::npos);
  EXPECT_NE(error_of(R"({"sweep_kind": "lambda"})").find("sweep_lambdas"), std::string::npos);
  EXPECT_NE(error_of(R"({"coupling": "rotation"})").find("coupling"), std::string::npos);
  EXPECT_NE(error_of(R"({"theta": 0})").find("theta"), std::string::npos);
  EXPECT_NE(error_of(R"({"epsilon0_bracket": [1, 0.5]})").find("epsilon0_bracket"), std::string::npos);
  EXPECT_NE(error_of("[1,2]").find("<root>"), std::string::npos);
  EXPECT_NE(error_of("{").find("<syntax>"), std::string::npos);
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/wedflow.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
  }
}

TEST(Config, BuildsEveryProblem) {
  RunConfig c;
  c.steps = 20;
  const WedProblem scalar = build_problem(c);
  EXPECT_EQ(scalar.space()->size(), 1u);
  EXPECT_FALSE(scalar.has_phi2());

  c.problem = "custom-quadratic";
  c.phi1_c = 2.0;
  c.phi2_c = 0.5;
  c.exponent_p = 3.0;
  const WedProblem custom = build_problem(c);
  EXPECT_TRUE(custom.has_phi2());
  ASSERT_TRUE(custom.yosida.has_value());
  EXPECT_EQ(custom.yosida->exponent_p, 3.0);
  EXPECT_DOUBLE_EQ(custom.energy.kappa, 0.25);

  c = RunConfig{};
  c.problem = "parabolic-system";
  c.nodes = 9;
  c.components = 2;
  c.coupling = "rotation";
  c.bc = "neumann";
  const WedProblem system = build_problem(c);
  EXPECT_EQ(system.space()->size(), 18u);
  EXPECT_TRUE(system.pinned.empty());
  EXPECT_FALSE(system.perturbation.is_zero());
  c.wiring = "nonconvex-split";
  EXPECT_TRUE(build_problem(c).has_phi2());

  c = RunConfig{};
  c.problem = "biharmonic";
  c.nodes = 17;
  c.initial = "sine-squared";
  const WedProblem bih = build_problem(c);
  EXPECT_EQ(bih.perturbation.growth(), GrowthClass::XGrowth);
  c.exponent_p = 3.0;
  EXPECT_THROW(build_problem(c), Error);
}

TEST(Config, DerivedSettings) {
  RunConfig c;
  c.variant = "S_tilde";
  c.theta = 0.7;
  c.tol = 1e-9;
  const SweepOptions o = sweep_options(c);
  EXPECT_EQ(o.fixed_point.variant, FixedPointVariant::STilde);
  EXPECT_EQ(o.fixed_point.damping_theta, 0.7);
  EXPECT_EQ(o.inner.tol, 1e-9);
  EXPECT_FALSE(o.record_timing);
  EXPECT_EQ(sweep_plan(c).epsilons, c.sweep_epsilons);
}
