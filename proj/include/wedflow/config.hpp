#pragma once

// Run configuration: a flat JSON object. Every key is optional; unknown keys
// and ill-typed values are rejected with the key named in the message.

#include <wedflow/errors.hpp>
#include <wedflow/fixed_point.hpp>
#include <wedflow/pde.hpp>
#include <wedflow/sweeps.hpp>
#include <wedflow/wed.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wedflow {

struct RunConfig {
  // problem
  std::string problem = "scalar-demo";  // scalar-demo | parabolic-system | biharmonic | custom-quadratic
  double horizon = 1.0;
  int steps = 400;
  double epsilon = 1e-2;
  double initial_value = 1.0;  // scalar u0, or amplitude of the initial profile
  double perturbation_c = 0.0; // f(u) = c u for the scalar problems
  double phi1_c = 1.0;         // custom-quadratic: phi1 = phi1_c |u|^2 / 2
  double phi2_c = 0.0;         // custom-quadratic: phi2 = phi2_c |u|^2 / 2
  // grid problems
  int nodes = 65;
  int components = 1;
  double exponent_p = 2.0;
  double exponent_m = 2.0;
  double coeff_a = 1.0;
  std::string bc = "dirichlet";               // dirichlet | neumann
  std::string wiring = "nonpotential-shift";  // nonpotential-shift | nonconvex-split
  std::string initial = "sine";               // sine | cosine | sine-squared | constant
  std::string coupling = "none";              // none | rotation
  double beta = 0.5;
  // regularization and solvers
  double lambda = 1e-2;
  double tol = 1e-8;
  int max_iter = 5000;
  std::string variant = "S";  // S | S_tilde
  double theta = 0.5;
  double outer_tol = 1e-6;
  int outer_max_iter = 200;
  double bound_guard = 1e6;
  double oracle_newton_tol = 1e-10;
  // sweeps
  std::string sweep_kind = "causal";  // causal | lambda | lambda-opposite
  std::vector<double> sweep_epsilons{0.2, 0.1, 0.05, 0.025};
  std::vector<double> sweep_lambdas;
  bool epsilon0_bisection = false;
  std::vector<double> epsilon0_bracket{1e-3, 1.0};
  // acceptance
  int accept_bvp_steps = 400;
  // output
  std::string output_dir = "wedflow_out";
  std::uint64_t seed = 1;
  bool record_timing = false;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::ConfigInvalid, std::string(key) + ": wrong type");
  }
}

inline void require(bool ok, const char* key, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::ConfigInvalid, std::string(key) + ": " + msg);
}

inline void require_one_of(const std::string& v, const char* key, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  std::string msg = "must be one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw Error(ErrorKind::ConfigInvalid, std::string(key) + ": " + msg);
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  using detail::require;
  detail::require_one_of(c.problem, "problem", {"scalar-demo", "parabolic-system", "biharmonic", "custom-quadratic"});
  require(c.horizon > 0.0 && std::isfinite(c.horizon), "horizon", "must be positive");
  require(c.steps >= 2, "steps", "must be at least 2");
  require(c.epsilon > 0.0 && std::isfinite(c.epsilon), "epsilon", "must be positive");
  require(c.nodes >= 3, "nodes", "must be at least 3");
  require(c.components >= 1, "components", "must be at least 1");
  require(c.exponent_p > 1.0, "exponent_p", "must exceed 1");
  require(c.exponent_m > 1.0, "exponent_m", "must exceed 1");
  require(c.coeff_a > 0.0, "coeff_a", "must be positive");
  detail::require_one_of(c.bc, "bc", {"dirichlet", "neumann"});
  detail::require_one_of(c.wiring, "wiring", {"nonpotential-shift", "nonconvex-split"});
  detail::require_one_of(c.initial, "initial", {"sine", "cosine", "sine-squared", "constant"});
  detail::require_one_of(c.coupling, "coupling", {"none", "rotation"});
  require(c.coupling == "none" || c.components == 2, "coupling", "rotation needs components = 2");
  require(c.phi1_c > 0.0, "phi1_c", "must be positive");
  require(c.phi2_c >= 0.0 && c.phi2_c < c.phi1_c, "phi2_c", "must lie in [0, phi1_c)");
  require(c.lambda > 0.0, "lambda", "must be positive");
  require(c.tol > 0.0, "tol", "must be positive");
  require(c.max_iter >= 1, "max_iter", "must be positive");
  detail::require_one_of(c.variant, "variant", {"S", "S_tilde"});
  require(c.theta > 0.0 && c.theta <= 1.0, "theta", "must lie in (0,1]");
  require(c.outer_tol > 0.0, "outer_tol", "must be positive");
  require(c.outer_max_iter >= 1, "outer_max_iter", "must be positive");
  require(c.bound_guard > 0.0, "bound_guard", "must be positive");
  require(c.oracle_newton_tol > 0.0, "oracle_newton_tol", "must be positive");
  detail::require_one_of(c.sweep_kind, "sweep_kind", {"causal", "lambda", "lambda-opposite"});
  require(!c.sweep_epsilons.empty(), "sweep_epsilons", "must not be empty");
  for (std::size_t i = 0; i < c.sweep_epsilons.size(); ++i)
    require(c.sweep_epsilons[i] > 0.0 && (i == 0 || c.sweep_epsilons[i] < c.sweep_epsilons[i - 1]), "sweep_epsilons",
            "must be positive and strictly decreasing");
  for (std::size_t i = 0; i < c.sweep_lambdas.size(); ++i)
    require(c.sweep_lambdas[i] > 0.0 && (i == 0 || c.sweep_lambdas[i] < c.sweep_lambdas[i - 1]), "sweep_lambdas",
            "must be positive and strictly decreasing");
  require(c.sweep_kind == "causal" || !c.sweep_lambdas.empty(), "sweep_lambdas", "required for lambda sweeps");
  require(c.epsilon0_bracket.size() == 2 && c.epsilon0_bracket[0] > 0.0 &&
              c.epsilon0_bracket[1] > c.epsilon0_bracket[0],
          "epsilon0_bracket", "must be [lo, hi] with 0 < lo < hi");
  require(c.accept_bvp_steps >= 2, "accept_bvp_steps", "must be at least 2");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
#define WEDFLOW_EMIT(k) j[#k] = c.k
  WEDFLOW_EMIT(problem); WEDFLOW_EMIT(horizon); WEDFLOW_EMIT(steps); WEDFLOW_EMIT(epsilon);
  WEDFLOW_EMIT(initial_value); WEDFLOW_EMIT(perturbation_c); WEDFLOW_EMIT(phi1_c); WEDFLOW_EMIT(phi2_c);
  WEDFLOW_EMIT(nodes); WEDFLOW_EMIT(components); WEDFLOW_EMIT(exponent_p); WEDFLOW_EMIT(exponent_m);
  WEDFLOW_EMIT(coeff_a); WEDFLOW_EMIT(bc); WEDFLOW_EMIT(wiring); WEDFLOW_EMIT(initial); WEDFLOW_EMIT(coupling);
  WEDFLOW_EMIT(beta); WEDFLOW_EMIT(lambda); WEDFLOW_EMIT(tol); WEDFLOW_EMIT(max_iter); WEDFLOW_EMIT(variant);
  WEDFLOW_EMIT(theta); WEDFLOW_EMIT(outer_tol); WEDFLOW_EMIT(outer_max_iter); WEDFLOW_EMIT(bound_guard);
  WEDFLOW_EMIT(oracle_newton_tol); WEDFLOW_EMIT(sweep_kind); WEDFLOW_EMIT(sweep_epsilons);
  WEDFLOW_EMIT(sweep_lambdas); WEDFLOW_EMIT(epsilon0_bisection); WEDFLOW_EMIT(epsilon0_bracket);
  WEDFLOW_EMIT(accept_bvp_steps); WEDFLOW_EMIT(output_dir); WEDFLOW_EMIT(seed); WEDFLOW_EMIT(record_timing);
#undef WEDFLOW_EMIT
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "<root>: expected a JSON object");
  RunConfig c;
  const nlohmann::json known = to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw Error(ErrorKind::ConfigInvalid, it.key() + ": unknown key");
#define WEDFLOW_READ(k) detail::read_key(j, #k, c.k)
  WEDFLOW_READ(problem); WEDFLOW_READ(horizon); WEDFLOW_READ(steps); WEDFLOW_READ(epsilon);
  WEDFLOW_READ(initial_value); WEDFLOW_READ(perturbation_c); WEDFLOW_READ(phi1_c); WEDFLOW_READ(phi2_c);
  WEDFLOW_READ(nodes); WEDFLOW_READ(components); WEDFLOW_READ(exponent_p); WEDFLOW_READ(exponent_m);
  WEDFLOW_READ(coeff_a); WEDFLOW_READ(bc); WEDFLOW_READ(wiring); WEDFLOW_READ(initial); WEDFLOW_READ(coupling);
  WEDFLOW_READ(beta); WEDFLOW_READ(lambda); WEDFLOW_READ(tol); WEDFLOW_READ(max_iter); WEDFLOW_READ(variant);
  WEDFLOW_READ(theta); WEDFLOW_READ(outer_tol); WEDFLOW_READ(outer_max_iter); WEDFLOW_READ(bound_guard);
  WEDFLOW_READ(oracle_newton_tol); WEDFLOW_READ(sweep_kind); WEDFLOW_READ(sweep_epsilons);
  WEDFLOW_READ(sweep_lambdas); WEDFLOW_READ(epsilon0_bisection); WEDFLOW_READ(epsilon0_bracket);
  WEDFLOW_READ(accept_bvp_steps); WEDFLOW_READ(output_dir); WEDFLOW_READ(seed); WEDFLOW_READ(record_timing);
#undef WEDFLOW_READ
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("<syntax>: ") + e.what());
  }
  return config_from_json(j);
}

inline std::string emit_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ConfigInvalid, "<file>: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Problem construction

namespace detail {

inline double initial_profile(const std::string& shape, double x) {
  if (shape == "sine") return std::sin(M_PI * x);
  if (shape == "cosine") return std::cos(M_PI * x);
  if (shape == "sine-squared") return std::sin(M_PI * x) * std::sin(M_PI * x);
  return 1.0;
}

}  // namespace detail

inline WedProblem build_problem(const RunConfig& c) {
  validate(c);
  const TimeGrid grid(c.horizon, c.steps, c.epsilon);
  if (c.problem == "scalar-demo" || c.problem == "custom-quadratic") {
    const bool custom = c.problem == "custom-quadratic";
    auto sp = DiscreteSpace::from_weights({1.0}, custom ? c.exponent_p : 2.0);
    WedProblem pb;
    pb.time = grid;
    pb.psi = make_p_power_dissipation(sp, sp->exponent_p());
    pb.energy.phi1 = make_quadratic_potential(sp, custom ? c.phi1_c : 1.0);
    pb.energy.phi2 = custom && c.phi2_c > 0.0 ? make_quadratic_potential(sp, c.phi2_c) : PotentialHandle::zero(sp);
    pb.energy.kappa = custom ? c.phi2_c / c.phi1_c : 0.0;
    pb.perturbation = make_linear_perturbation(c.perturbation_c);
    pb.u0 = make_field(sp, {c.initial_value});
    if (pb.has_phi2()) pb.yosida = YosidaConfig{c.lambda, sp->exponent_p()};
    pb.validate();
    return pb;
  }
  const auto k = static_cast<std::size_t>(c.components);
  auto sp = DiscreteSpace::uniform(static_cast<std::size_t>(c.nodes), c.exponent_p, c.exponent_m,
                                   c.problem == "biharmonic" ? 1 : k);
  const double amp = c.initial_value;
  const std::string shape = c.initial;
  Field u0 = sample_field(sp, [&](double x, std::size_t) { return amp * detail::initial_profile(shape, x); });
  if (c.problem == "biharmonic") {
    if (c.exponent_p != 2.0) throw Error(ErrorKind::ConfigInvalid, "exponent_p: the biharmonic flow needs 2");
    return assemble_problem(BiharmonicSpec{{c.beta}, u0}, grid);
  }
  CouplingFn g;
  if (c.coupling == "rotation")
    g = [](const std::vector<double>& u, std::vector<double>& out) {
      out[0] = u[1];
      out[1] = -u[0];
    };
  ParabolicSystemSpec spec = uniform_system_spec(sp, c.exponent_p, c.coeff_a,
                                                 c.bc == "neumann" ? BoundaryCondition::Neumann
                                                                   : BoundaryCondition::Dirichlet,
                                                 u0, g);
  return assemble_problem(spec, grid, c.wiring == "nonconvex-split" ? Wiring::NonconvexSplit : Wiring::NonpotentialShift,
                          YosidaConfig{c.lambda, c.exponent_p});
}

inline FixedPointConfig fixed_point_config(const RunConfig& c) {
  FixedPointConfig f;
  f.variant = c.variant == "S_tilde" ? FixedPointVariant::STilde : FixedPointVariant::S;
  f.damping_theta = c.theta;
  f.outer_tol = c.outer_tol;
  f.outer_max_iter = c.outer_max_iter;
  f.bound_guard = c.bound_guard;
  return f;
}

inline SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions o;
  o.fixed_point = fixed_point_config(c);
  o.inner.tol = c.tol;
  o.inner.max_iter = c.max_iter;
  o.stepper.newton_tol = c.oracle_newton_tol;
  o.record_timing = c.record_timing;
  return o;
}

inline SweepPlan sweep_plan(const RunConfig& c) {
  return SweepPlan{c.sweep_epsilons, c.sweep_lambdas, c.epsilon0_bisection};
}

}  // namespace wedflow
