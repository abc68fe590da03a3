#pragma once

// Parameter sweeps: eps -> 0 (causal limit), lambda -> 0 (Yosida limit),
// and bisection for the largest stable eps. Rows are independent and may run
// on several threads; results are stored by row index, so tables do not
// depend on scheduling.

#include <wedflow/errors.hpp>
#include <wedflow/fixed_point.hpp>
#include <wedflow/oracle.hpp>
#include <wedflow/wed.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace wedflow {

struct SweepPlan {
  std::vector<double> epsilons;
  std::vector<double> lambdas;  // empty: no lambda column
  bool epsilon0_bisection = false;

  void validate() const {
    auto check = [](const std::vector<double>& v, const char* key) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw Error(ErrorKind::ConfigInvalid, std::string(key) + ": values must be positive");
        if (i > 0 && !(v[i] < v[i - 1]))
          throw Error(ErrorKind::ConfigInvalid, std::string(key) + ": values must be strictly decreasing");
      }
    };
    if (epsilons.empty()) throw Error(ErrorKind::ConfigInvalid, "epsilons: at least one value required");
    check(epsilons, "epsilons");
    check(lambdas, "lambdas");
  }
};

struct SweepRow {
  double epsilon = 0.0;
  std::optional<double> lambda;
  double sup_error = 0.0;
  double residual = 0.0;
  double energy_slack = 0.0;
  bool energy_holds = true;  // slack >= -10 tau * scale
  int outer_iters = 0;
  double wall_ms = 0.0;
  bool diverged = false;
  std::string failure;         // error kind when diverged
  std::optional<double> increment;  // distance to the previous row of the same nested sweep
  std::optional<Trajectory> solution;
};

struct SweepTable {
  bool has_lambda = false;
  bool has_increment = false;
  std::vector<SweepRow> rows;

  std::vector<double> column(double SweepRow::*field) const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.*field);
    return out;
  }
};

/// True when each value is at most (1 + slack) times its predecessor.
inline bool monotone_decreasing(const std::vector<double>& v, double slack = 0.05) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] <= (1.0 + slack) * v[i - 1])) return false;
  return true;
}

using ReferenceFn = std::function<Trajectory(const WedProblem&)>;

struct SweepOptions {
  FixedPointConfig fixed_point;
  WedOptions inner;
  StepperConfig stepper;
  /// Overrides the implicit-Euler reference (e.g. with a closed-form solution).
  ReferenceFn reference;
  bool record_timing = false;
  bool keep_solutions = false;
  int threads = 0;  // 0: WEDFLOW_THREADS, else hardware concurrency
};

namespace detail {

inline int sweep_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("WEDFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline bool is_solver_failure(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivergenceDetected:
    case ErrorKind::MaxOuterIterExceeded:
    case ErrorKind::MaxIterExceeded:
    case ErrorKind::LineSearchFailed:
    case ErrorKind::NewtonFailed:
    case ErrorKind::InnerSolveFailed:
      return true;
    default:
      return false;
  }
}

/// Problem with phi2 left unregularized: the target of the lambda limit.
inline WedProblem unregularized(const WedProblem& pb) {
  WedProblem p = pb;
  p.yosida.reset();
  return p;
}

inline Trajectory reference_for(const WedProblem& pb, const SweepOptions& opts) {
  if (opts.reference) return opts.reference(pb);
  StepperConfig cfg = opts.stepper;
  cfg.steps_N = pb.time.steps();
  return run(unregularized(pb), cfg);
}

}  // namespace detail

/// max_n |xi^n + eta1^n - eta2^n - f(u^n)|_{p'} with xi^n = d psi(v^n) and raw phi2:
/// the residual of the causal implicit scheme evaluated on u.
inline double unregularized_residual(const WedProblem& pb, const Trajectory& u) {
  const WedProblem raw = detail::unregularized(pb);
  double worst = 0.0;
  for (int n = 1; n <= u.steps(); ++n) {
    DualField r = raw.psi.gradient(u.velocity(n));
    r.values += raw.energy.phi1.gradient(u[n]).values - detail::phi2_gradient(raw, u[n]).values;
    if (!raw.perturbation.is_zero()) r.values -= raw.perturbation.apply(u[n], u.grid.time(n)).values;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (raw.is_pinned(i)) r.values[i] = 0.0;
    worst = std::max(worst, dual_norm(r));
  }
  return worst;
}

/// Solves one (eps, lambda) point and fills the metrics of a row.
inline SweepRow solve_row(const WedProblem& pb, const Trajectory* reference, const SweepOptions& opts) {
  SweepRow row;
  row.epsilon = pb.time.epsilon();
  if (pb.has_phi2() && pb.yosida) row.lambda = pb.yosida->lambda;
  const auto start = std::chrono::steady_clock::now();
  try {
    FixedPointReport rep = solve_regularized(pb, opts.fixed_point, opts.inner);
    row.outer_iters = rep.outer_iterations();
    const Trajectory& u = rep.solution;
    row.sup_error = reference ? sup_distance(u, *reference) : 0.0;
    row.residual = unregularized_residual(pb, u);
    const EnergyBalance eb = energy_balance(detail::unregularized(pb), u);
    row.energy_slack = eb.slack;
    row.energy_holds = eb.holds(pb.time.tau());
    if (opts.keep_solutions) row.solution = u;
  } catch (const Error& e) {
    if (!detail::is_solver_failure(e.kind())) throw;
    row.diverged = true;
    row.failure = std::string(to_string(e.kind()));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.sup_error = row.residual = row.energy_slack = nan;
  }
  if (opts.record_timing)
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// One row per eps (times lambda when the plan has lambdas), each compared
/// with the reference on the same time grid.
inline SweepTable causal_limit_sweep(const WedProblem& pb, const SweepPlan& plan, const SweepOptions& opts = {}) {
  plan.validate();
  SweepTable table;
  table.has_lambda = !plan.lambdas.empty();
  std::vector<WedProblem> points;
  for (double eps : plan.epsilons) {
    if (table.has_lambda)
      for (double lam : plan.lambdas) points.push_back(pb.with_epsilon(eps).with_lambda(lam));
    else
      points.push_back(pb.with_epsilon(eps));
  }
  // The causal reference does not depend on eps or lambda, a custom one may.
  std::optional<Trajectory> shared;
  if (!opts.reference) shared = detail::reference_for(pb, opts);
  table.rows.resize(points.size());
  detail::parallel_for(points.size(), detail::sweep_threads(opts.threads), [&](std::size_t i) {
    const Trajectory ref = shared ? *shared : detail::reference_for(points[i], opts);
    table.rows[i] = solve_row(points[i], &ref, opts);
  });
  return table;
}

/// Nested (eps, lambda) sweep. Default order: lambda varies fastest and
/// increments compare consecutive lambdas at fixed eps. With
/// `opposite_order` eps varies fastest at fixed lambda.
inline SweepTable lambda_sweep(const WedProblem& pb, const SweepPlan& plan, const SweepOptions& opts = {},
                               bool opposite_order = false) {
  plan.validate();
  if (plan.lambdas.empty()) throw Error(ErrorKind::ConfigInvalid, "lambdas: at least one value required");
  SweepOptions o = opts;
  o.keep_solutions = true;
  std::vector<WedProblem> points;
  const auto& outer = opposite_order ? plan.lambdas : plan.epsilons;
  const auto& inner = opposite_order ? plan.epsilons : plan.lambdas;
  for (double a : outer)
    for (double b : inner) {
      const double eps = opposite_order ? b : a, lam = opposite_order ? a : b;
      points.push_back(pb.with_epsilon(eps).with_lambda(lam));
    }
  std::optional<Trajectory> shared;
  if (!o.reference) shared = detail::reference_for(pb, o);
  SweepTable table;
  table.has_lambda = true;
  table.has_increment = true;
  table.rows.resize(points.size());
  detail::parallel_for(points.size(), detail::sweep_threads(o.threads), [&](std::size_t i) {
    const Trajectory ref = shared ? *shared : detail::reference_for(points[i], o);
    table.rows[i] = solve_row(points[i], &ref, o);
    table.rows[i].lambda = points[i].yosida->lambda;
  });
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i % inner.size() == 0) continue;
    SweepRow& cur = table.rows[i];
    const SweepRow& prev = table.rows[i - 1];
    if (cur.solution && prev.solution) cur.increment = sup_distance(*cur.solution, *prev.solution);
    else cur.increment = std::numeric_limits<double>::quiet_NaN();
  }
  if (!opts.keep_solutions)
    for (auto& r : table.rows) r.solution.reset();
  return table;
}

struct Epsilon0Result {
  double epsilon0 = 0.0;
  bool instability_found = false;
  int bisections = 0;
};

/// Bisects (geometrically) between a stable eps_lo and an unstable eps_hi
/// until they are within `rel_tol`. A fully stable bracket returns eps_hi
/// with instability_found = false.
inline Epsilon0Result detect_epsilon0(const WedProblem& pb, double eps_lo, double eps_hi, const SweepOptions& opts = {},
                                      double rel_tol = 0.05) {
  if (!(eps_lo > 0.0) || !(eps_hi > eps_lo)) throw Error(ErrorKind::BracketInvalid, "need 0 < eps_lo < eps_hi");
  auto stable = [&](double eps) { return !solve_row(pb.with_epsilon(eps), nullptr, opts).diverged; };
  const bool lo_ok = stable(eps_lo), hi_ok = stable(eps_hi);
  Epsilon0Result out;
  if (lo_ok && hi_ok) {
    out.epsilon0 = eps_hi;
    return out;
  }
  if (!lo_ok) throw Error(ErrorKind::BracketInvalid, "eps_lo is not stable");
  out.instability_found = true;
  double lo = eps_lo, hi = eps_hi;
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (stable(mid) ? lo : hi) = mid;
    ++out.bisections;
  }
  out.epsilon0 = std::sqrt(lo * hi);
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

/// Shortest decimal string that reads back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const SweepTable& t) {
  std::string out = "epsilon";
  if (t.has_lambda) out += ",lambda";
  out += ",sup_error,residual,energy_slack,outer_iters,wall_ms,diverged";
  if (t.has_increment) out += ",increment";
  out += '\n';
  for (const auto& r : t.rows) {
    out += format_number(r.epsilon);
    if (t.has_lambda) out += ',' + (r.lambda ? format_number(*r.lambda) : std::string());
    out += ',' + format_number(r.sup_error);
    out += ',' + format_number(r.residual);
    out += ',' + format_number(r.energy_slack);
    out += ',' + std::to_string(r.outer_iters);
    out += ',' + format_number(r.wall_ms);
    out += r.diverged ? ",true" : ",false";
    if (t.has_increment) out += ',' + (r.increment ? format_number(*r.increment) : std::string());
    out += '\n';
  }
  return out;
}

/// Writes through a temporary file and a rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace wedflow
