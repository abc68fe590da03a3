#pragma once

#include <wedflow/errors.hpp>

#include <Eigen/Dense>

#include <vector>

namespace wedflow {

/// Block tridiagonal system with dense square blocks:
///   lower[n] x[n-1] + diag[n] x[n] + upper[n] x[n+1] = rhs[n].
/// lower[0] and upper[N-1] are ignored.
struct BlockTridiagonal {
  std::vector<Eigen::MatrixXd> lower, diag, upper;

  explicit BlockTridiagonal(std::size_t blocks = 0) : lower(blocks), diag(blocks), upper(blocks) {}
  std::size_t blocks() const noexcept { return diag.size(); }

  /// Block Thomas elimination. Throws NewtonFailed when a pivot block is singular.
  std::vector<Eigen::VectorXd> solve(const std::vector<Eigen::VectorXd>& rhs) const {
    const std::size_t N = blocks();
    // c[n] = D'_n^{-1} U_n, y[n] = D'_n^{-1} (rhs_n - L_n y[n-1])
    std::vector<Eigen::MatrixXd> c(N);
    std::vector<Eigen::VectorXd> y(N);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    for (std::size_t n = 0; n < N; ++n) {
      Eigen::MatrixXd reduced = diag[n];
      Eigen::VectorXd r = rhs[n];
      if (n > 0) {
        reduced -= lower[n] * c[n - 1];
        r -= lower[n] * y[n - 1];
      }
      lu.compute(reduced);
      if (n + 1 < N) c[n] = lu.solve(upper[n]);
      y[n] = lu.solve(r);
    }
    for (std::size_t n = N - 1; n-- > 0;) y[n] -= c[n] * y[n + 1];
    for (const auto& v : y)
      if (!v.allFinite()) throw Error(ErrorKind::NewtonFailed, "singular block in the time-coupled Newton system");
    return y;
  }
};

}  // namespace wedflow
