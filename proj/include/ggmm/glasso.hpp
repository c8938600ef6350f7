#pragma once

#include "ggmm/errors.hpp"
#include "ggmm/symlin.hpp"

namespace ggmm::glasso {

using symlin::SymMatrix;

struct GlassoConfig {
  double lambda = 0.0;     ///< effective penalty applied to every entry, diagonal included
  int max_sweeps = 200;
  double conv_tol = 1e-6;  ///< mean |dW| per sweep, relative to mean |s_ij| off the diagonal
  double inner_tol = 1e-10;
  int max_inner = 10000;
  double kkt_tol = 1e-4;   ///< a converged solution must also certify stationarity to this level

  void validate() const;
};

struct GlassoSolution {
  SymMatrix theta;  ///< precision estimate
  SymMatrix sigma;  ///< inverse of theta
  int iterations = 0;
  double max_kkt_violation = 0.0;
  double objective = 0.0;
  bool converged = false;
};

/// Raised by glasso_fit when the sweep budget runs out or the unpenalized
/// problem has no solution. The best available diagnostics ride along.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, GlassoSolution diag)
      : Error(what), diagnostics_(std::move(diag)) {}
  const GlassoSolution& diagnostics() const noexcept { return diagnostics_; }

 private:
  GlassoSolution diagnostics_;
};

double soft_threshold(double x, double t);

/// ln|theta| - tr(s theta) - lambda * sum_ij |theta_ij|.
double objective(const SymMatrix& theta, const SymMatrix& s, double lambda);

/// Largest violation of the subgradient stationarity conditions
///   sigma_ij - s_ij = lambda * sign(theta_ij)   if theta_ij != 0
///   |sigma_ij - s_ij| <= lambda                 if theta_ij == 0
/// over all (i, j), diagonal included.
double max_kkt_violation(const SymMatrix& theta, const SymMatrix& sigma, const SymMatrix& s,
                         double lambda);

/// Block coordinate descent over columns of the working covariance W with an
/// inner coordinate-descent lasso. W starts at s + lambda*I. Never throws on
/// an exhausted sweep budget; check `converged`.
GlassoSolution glasso_solve(const SymMatrix& s, const GlassoConfig& cfg);

/// Same as glasso_solve but raises NotConverged instead of returning an
/// unconverged solution.
GlassoSolution glasso_fit(const SymMatrix& s, const GlassoConfig& cfg);

}  // namespace ggmm::glasso
