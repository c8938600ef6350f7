#include "ggmm/glasso.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ggmm::glasso {

namespace {

// Coordinate descent for
//   min_b 0.5 b' W11 b - b' s12 + lambda |b|_1
// where W11 is W with row/column j removed. `b` is warm-started in place.
// The excluded index is skipped through an index map instead of copying W11.
void lasso_column(const Eigen::MatrixXd& w, const Eigen::VectorXd& s_col, Eigen::Index j,
                  double lambda, const GlassoConfig& cfg, Eigen::VectorXd& b) {
  const Eigen::Index p = w.rows();
  for (int it = 0; it < cfg.max_inner; ++it) {
    double max_delta = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k == j) continue;
      double r = s_col(k);
      for (Eigen::Index l = 0; l < p; ++l)
        if (l != j && l != k) r -= w(k, l) * b(l);
      const double updated = soft_threshold(r, lambda) / w(k, k);
      max_delta = std::max(max_delta, std::abs(updated - b(k)));
      b(k) = updated;
    }
    if (max_delta < cfg.inner_tol) return;
  }
}

// Recovers theta from W and the column coefficients: theta_jj = 1/(w_jj - w12'b),
// theta_{-j,j} = -b * theta_jj.
Eigen::MatrixXd assemble_theta(const Eigen::MatrixXd& w, const Eigen::MatrixXd& betas) {
  const Eigen::Index p = w.rows();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double quad = 0.0;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) quad += w(k, j) * betas(k, j);
    const double tjj = 1.0 / (w(j, j) - quad);
    theta(j, j) = tjj;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) theta(k, j) = -betas(k, j) * tjj;
  }
  return 0.5 * (theta + theta.transpose());
}

bool has_invalid_diagonal(const SymMatrix& s) {
  for (std::size_t i = 0; i < s.dim(); ++i)
    if (!std::isfinite(s(i, i)) || s(i, i) < 0.0) return true;
  return !s.dense().allFinite();
}

}  // namespace

void GlassoConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("glasso lambda must be >= 0");
  if (max_sweeps < 1 || max_inner < 1) throw InvalidInput("glasso iteration limits must be >= 1");
  if (!(conv_tol > 0.0) || !(inner_tol > 0.0) || !(kkt_tol > 0.0))
    throw InvalidInput("glasso tolerances must be > 0");
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double objective(const SymMatrix& theta, const SymMatrix& s, double lambda) {
  return symlin::log_det(theta) - symlin::trace_product(s, theta) - lambda * theta.l1_norm();
}

double max_kkt_violation(const SymMatrix& theta, const SymMatrix& sigma, const SymMatrix& s,
                         double lambda) {
  const std::size_t p = theta.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double g = sigma(i, j) - s(i, j);
      const double t = theta(i, j);
      const double v = t != 0.0 ? std::abs(g - lambda * (t > 0.0 ? 1.0 : -1.0))
                                : std::max(0.0, std::abs(g) - lambda);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

GlassoSolution glasso_solve(const SymMatrix& s, const GlassoConfig& cfg) {
  cfg.validate();
  if (has_invalid_diagonal(s)) throw InvalidInput("glasso input has NaN or negative diagonal");

  const double lambda = cfg.lambda;
  const auto p = static_cast<Eigen::Index>(s.dim());
  const Eigen::MatrixXd& sd = s.dense();

  if (lambda == 0.0 && !symlin::is_positive_definite(s)) {
    GlassoSolution diag;
    diag.max_kkt_violation = std::numeric_limits<double>::infinity();
    diag.objective = -std::numeric_limits<double>::infinity();
    throw NotConverged("unpenalized problem has no solution: input is singular", diag);
  }

  double offdiag_scale = 0.0;
  if (p > 1) {
    offdiag_scale = (sd.cwiseAbs().sum() - sd.diagonal().cwiseAbs().sum()) /
                    static_cast<double>(p * (p - 1));
  }
  const double threshold = cfg.conv_tol * (offdiag_scale > 0.0 ? offdiag_scale : 1.0);

  Eigen::MatrixXd w = sd;
  w.diagonal().array() += lambda;
  Eigen::MatrixXd betas = Eigen::MatrixXd::Zero(p, p);

  GlassoSolution out;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    const Eigen::MatrixXd w_prev = w;
    for (Eigen::Index j = 0; j < p && p > 1; ++j) {
      Eigen::VectorXd b = betas.col(j);
      b(j) = 0.0;
      lasso_column(w, sd.col(j), j, lambda, cfg, b);
      betas.col(j) = b;
      for (Eigen::Index k = 0; k < p; ++k) {
        if (k == j) continue;
        double v = 0.0;
        for (Eigen::Index l = 0; l < p; ++l)
          if (l != j) v += w(k, l) * b(l);
        w(k, j) = v;
        w(j, k) = v;
      }
    }
    out.iterations = sweep;
    const double mean_change =
        (w - w_prev).cwiseAbs().sum() / static_cast<double>(p * p);
    if (mean_change > threshold && sweep < cfg.max_sweeps) continue;

    const Eigen::MatrixXd theta_dense = assemble_theta(w, betas);
    SymMatrix theta = SymMatrix::from_dense(theta_dense);
    symlin::LowerTriangularFactor chol;
    try {
      chol = symlin::cholesky(theta);
    } catch (const NotPositiveDefinite&) {
      if (sweep < cfg.max_sweeps) continue;
      throw;
    }
    out.theta = theta;
    out.sigma = symlin::inverse(chol);
    out.max_kkt_violation = max_kkt_violation(out.theta, out.sigma, s, lambda);
    out.objective = symlin::log_det(chol) - symlin::trace_product(s, out.theta) -
                    lambda * out.theta.l1_norm();
    out.converged = mean_change <= threshold && out.max_kkt_violation <= cfg.kkt_tol;
    if (out.converged) break;
  }
  return out;
}

GlassoSolution glasso_fit(const SymMatrix& s, const GlassoConfig& cfg) {
  GlassoSolution sol = glasso_solve(s, cfg);
  if (!sol.converged) {
    throw NotConverged("glasso did not converge in " + std::to_string(sol.iterations) +
                           " sweeps (kkt violation " + std::to_string(sol.max_kkt_violation) + ")",
                       sol);
  }
  return sol;
}

}  // namespace ggmm::glasso
