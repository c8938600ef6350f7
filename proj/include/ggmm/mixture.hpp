#pragma once

#include "ggmm/glasso.hpp"
#include "ggmm/rng.hpp"
#include "ggmm/symlin.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace ggmm::mixture {

using symlin::SymMatrix;

/// n x p observations, one row per sample.
class Dataset {
 public:
  Dataset() = default;
  /// Throws InvalidInput on NaN/Inf, n < 2 or p < 1.
  explicit Dataset(Eigen::MatrixXd rows);

  std::size_t n() const noexcept { return static_cast<std::size_t>(y_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(y_.cols()); }
  const Eigen::MatrixXd& rows() const noexcept { return y_; }

  /// Copy with the global column mean subtracted.
  Dataset centered() const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.y_ == b.y_; }

 private:
  Eigen::MatrixXd y_;
};

/// Mixing proportions and per-component precision matrices. Means are zero.
struct MixtureParams {
  Eigen::VectorXd pi;
  std::vector<SymMatrix> thetas;

  std::size_t k() const noexcept { return thetas.size(); }
  std::size_t p() const noexcept { return thetas.empty() ? 0 : thetas.front().dim(); }

  /// Checks pi on the simplex (1e-12), all thetas PD and equally sized.
  void validate() const;
};

struct Responsibilities {
  Eigen::MatrixXd omega;  ///< n x K, rows sum to one

  std::size_t n() const noexcept { return static_cast<std::size_t>(omega.rows()); }
  std::size_t k() const noexcept { return static_cast<std::size_t>(omega.cols()); }
  Eigen::VectorXd column_sums() const { return omega.colwise().sum().transpose(); }
};

enum class InitPolicy { Dirichlet, KMeans };

struct EmControl {
  int max_iters = 500;
  double tol = 1e-6;  ///< on |dl| / (1 + |l|)
  int restarts = 5;
  std::uint64_t seed = 0;
  InitPolicy init = InitPolicy::Dirichlet;
  double dirichlet_alpha = 5.0;
  bool center = false;
  glasso::GlassoConfig glasso{};
};

struct EmReport {
  MixtureParams params;
  Responsibilities responsibilities;
  std::vector<double> loglik_trace;  ///< penalized observed log-likelihood per iteration
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  int glasso_unconverged = 0;  ///< M-step glasso calls that hit their sweep budget
};

/// Gaussian log-density at y with zero mean and precision theta, including
/// the -(p/2) ln(2 pi) constant.
double log_component_density(const Eigen::VectorXd& y, const SymMatrix& theta);

/// Log-densities of every row of `data` under one component.
Eigen::VectorXd log_component_densities(const Dataset& data, const SymMatrix& theta);

Responsibilities e_step(const Dataset& data, const MixtureParams& params);

/// Below this total responsibility a component is considered collapsed.
double collapse_floor(std::size_t n);

Eigen::VectorXd m_step_pi(const Responsibilities& resp);

/// sum_i omega_ik y_i y_i' / omega_.k (no mean subtraction).
SymMatrix weighted_covariance(const Dataset& data, const Responsibilities& resp, std::size_t k);

/// 2 * lambda_n / omega_dot_k.
double effective_lambda(double lambda_n, double omega_dot_k);

/// Runs glasso with the effective penalty 2 * lambda_n / omega_dot_k. Raises
/// glasso::NotConverged like glasso_fit.
glasso::GlassoSolution m_step_theta(const SymMatrix& s_tilde, double omega_dot_k,
                                    double lambda_n, const glasso::GlassoConfig& cfg);

/// Unpenalized observed log-likelihood sum_i ln sum_k pi_k phi_k(y_i).
double loglik(const Dataset& data, const MixtureParams& params);

/// loglik minus lambda_n * sum_k |Theta_k|_1 (diagonals included).
double penalized_loglik(const Dataset& data, const MixtureParams& params, double lambda_n);

/// Penalized EM with ctrl.restarts seeded initializations; the best final
/// penalized log-likelihood wins (lowest restart index on ties). Components
/// in the result are ordered by descending pi.
EmReport em_fit(const Dataset& data, std::size_t k, double lambda_n, const EmControl& ctrl);

/// Initial responsibilities for one restart.
Responsibilities initial_responsibilities(const Dataset& data, std::size_t k,
                                          const EmControl& ctrl, Rng& rng);

}  // namespace ggmm::mixture
