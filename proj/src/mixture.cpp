#include "ggmm/mixture.hpp"

#include "ggmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

namespace ggmm::mixture {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

void check_dims(const Dataset& data, const MixtureParams& params) {
  if (params.k() == 0) throw InvalidInput("mixture has no components");
  if (params.p() != data.p())
    throw DimensionMismatch("data has p=" + std::to_string(data.p()) + " but params have p=" +
                            std::to_string(params.p()));
}

// n x K matrix of ln pi_k + ln phi_k(y_i).
Eigen::MatrixXd joint_log_masses(const Dataset& data, const MixtureParams& params) {
  check_dims(data, params);
  Eigen::MatrixXd out(data.n(), params.k());
  for (std::size_t k = 0; k < params.k(); ++k) {
    const double log_pi = std::log(params.pi(static_cast<Eigen::Index>(k)));
    out.col(static_cast<Eigen::Index>(k)) =
        log_component_densities(data, params.thetas[k]).array() + log_pi;
  }
  return out;
}

double penalty_norm(const MixtureParams& params) {
  double total = 0.0;
  for (const auto& t : params.thetas) total += t.l1_norm();
  return total;
}

void check_collapse(const Eigen::VectorXd& col_sums, std::size_t n) {
  const double floor = collapse_floor(n);
  for (Eigen::Index k = 0; k < col_sums.size(); ++k) {
    if (!(col_sums(k) >= floor)) {
      throw ClusterCollapse("component " + std::to_string(k) + " has total responsibility " +
                            std::to_string(col_sums(k)) + " < floor " + std::to_string(floor));
    }
  }
}

Responsibilities dirichlet_init(std::size_t n, std::size_t k, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Responsibilities r{Eigen::MatrixXd(n, k)};
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double g = gamma(rng);
      r.omega(i, c) = g;
      total += g;
    }
    r.omega.row(i) /= total;
  }
  return r;
}

// A few Lloyd iterations seeded by k-means++, then hard labels softened to
// 0.9 on the assigned cluster and 0.1 spread over the rest.
Responsibilities kmeans_init(const Dataset& data, std::size_t k, Rng& rng) {
  const Eigen::MatrixXd& y = data.rows();
  const auto n = y.rows();
  Eigen::MatrixXd centers(k, y.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = y.row(pick(rng));
  Eigen::VectorXd d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j)
        best = std::min(best, (y.row(i) - centers.row(static_cast<Eigen::Index>(j))).squaredNorm());
      d2(i) = best;
    }
    std::discrete_distribution<Eigen::Index> weighted(d2.data(), d2.data() + n);
    centers.row(static_cast<Eigen::Index>(c)) = y.row(d2.sum() > 0.0 ? weighted(rng) : pick(rng));
  }

  std::vector<std::size_t> label(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < 20; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::size_t arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (y.row(i) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      changed |= label[static_cast<std::size_t>(i)] != arg;
      label[static_cast<std::size_t>(i)] = arg;
    }
    if (!changed && iter > 0) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, y.cols());
    std::vector<double> counts(k, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(label[static_cast<std::size_t>(i)])) += y.row(i);
      counts[label[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0.0) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / counts[c];
  }

  Responsibilities r{Eigen::MatrixXd(n, k)};
  if (k == 1) {
    r.omega.setOnes();
    return r;
  }
  r.omega.setConstant(0.1 / static_cast<double>(k - 1));
  for (Eigen::Index i = 0; i < n; ++i)
    r.omega(i, static_cast<Eigen::Index>(label[static_cast<std::size_t>(i)])) = 0.9;
  return r;
}

struct RestartResult {
  EmReport report;
  double final_loglik = -std::numeric_limits<double>::infinity();
};

RestartResult run_restart(const Dataset& data, std::size_t k, double lambda_n,
                          const EmControl& ctrl, int restart) {
  Rng rng(derive_seed(ctrl.seed, {static_cast<std::uint64_t>(restart)}));
  const std::size_t n = data.n();

  EmReport rep;
  rep.restart_index = restart;
  Responsibilities resp = initial_responsibilities(data, k, ctrl, rng);

  MixtureParams params;
  params.thetas.resize(k);

  // One M-step. For components that already have a theta, the glasso result is
  // only accepted when it does not lower that component's M-step objective, so
  // the penalized likelihood never decreases.
  auto m_step = [&](bool have_previous) {
    params.pi = m_step_pi(resp);
    const Eigen::VectorXd col = resp.column_sums();
    for (std::size_t c = 0; c < k; ++c) {
      const SymMatrix s_tilde = weighted_covariance(data, resp, c);
      glasso::GlassoConfig cfg = ctrl.glasso;
      cfg.lambda = effective_lambda(lambda_n, col(static_cast<Eigen::Index>(c)));
      glasso::GlassoSolution sol = glasso::glasso_solve(s_tilde, cfg);
      if (!sol.converged) ++rep.glasso_unconverged;
      if (have_previous) {
        const double old_obj = glasso::objective(params.thetas[c], s_tilde, cfg.lambda);
        if (sol.objective < old_obj) continue;
      }
      params.thetas[c] = std::move(sol.theta);
    }
  };

  check_collapse(resp.column_sums(), n);
  m_step(false);
  double current = penalized_loglik(data, params, lambda_n);
  rep.loglik_trace.push_back(current);

  for (int iter = 1; iter <= ctrl.max_iters; ++iter) {
    resp = e_step(data, params);
    check_collapse(resp.column_sums(), n);
    m_step(true);
    const double next = penalized_loglik(data, params, lambda_n);
    rep.loglik_trace.push_back(next);
    rep.iterations = iter;
    const double rel = std::abs(next - current) / (1.0 + std::abs(next));
    current = next;
    if (rel < ctrl.tol) {
      rep.converged = true;
      break;
    }
  }

  // Responsibilities reported against the final parameters.
  resp = e_step(data, params);
  rep.params = std::move(params);
  rep.responsibilities = std::move(resp);
  return {std::move(rep), current};
}

void sort_by_descending_pi(EmReport& rep) {
  const std::size_t k = rep.params.k();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rep.params.pi(static_cast<Eigen::Index>(a)) > rep.params.pi(static_cast<Eigen::Index>(b));
  });
  MixtureParams sorted;
  sorted.pi.resize(static_cast<Eigen::Index>(k));
  Eigen::MatrixXd omega(rep.responsibilities.omega.rows(), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    sorted.pi(static_cast<Eigen::Index>(i)) = rep.params.pi(src);
    sorted.thetas.push_back(rep.params.thetas[order[i]]);
    omega.col(static_cast<Eigen::Index>(i)) = rep.responsibilities.omega.col(src);
  }
  rep.params = std::move(sorted);
  rep.responsibilities.omega = std::move(omega);
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd rows) : y_(std::move(rows)) {
  if (y_.rows() < 2) throw InvalidInput("dataset needs at least 2 observations");
  if (y_.cols() < 1) throw InvalidInput("dataset needs at least 1 variable");
  if (!y_.allFinite()) throw InvalidInput("dataset contains NaN or Inf");
}

Dataset Dataset::centered() const {
  Eigen::MatrixXd c = y_.rowwise() - y_.colwise().mean();
  return Dataset(std::move(c));
}

void MixtureParams::validate() const {
  if (thetas.empty()) throw InvalidInput("mixture has no components");
  if (static_cast<std::size_t>(pi.size()) != thetas.size())
    throw DimensionMismatch("pi has " + std::to_string(pi.size()) + " entries for " +
                            std::to_string(thetas.size()) + " components");
  for (Eigen::Index k = 0; k < pi.size(); ++k)
    if (!(pi(k) > 0.0)) throw InvalidInput("mixing proportions must be > 0");
  if (std::abs(pi.sum() - 1.0) > 1e-12) throw InvalidInput("mixing proportions must sum to 1");
  for (const auto& t : thetas) {
    if (t.dim() != thetas.front().dim()) throw DimensionMismatch("precision matrices differ in size");
    if (!symlin::is_positive_definite(t))
      throw NotPositiveDefinite("precision matrix is not positive definite");
  }
}

double log_component_density(const Eigen::VectorXd& y, const SymMatrix& theta) {
  if (static_cast<std::size_t>(y.size()) != theta.dim())
    throw DimensionMismatch("observation and precision dimensions differ");
  const auto chol = symlin::cholesky(theta);
  const double quad = (chol.l.transpose() * y).squaredNorm();
  return -0.5 * static_cast<double>(y.size()) * kLog2Pi + 0.5 * symlin::log_det(chol) - 0.5 * quad;
}

Eigen::VectorXd log_component_densities(const Dataset& data, const SymMatrix& theta) {
  if (data.p() != theta.dim()) throw DimensionMismatch("observation and precision dimensions differ");
  const auto chol = symlin::cholesky(theta);
  // y' Theta y = |L' y|^2, evaluated for all rows at once as (Y L).
  const Eigen::MatrixXd projected = data.rows() * chol.l.triangularView<Eigen::Lower>();
  const double constant =
      -0.5 * static_cast<double>(data.p()) * kLog2Pi + 0.5 * symlin::log_det(chol);
  return (constant - 0.5 * projected.rowwise().squaredNorm().array()).matrix();
}

Responsibilities e_step(const Dataset& data, const MixtureParams& params) {
  Eigen::MatrixXd log_mass = joint_log_masses(data, params);
  for (Eigen::Index i = 0; i < log_mass.rows(); ++i) {
    const double top = log_mass.row(i).maxCoeff();
    if (!std::isfinite(top))
      throw DegenerateResponsibility("observation " + std::to_string(i) +
                                     " has zero mass under every component");
    log_mass.row(i) = (log_mass.row(i).array() - top).exp();
    log_mass.row(i) /= log_mass.row(i).sum();
  }
  return Responsibilities{std::move(log_mass)};
}

double collapse_floor(std::size_t n) { return std::max(1.0, 1e-3 * static_cast<double>(n)); }

Eigen::VectorXd m_step_pi(const Responsibilities& resp) {
  const Eigen::VectorXd col = resp.column_sums();
  check_collapse(col, resp.n());
  // Normalizing by the column total rather than n keeps the simplex exact
  // when rows carry roundoff.
  return col / col.sum();
}

SymMatrix weighted_covariance(const Dataset& data, const Responsibilities& resp, std::size_t k) {
  if (resp.n() != data.n()) throw DimensionMismatch("responsibilities and data disagree on n");
  if (k >= resp.k()) throw InvalidInput("component index out of range");
  const auto w = resp.omega.col(static_cast<Eigen::Index>(k));
  const double total = w.sum();
  if (!(total > 0.0)) throw ClusterCollapse("component " + std::to_string(k) + " has zero weight");
  const Eigen::MatrixXd& y = data.rows();
  Eigen::MatrixXd s = y.transpose() * (w.asDiagonal() * y);
  s /= total;
  return SymMatrix::from_dense(0.5 * (s + s.transpose()));
}

double effective_lambda(double lambda_n, double omega_dot_k) {
  if (!(omega_dot_k > 0.0)) throw ClusterCollapse("component has zero total responsibility");
  if (!(lambda_n >= 0.0)) throw InvalidInput("lambda_n must be >= 0");
  return 2.0 * lambda_n / omega_dot_k;
}

glasso::GlassoSolution m_step_theta(const SymMatrix& s_tilde, double omega_dot_k,
                                    double lambda_n, const glasso::GlassoConfig& cfg) {
  glasso::GlassoConfig c = cfg;
  c.lambda = effective_lambda(lambda_n, omega_dot_k);
  return glasso::glasso_fit(s_tilde, c);
}

double loglik(const Dataset& data, const MixtureParams& params) {
  const Eigen::MatrixXd log_mass = joint_log_masses(data, params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < log_mass.rows(); ++i) {
    const double top = log_mass.row(i).maxCoeff();
    total += top + std::log((log_mass.row(i).array() - top).exp().sum());
  }
  return total;
}

double penalized_loglik(const Dataset& data, const MixtureParams& params, double lambda_n) {
  return loglik(data, params) - lambda_n * penalty_norm(params);
}

Responsibilities initial_responsibilities(const Dataset& data, std::size_t k,
                                          const EmControl& ctrl, Rng& rng) {
  if (k == 1) return Responsibilities{Eigen::MatrixXd::Ones(data.n(), 1)};
  switch (ctrl.init) {
    case InitPolicy::KMeans:
      return kmeans_init(data, k, rng);
    case InitPolicy::Dirichlet:
      break;
  }
  return dirichlet_init(data.n(), k, ctrl.dirichlet_alpha, rng);
}

EmReport em_fit(const Dataset& data_in, std::size_t k, double lambda_n, const EmControl& ctrl) {
  if (k < 1) throw InvalidInput("number of components must be >= 1");
  if (!(lambda_n >= 0.0)) throw InvalidInput("lambda_n must be >= 0");
  if (ctrl.restarts < 1 || ctrl.max_iters < 1) throw InvalidInput("restarts and max_iters must be >= 1");
  ctrl.glasso.validate();

  const Dataset data = ctrl.center ? data_in.centered() : data_in;

  std::optional<RestartResult> best;
  std::string last_failure;
  for (int r = 0; r < ctrl.restarts; ++r) {
    try {
      RestartResult res = run_restart(data, k, lambda_n, ctrl, r);
      if (!best || res.final_loglik > best->final_loglik) best = std::move(res);
    } catch (const ClusterCollapse& e) {
      last_failure = e.what();
    } catch (const NotPositiveDefinite& e) {
      last_failure = e.what();
    } catch (const DegenerateResponsibility& e) {
      last_failure = e.what();
    } catch (const glasso::NotConverged& e) {
      last_failure = e.what();
    }
  }
  if (!best) throw ClusterCollapse("all " + std::to_string(ctrl.restarts) + " restarts failed: " + last_failure);
  sort_by_descending_pi(best->report);
  return std::move(best->report);
}

}  // namespace ggmm::mixture
