#include "ggmm/evalmetrics.hpp"

#include "ggmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ggmm::metrics {

EdgeSet edge_set(const SymMatrix& theta, double tol) {
  EdgeSet out;
  for (std::size_t i = 0; i < theta.dim(); ++i)
    for (std::size_t j = i + 1; j < theta.dim(); ++j)
      if (std::abs(theta(i, j)) > tol) out.emplace(i, j);
  return out;
}

double precision(std::size_t tp, std::size_t fp) {
  return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double recall(std::size_t tp, std::size_t fn) {
  return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double f1(double prec, double rec) {
  return prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
}

double Confusion::precision() const { return metrics::precision(tp, fp); }
double Confusion::recall() const { return metrics::recall(tp, fn); }
double Confusion::f1() const { return metrics::f1(precision(), recall()); }

Confusion confusion(const EdgeSet& est, const EdgeSet& truth, std::size_t p) {
  const std::size_t pairs = p * (p - 1) / 2;
  for (const auto* set : {&est, &truth})
    for (const auto& [i, j] : *set)
      if (i >= j || j >= p) throw InvalidInput("edge outside the variable range");
  Confusion c;
  for (const auto& e : est) (truth.count(e) ? c.tp : c.fp)++;
  c.fn = truth.size() - c.tp;
  c.tn = pairs - c.tp - c.fp - c.fn;
  return c;
}

double frobenius_error(const SymMatrix& est, const SymMatrix& truth) {
  if (est.dim() != truth.dim())
    throw DimensionMismatch("frobenius_error: dims " + std::to_string(est.dim()) + " and " +
                            std::to_string(truth.dim()));
  return (est.dense() - truth.dense()).norm();
}

double pi_ad(const Eigen::VectorXd& est_pi, const Eigen::VectorXd& true_pi,
             const std::vector<std::size_t>& perm, AdMode mode) {
  if (est_pi.size() != true_pi.size() || perm.size() != static_cast<std::size_t>(true_pi.size()))
    throw DimensionMismatch("pi_ad: estimated K=" + std::to_string(est_pi.size()) + ", true K=" +
                            std::to_string(true_pi.size()));
  double worst = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const double d = std::abs(est_pi(static_cast<Eigen::Index>(perm[k])) -
                              true_pi(static_cast<Eigen::Index>(k)));
    worst = std::max(worst, d);
    total += d;
  }
  return mode == AdMode::Max ? worst : total / static_cast<double>(perm.size());
}

double pi_ad(const Eigen::VectorXd& est_pi, const Eigen::VectorXd& true_pi, AdMode mode) {
  std::vector<std::size_t> id(static_cast<std::size_t>(true_pi.size()));
  std::iota(id.begin(), id.end(), 0);
  return pi_ad(est_pi, true_pi, id, mode);
}

std::vector<std::size_t> align_clusters(const mixture::MixtureParams& est,
                                        const mixture::MixtureParams& truth) {
  if (est.k() != truth.k() || est.p() != truth.p())
    throw DimensionMismatch("align_clusters: estimate has K=" + std::to_string(est.k()) + ", p=" +
                            std::to_string(est.p()) + "; truth has K=" +
                            std::to_string(truth.k()) + ", p=" + std::to_string(truth.p()));
  const std::size_t k = truth.k();
  std::vector<std::vector<double>> cost(k, std::vector<double>(k));
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t e = 0; e < k; ++e) cost[t][e] = frobenius_error(est.thetas[e], truth.thetas[t]);

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t t = 0; t < k; ++t) c += cost[t][perm[t]];
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

RecoveryReport evaluate(const mixture::MixtureParams& est, const mixture::MixtureParams& truth,
                        double tol, AdMode mode) {
  RecoveryReport out;
  out.alignment = align_clusters(est, truth);
  out.pi_ad = pi_ad(est.pi, truth.pi, out.alignment, mode);
  const std::size_t p = truth.p();
  for (std::size_t t = 0; t < truth.k(); ++t) {
    const SymMatrix& e = est.thetas[out.alignment[t]];
    const Confusion c = confusion(edge_set(e, tol), edge_set(truth.thetas[t], tol), p);
    out.per_cluster.push_back({c.tp, c.fp, c.fn, c.tn, c.precision(), c.recall(), c.f1(),
                               frobenius_error(e, truth.thetas[t])});
  }
  return out;
}

}  // namespace ggmm::metrics
