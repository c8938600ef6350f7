#pragma once

#include "ggmm/mixture.hpp"

#include <set>
#include <utility>
#include <vector>

namespace ggmm::metrics {

using symlin::SymMatrix;

/// Unordered pair stored as (i, j) with i < j, zero-based.
using Edge = std::pair<std::size_t, std::size_t>;
using EdgeSet = std::set<Edge>;

inline constexpr double kEdgeTolerance = 1e-6;

EdgeSet edge_set(const SymMatrix& theta, double tol = kEdgeTolerance);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

/// `est` is the prediction, `truth` the reference.
Confusion confusion(const EdgeSet& est, const EdgeSet& truth, std::size_t p);

/// tp / (tp + fp); 0 when nothing was predicted.
double precision(std::size_t tp, std::size_t fp);
/// tp / (tp + fn); 0 when there is nothing to find.
double recall(std::size_t tp, std::size_t fn);
/// Harmonic mean; 0 when both rates are 0.
double f1(double precision, double recall);

double frobenius_error(const SymMatrix& est, const SymMatrix& truth);

enum class AdMode { Max, Mean };

/// |est_pi[perm[k]] - true_pi[k]| aggregated over k (max by default).
double pi_ad(const Eigen::VectorXd& est_pi, const Eigen::VectorXd& true_pi,
             const std::vector<std::size_t>& perm, AdMode mode = AdMode::Max);
double pi_ad(const Eigen::VectorXd& est_pi, const Eigen::VectorXd& true_pi,
             AdMode mode = AdMode::Max);

/// perm[k] is the estimated component matched to true component k: the
/// permutation minimizing the summed Frobenius error, searched exhaustively
/// in lexicographic order (first minimum wins).
std::vector<std::size_t> align_clusters(const mixture::MixtureParams& est,
                                        const mixture::MixtureParams& truth);

struct ClusterRecovery {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double frobenius = 0.0;
};

struct RecoveryReport {
  std::vector<ClusterRecovery> per_cluster;  ///< indexed by true component
  double pi_ad = 0.0;
  std::vector<std::size_t> alignment;
};

RecoveryReport evaluate(const mixture::MixtureParams& est, const mixture::MixtureParams& truth,
                        double tol = kEdgeTolerance, AdMode mode = AdMode::Max);

}  // namespace ggmm::metrics
