#pragma once

#include "ggmm/mixture.hpp"

#include <string>
#include <vector>

namespace ggmm::modelsel {

/// NLogP: lambda_n in [c1, c2] * sqrt(n ln p). LogP: [c1, c2] * sqrt(ln p).
enum class LambdaScheme { NLogP, LogP };

struct PenaltyConfig {
  LambdaScheme scheme = LambdaScheme::NLogP;
  double c1 = 0.1;
  double c2 = 0.25;
  int grid_size = 10;
  double gamma_ebic = 0.5;
  /// Score EBIC on the penalized rather than the plain log-likelihood.
  bool penalized_ebic = false;

  void validate() const;
};

/// |theta_ij| above this counts as an edge when counting degrees of freedom.
inline constexpr double kEdgeTolerance = 1e-6;

struct SelectionReport {
  std::vector<double> grid;
  std::vector<double> ebic_values;  ///< +inf for failed grid points
  std::vector<std::string> failures;  ///< empty string for successful points
  double chosen_lambda = 0.0;
  std::size_t chosen_index = 0;
  mixture::EmReport chosen_fit;
};

std::vector<double> lambda_grid(const PenaltyConfig& cfg, std::size_t n, std::size_t p);

/// (K - 1) + sum_k (p + #{i < j : |theta_ij| > kEdgeTolerance}).
std::size_t degrees_of_freedom(const mixture::MixtureParams& params);

/// -2 l + df ln n + 4 gamma df ln p, with l the unpenalized log-likelihood of
/// the fitted parameters unless `penalty_lambda` > 0, in which case
/// l - penalty_lambda * sum_k |Theta_k|_1 is used instead.
double ebic(const mixture::EmReport& report, const mixture::Dataset& data, double gamma_ebic,
            double penalty_lambda = 0.0);

std::string to_string(LambdaScheme s);
LambdaScheme parse_scheme(const std::string& s);

/// Fits every grid lambda and keeps the EBIC minimizer (larger lambda on
/// ties). Each grid point gets its own seed stream derived from ctrl.seed.
/// Throws ClusterCollapse only if every grid point fails.
SelectionReport select(const mixture::Dataset& data, std::size_t k, const PenaltyConfig& cfg,
                       const mixture::EmControl& ctrl);

/// Same as select() over an explicit lambda sequence.
SelectionReport select_over(const mixture::Dataset& data, std::size_t k,
                            const std::vector<double>& grid, const PenaltyConfig& cfg,
                            const mixture::EmControl& ctrl);

}  // namespace ggmm::modelsel
