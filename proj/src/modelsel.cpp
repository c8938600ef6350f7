#include "ggmm/modelsel.hpp"

#include "ggmm/errors.hpp"

#include <cmath>
#include <limits>

namespace ggmm::modelsel {

void PenaltyConfig::validate() const {
  if (!(c1 > 0.0 && c1 < c2)) throw InvalidConfig("penalty bounds must satisfy 0 < c1 < c2");
  if (grid_size < 1) throw InvalidConfig("grid size must be >= 1");
  if (!(gamma_ebic >= 0.0)) throw InvalidConfig("EBIC gamma must be >= 0");
}

std::vector<double> lambda_grid(const PenaltyConfig& cfg, std::size_t n, std::size_t p) {
  cfg.validate();
  if (n < 2) throw InvalidInput("lambda grid needs n >= 2");
  if (p < 2) throw InvalidInput("lambda grid needs p >= 2 (ln p = 0 otherwise)");
  const double log_p = std::log(static_cast<double>(p));
  const double base = cfg.scheme == LambdaScheme::NLogP
                          ? std::sqrt(static_cast<double>(n) * log_p)
                          : std::sqrt(log_p);
  const double lo = cfg.c1 * base;
  const double hi = cfg.c2 * base;
  if (cfg.grid_size == 1) return {0.5 * (lo + hi)};
  std::vector<double> grid(static_cast<std::size_t>(cfg.grid_size));
  const double step = (hi - lo) / static_cast<double>(cfg.grid_size - 1);
  for (int i = 0; i < cfg.grid_size; ++i) grid[static_cast<std::size_t>(i)] = lo + step * i;
  grid.back() = hi;
  return grid;
}

std::size_t degrees_of_freedom(const mixture::MixtureParams& params) {
  std::size_t df = params.k() - 1;
  for (const auto& theta : params.thetas) {
    df += theta.dim();
    for (std::size_t i = 0; i < theta.dim(); ++i)
      for (std::size_t j = i + 1; j < theta.dim(); ++j)
        if (std::abs(theta(i, j)) > kEdgeTolerance) ++df;
  }
  return df;
}

double ebic(const mixture::EmReport& report, const mixture::Dataset& data, double gamma_ebic,
            double penalty_lambda) {
  double l = mixture::loglik(data, report.params);
  if (penalty_lambda > 0.0) {
    for (const auto& t : report.params.thetas) l -= penalty_lambda * t.l1_norm();
  }
  const auto df = static_cast<double>(degrees_of_freedom(report.params));
  return -2.0 * l + df * std::log(static_cast<double>(data.n())) +
         4.0 * gamma_ebic * df * std::log(static_cast<double>(data.p()));
}

std::string to_string(LambdaScheme s) { return s == LambdaScheme::NLogP ? "nlogp" : "logp"; }

LambdaScheme parse_scheme(const std::string& s) {
  if (s == "nlogp") return LambdaScheme::NLogP;
  if (s == "logp") return LambdaScheme::LogP;
  throw InvalidConfig("unknown lambda scheme '" + s + "' (expected nlogp or logp)");
}

SelectionReport select_over(const mixture::Dataset& data_in, std::size_t k,
                            const std::vector<double>& grid, const PenaltyConfig& cfg,
                            const mixture::EmControl& ctrl) {
  if (grid.empty()) throw InvalidConfig("empty lambda grid");
  const mixture::Dataset data = ctrl.center ? data_in.centered() : data_in;

  SelectionReport out;
  out.grid = grid;
  out.ebic_values.assign(grid.size(), std::numeric_limits<double>::infinity());
  out.failures.assign(grid.size(), std::string{});

  bool any = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    mixture::EmControl point = ctrl;
    point.center = false;
    point.seed = derive_seed(ctrl.seed, {0x67726964ULL, g});
    try {
      mixture::EmReport fit = mixture::em_fit(data, k, grid[g], point);
      const double score =
          ebic(fit, data, cfg.gamma_ebic, cfg.penalized_ebic ? grid[g] : 0.0);
      out.ebic_values[g] = score;
      // Grid is increasing, so <= prefers the larger lambda on ties.
      if (!any || score <= best) {
        best = score;
        out.chosen_index = g;
        out.chosen_lambda = grid[g];
        out.chosen_fit = std::move(fit);
        any = true;
      }
    } catch (const ClusterCollapse& e) {
      out.failures[g] = e.what();
    }
  }
  if (!any) throw ClusterCollapse("every lambda grid point failed: " + out.failures.back());
  return out;
}

SelectionReport select(const mixture::Dataset& data, std::size_t k, const PenaltyConfig& cfg,
                       const mixture::EmControl& ctrl) {
  return select_over(data, k, lambda_grid(cfg, data.n(), data.p()), cfg, ctrl);
}

}  // namespace ggmm::modelsel
