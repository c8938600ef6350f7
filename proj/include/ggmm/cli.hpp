#pragma once

#include "ggmm/evalmetrics.hpp"
#include "ggmm/modelsel.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ggmm::cli {

struct SimulateConfig {
  std::size_t p = 10;
  std::size_t n = 300;
  std::uint64_t seed = 1;
  /// Colon separated component list: chainN (band at offset N) or identity.
  std::string scheme = "chain1:chain2";
  /// Mixing proportions; a missing last entry is filled with the remainder.
  std::vector<double> pi{0.5};
  double offdiag = -0.4;
  std::filesystem::path data_out = "data.csv";
  std::filesystem::path truth_out = "truth.json";
  bool header = false;
};

struct FitConfig {
  std::filesystem::path data_in;
  bool header = false;
  std::size_t k = 2;
  modelsel::PenaltyConfig penalty{};
  mixture::EmControl em{};
  /// Fit a single lambda instead of the scheme's grid.
  std::optional<double> lambda;
  std::filesystem::path out = "fit.json";
  /// When set, writes <prefix><k>.dot per cluster.
  std::string dot_prefix;
};

struct EvalConfig {
  std::filesystem::path fit_in = "fit.json";
  std::filesystem::path truth_in = "truth.json";
  std::filesystem::path out = "metrics.json";
  metrics::AdMode ad_mode = metrics::AdMode::Max;
};

struct ReplicateConfig {
  std::vector<modelsel::LambdaScheme> schemes{modelsel::LambdaScheme::NLogP,
                                              modelsel::LambdaScheme::LogP};
  std::vector<std::size_t> ns{100, 300, 800, 2000, 5000};
  int reps = 10;
  std::uint64_t seed = 1;
  std::size_t p = 10;
  double offdiag = -0.4;
  modelsel::PenaltyConfig penalty{};
  mixture::EmControl em{};
  int jobs = 1;
  std::filesystem::path out_prefix = "summary";
  /// Reuse per-cell results already on disk.
  bool resume = false;
};

/// Averages over the successful repetitions of one (scheme, n) cell for one
/// true cluster.
struct SummaryRow {
  modelsel::LambdaScheme scheme{};
  std::size_t n = 0;
  std::size_t cluster = 0;
  int reps_ok = 0;
  int reps_failed = 0;
  double ad = 0.0;
  double frobenius = 0.0;
  double f1 = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

mixture::MixtureParams scheme_params(const std::string& scheme, std::size_t p,
                                     const std::vector<double>& pi, double offdiag);

void cmd_simulate(const SimulateConfig& cfg);
void cmd_fit(const FitConfig& cfg);
void cmd_eval(const EvalConfig& cfg);
std::vector<SummaryRow> cmd_replicate(const ReplicateConfig& cfg);

std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Entry point for the `ggmm` executable. Returns the process exit status.
int run(int argc, char** argv);

}  // namespace ggmm::cli
