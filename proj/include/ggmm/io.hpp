#pragma once

#include "ggmm/evalmetrics.hpp"
#include "ggmm/mixture.hpp"
#include "ggmm/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ggmm::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Writes to `<path>.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// 17 significant digits, so every double survives a text round trip.
std::string format_double(double v);

/// Comma separated, '.' decimal point, optional single header row.
std::string to_csv(const mixture::Dataset& data, bool header);
/// ParseError carries the 1-based line number of the offending row.
mixture::Dataset parse_csv(const std::string& text, bool header);
mixture::Dataset read_csv(const std::filesystem::path& path, bool header);

json matrix_to_json(const symlin::SymMatrix& m);
symlin::SymMatrix matrix_from_json(const json& j);

json params_to_json(const mixture::MixtureParams& params);
mixture::MixtureParams params_from_json(const json& j);

json truth_to_json(const simulate::SimTruth& truth, std::size_t n);
simulate::SimTruth truth_from_json(const json& j);

json recovery_to_json(const metrics::RecoveryReport& r);

/// Graphviz undirected graph of the off-diagonal support of theta.
std::string to_dot(const symlin::SymMatrix& theta, const std::string& name,
                   double tol = metrics::kEdgeTolerance);

}  // namespace ggmm::io
