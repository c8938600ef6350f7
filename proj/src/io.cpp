#include "ggmm/io.hpp"

#include "ggmm/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ggmm::io {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const mixture::Dataset& data, bool header) {
  std::string out;
  const auto& y = data.rows();
  if (header) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (j) out += ',';
      out += "X" + std::to_string(j + 1);
    }
    out += '\n';
  }
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (j) out += ',';
      out += format_double(y(i, j));
    }
    out += '\n';
  }
  return out;
}

mixture::Dataset parse_csv(const std::string& text, bool header) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header && line_no == 1) continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      std::size_t b = pos, e = end;
      while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
      while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
      double v = 0.0;
      const char* first = line.data() + b;
      const char* last = line.data() + e;
      if (first != last && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (b == e || ec != std::errc{} || ptr != last)
        throw ParseError("row " + std::to_string(line_no) + ": cannot parse '" +
                             line.substr(b, e - b) + "' as a number",
                         line_no);
      if (!std::isfinite(v))
        throw ParseError("row " + std::to_string(line_no) + ": non-finite value '" +
                             line.substr(b, e - b) + "'",
                         line_no);
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("row " + std::to_string(line_no) + ": expected " +
                           std::to_string(rows.front().size()) + " fields, found " +
                           std::to_string(row.size()),
                       line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows", line_no);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return mixture::Dataset(std::move(y));
}

mixture::Dataset read_csv(const fs::path& path, bool header) {
  return parse_csv(read_file(path), header);
}

json matrix_to_json(const symlin::SymMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

symlin::SymMatrix matrix_from_json(const json& j) {
  const auto p = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != p) throw InvalidInput("matrix in JSON is not square");
    for (Eigen::Index c = 0; c < p; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return symlin::SymMatrix::from_dense(m);
}

json params_to_json(const mixture::MixtureParams& params) {
  json j;
  j["k"] = params.k();
  j["p"] = params.p();
  j["pi"] = std::vector<double>(params.pi.data(), params.pi.data() + params.pi.size());
  json thetas = json::array();
  for (const auto& t : params.thetas) thetas.push_back(matrix_to_json(t));
  j["thetas"] = std::move(thetas);
  return j;
}

mixture::MixtureParams params_from_json(const json& j) {
  mixture::MixtureParams params;
  const auto pi = j.at("pi").get<std::vector<double>>();
  params.pi = Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(pi.size()));
  for (const auto& t : j.at("thetas")) params.thetas.push_back(matrix_from_json(t));
  if (params.thetas.size() != pi.size())
    throw DimensionMismatch("JSON has " + std::to_string(pi.size()) + " proportions but " +
                            std::to_string(params.thetas.size()) + " precision matrices");
  return params;
}

json truth_to_json(const simulate::SimTruth& truth, std::size_t n) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = n;
  j["seed"] = truth.seed;
  const json params = params_to_json(truth.params);
  for (const auto& [key, value] : params.items()) j[key] = value;
  j["labels"] = truth.labels;
  return j;
}

simulate::SimTruth truth_from_json(const json& j) {
  simulate::SimTruth t;
  t.params = params_from_json(j);
  t.labels = j.value("labels", std::vector<std::size_t>{});
  t.seed = j.value("seed", std::uint64_t{0});
  return t;
}

json recovery_to_json(const metrics::RecoveryReport& r) {
  json j;
  j["pi_ad"] = r.pi_ad;
  j["alignment"] = r.alignment;
  json clusters = json::array();
  for (std::size_t k = 0; k < r.per_cluster.size(); ++k) {
    const auto& c = r.per_cluster[k];
    clusters.push_back({{"cluster", k},
                        {"tp", c.tp},
                        {"fp", c.fp},
                        {"fn", c.fn},
                        {"tn", c.tn},
                        {"precision", c.precision},
                        {"recall", c.recall},
                        {"f1", c.f1},
                        {"frobenius", c.frobenius}});
  }
  j["clusters"] = std::move(clusters);
  return j;
}

std::string to_dot(const symlin::SymMatrix& theta, const std::string& name, double tol) {
  std::ostringstream out;
  out << "graph " << name << " {\n";
  for (std::size_t i = 0; i < theta.dim(); ++i) out << "  X" << i + 1 << ";\n";
  for (const auto& [i, j] : metrics::edge_set(theta, tol))
    out << "  X" << i + 1 << " -- X" << j + 1 << " [weight=" << format_double(theta(i, j)) << "];\n";
  out << "}\n";
  return out.str();
}

}  // namespace ggmm::io
