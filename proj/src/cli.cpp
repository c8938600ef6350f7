#include "ggmm/cli.hpp"

#include "ggmm/errors.hpp"
#include "ggmm/io.hpp"
#include "ggmm/simulate.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ggmm::cli {

namespace fs = std::filesystem;
using io::json;

mixture::MixtureParams scheme_params(const std::string& scheme, std::size_t p,
                                     const std::vector<double>& pi, double offdiag) {
  mixture::MixtureParams params;
  std::stringstream ss(scheme);
  std::string token;
  while (std::getline(ss, token, ':')) {
    if (token == "identity") {
      params.thetas.push_back(symlin::SymMatrix::identity(p));
    } else if (token.rfind("chain", 0) == 0 && token.size() > 5) {
      std::size_t offset = 0;
      try {
        offset = std::stoul(token.substr(5));
      } catch (const std::exception&) {
        throw InvalidConfig("bad component '" + token + "' in scheme");
      }
      params.thetas.push_back(simulate::chain_precision(p, offset, 1.0, offdiag));
    } else {
      throw InvalidConfig("unknown component '" + token + "' (expected chainN or identity)");
    }
  }
  const std::size_t k = params.thetas.size();
  if (k == 0) throw InvalidConfig("empty scheme");
  std::vector<double> w = pi;
  if (k == 1 && w.size() <= 1) w = {1.0};
  if (w.size() + 1 == k) {
    double rest = 1.0;
    for (double v : w) rest -= v;
    w.push_back(rest);
  }
  if (w.size() != k)
    throw InvalidConfig(std::to_string(w.size()) + " proportions given for " + std::to_string(k) +
                        " components");
  params.pi = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(k));
  try {
    params.validate();
  } catch (const Error& e) {
    throw InvalidConfig(std::string("invalid mixture: ") + e.what());
  }
  return params;
}

void cmd_simulate(const SimulateConfig& cfg) {
  if (cfg.n < 2) throw InvalidConfig("--n must be >= 2");
  const auto params = scheme_params(cfg.scheme, cfg.p, cfg.pi, cfg.offdiag);
  const auto [data, truth] = simulate::sample_mixture(params, cfg.n, cfg.seed);
  io::write_file_atomic(cfg.data_out, io::to_csv(data, cfg.header));
  io::write_file_atomic(cfg.truth_out, io::truth_to_json(truth, cfg.n).dump(2) + "\n");
}

void cmd_fit(const FitConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (!fs::exists(cfg.data_in)) throw IoError("data file " + cfg.data_in.string() + " does not exist");
  if (cfg.k < 1) throw InvalidConfig("--k must be >= 1");
  const mixture::Dataset data = io::read_csv(cfg.data_in, cfg.header);

  const std::vector<double> grid =
      cfg.lambda ? std::vector<double>{*cfg.lambda}
                 : modelsel::lambda_grid(cfg.penalty, data.n(), data.p());
  const auto sel = modelsel::select_over(data, cfg.k, grid, cfg.penalty, cfg.em);
  const auto& fit = sel.chosen_fit;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["n"] = data.n();
  j["p"] = data.p();
  j["k"] = cfg.k;
  j["lambda_scheme"] = cfg.lambda ? std::string("fixed") : modelsel::to_string(cfg.penalty.scheme);
  j["c1"] = cfg.penalty.c1;
  j["c2"] = cfg.penalty.c2;
  j["gamma_ebic"] = cfg.penalty.gamma_ebic;
  j["penalized_ebic"] = cfg.penalty.penalized_ebic;
  j["center"] = cfg.em.center;
  j["seed"] = cfg.em.seed;
  j["restarts"] = cfg.em.restarts;
  j["chosen_lambda"] = sel.chosen_lambda;
  j["grid"] = sel.grid;
  j["ebic"] = sel.ebic_values;
  j["grid_failures"] = sel.failures;
  j["pi"] = std::vector<double>(fit.params.pi.data(), fit.params.pi.data() + fit.params.pi.size());
  json thetas = json::array();
  json edges = json::array();
  for (const auto& t : fit.params.thetas) {
    thetas.push_back(io::matrix_to_json(t));
    json e = json::array();
    for (const auto& [a, b] : metrics::edge_set(t)) e.push_back({a, b});
    edges.push_back(std::move(e));
  }
  j["thetas"] = std::move(thetas);
  j["edges"] = std::move(edges);
  j["loglik_trace"] = fit.loglik_trace;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["restart_index"] = fit.restart_index;
  j["glasso_unconverged"] = fit.glasso_unconverged;
  j["wall_clock_seconds"] = seconds;
  io::write_file_atomic(cfg.out, j.dump(2) + "\n");

  if (!cfg.dot_prefix.empty()) {
    for (std::size_t k = 0; k < fit.params.k(); ++k) {
      io::write_file_atomic(cfg.dot_prefix + std::to_string(k) + ".dot",
                            io::to_dot(fit.params.thetas[k], "cluster" + std::to_string(k)));
    }
  }
}

void cmd_eval(const EvalConfig& cfg) {
  for (const auto& path : {cfg.fit_in, cfg.truth_in})
    if (!fs::exists(path)) throw IoError("input file " + path.string() + " does not exist");
  json fit_json, truth_json;
  try {
    fit_json = json::parse(io::read_file(cfg.fit_in));
    truth_json = json::parse(io::read_file(cfg.truth_in));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), 0);
  }
  const auto est = io::params_from_json(fit_json);
  const auto truth = io::truth_from_json(truth_json).params;
  if (est.k() != truth.k() || est.p() != truth.p())
    throw DimensionMismatch("fit has K=" + std::to_string(est.k()) + ", p=" +
                            std::to_string(est.p()) + " but truth has K=" +
                            std::to_string(truth.k()) + ", p=" + std::to_string(truth.p()));
  const auto rec = metrics::evaluate(est, truth, metrics::kEdgeTolerance, cfg.ad_mode);
  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["ad_mode"] = cfg.ad_mode == metrics::AdMode::Max ? "max" : "mean";
  const json recovery = io::recovery_to_json(rec);
  for (const auto& [key, value] : recovery.items()) j[key] = value;
  io::write_file_atomic(cfg.out, j.dump(2) + "\n");
}

namespace {

struct Cell {
  modelsel::LambdaScheme scheme{};
  std::size_t n = 0;
  int rep = 0;
};

struct CellResult {
  bool ok = false;
  std::string failure;
  double chosen_lambda = 0.0;
  metrics::RecoveryReport recovery;
};

fs::path cell_path(const ReplicateConfig& cfg, const Cell& c) {
  fs::path dir = cfg.out_prefix;
  dir += "_cells";
  return dir / (modelsel::to_string(c.scheme) + "_n" + std::to_string(c.n) + "_rep" +
                std::to_string(c.rep) + ".json");
}

json cell_to_json(const Cell& c, const CellResult& r) {
  json j;
  j["schema_version"] = io::kSchemaVersion;
  j["scheme"] = modelsel::to_string(c.scheme);
  j["n"] = c.n;
  j["rep"] = c.rep;
  j["ok"] = r.ok;
  j["failure"] = r.failure;
  j["chosen_lambda"] = r.chosen_lambda;
  if (r.ok) j["metrics"] = io::recovery_to_json(r.recovery);
  return j;
}

CellResult cell_from_json(const json& j) {
  CellResult r;
  r.ok = j.at("ok").get<bool>();
  r.failure = j.value("failure", std::string{});
  r.chosen_lambda = j.value("chosen_lambda", 0.0);
  if (r.ok) {
    const auto& m = j.at("metrics");
    r.recovery.pi_ad = m.at("pi_ad").get<double>();
    r.recovery.alignment = m.at("alignment").get<std::vector<std::size_t>>();
    for (const auto& c : m.at("clusters")) {
      r.recovery.per_cluster.push_back(
          {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
           c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>(),
           c.at("precision").get<double>(), c.at("recall").get<double>(),
           c.at("f1").get<double>(), c.at("frobenius").get<double>()});
    }
  }
  return r;
}

CellResult run_cell(const ReplicateConfig& cfg, const mixture::MixtureParams& truth_params,
                    const Cell& c) {
  CellResult r;
  try {
    // The data stream ignores the scheme so both schemes see the same samples.
    const std::uint64_t data_seed =
        derive_seed(cfg.seed, {0x64617461ULL, c.n, static_cast<std::uint64_t>(c.rep)});
    const auto [data, truth] = simulate::sample_mixture(truth_params, c.n, data_seed);
    mixture::EmControl em = cfg.em;
    em.center = false;
    em.seed = derive_seed(cfg.seed, {0x666974ULL, static_cast<std::uint64_t>(c.scheme), c.n,
                                     static_cast<std::uint64_t>(c.rep)});
    modelsel::PenaltyConfig pen = cfg.penalty;
    pen.scheme = c.scheme;
    const auto sel = modelsel::select(data, truth_params.k(), pen, em);
    r.chosen_lambda = sel.chosen_lambda;
    r.recovery = metrics::evaluate(sel.chosen_fit.params, truth.params);
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.failure = e.what();
  }
  return r;
}

}  // namespace

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "scheme,n,cluster,reps_ok,reps_failed,ad,frobenius,f1,tp,fp,precision,recall\n";
  for (const auto& r : rows) {
    out += modelsel::to_string(r.scheme) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.cluster) + ',' + std::to_string(r.reps_ok) + ',' +
           std::to_string(r.reps_failed);
    for (double v : {r.ad, r.frobenius, r.f1, r.tp, r.fp, r.precision, r.recall})
      out += ',' + io::format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<SummaryRow> cmd_replicate(const ReplicateConfig& cfg) {
  if (cfg.reps < 1) throw InvalidConfig("--reps must be >= 1");
  if (cfg.ns.empty() || cfg.schemes.empty()) throw InvalidConfig("nothing to replicate");
  cfg.penalty.validate();
  const auto truth_params = simulate::two_chain_mixture(cfg.p, cfg.offdiag);
  const std::size_t k = truth_params.k();

  std::vector<Cell> cells;
  for (auto scheme : cfg.schemes)
    for (std::size_t n : cfg.ns)
      for (int rep = 0; rep < cfg.reps; ++rep) cells.push_back({scheme, n, rep});

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_error_mutex;
  std::string io_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const fs::path path = cell_path(cfg, cells[i]);
      if (cfg.resume && fs::exists(path)) {
        try {
          results[i] = cell_from_json(json::parse(io::read_file(path)));
          continue;
        } catch (const std::exception&) {
          // unreadable cell file: recompute it
        }
      }
      results[i] = run_cell(cfg, truth_params, cells[i]);
      try {
        io::write_file_atomic(path, cell_to_json(cells[i], results[i]).dump(2) + "\n");
      } catch (const Error& e) {
        std::lock_guard lock(io_error_mutex);
        io_error = e.what();
      }
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (!io_error.empty()) throw IoError(io_error);

  std::vector<SummaryRow> rows;
  json json_rows = json::array();
  std::size_t idx = 0;
  for (auto scheme : cfg.schemes) {
    for (std::size_t n : cfg.ns) {
      std::vector<SummaryRow> block(k);
      for (std::size_t c = 0; c < k; ++c) {
        block[c].scheme = scheme;
        block[c].n = n;
        block[c].cluster = c;
      }
      for (int rep = 0; rep < cfg.reps; ++rep, ++idx) {
        const auto& r = results[idx];
        for (std::size_t c = 0; c < k; ++c) {
          auto& row = block[c];
          if (!r.ok) {
            ++row.reps_failed;
            continue;
          }
          const auto& m = r.recovery.per_cluster[c];
          ++row.reps_ok;
          row.ad += r.recovery.pi_ad;
          row.frobenius += m.frobenius;
          row.f1 += m.f1;
          row.tp += static_cast<double>(m.tp);
          row.fp += static_cast<double>(m.fp);
          row.precision += m.precision;
          row.recall += m.recall;
        }
      }
      for (auto& row : block) {
        if (row.reps_ok > 0) {
          const double d = row.reps_ok;
          for (double* v : {&row.ad, &row.frobenius, &row.f1, &row.tp, &row.fp, &row.precision,
                            &row.recall})
            *v /= d;
        } else {
          for (double* v : {&row.ad, &row.frobenius, &row.f1, &row.tp, &row.fp, &row.precision,
                            &row.recall})
            *v = std::nan("");
        }
        json_rows.push_back({{"scheme", modelsel::to_string(row.scheme)},
                             {"n", row.n},
                             {"cluster", row.cluster},
                             {"reps_ok", row.reps_ok},
                             {"reps_failed", row.reps_failed},
                             {"ad", row.ad},
                             {"frobenius", row.frobenius},
                             {"f1", row.f1},
                             {"tp", row.tp},
                             {"fp", row.fp},
                             {"precision", row.precision},
                             {"recall", row.recall}});
        rows.push_back(row);
      }
    }
  }

  json summary;
  summary["schema_version"] = io::kSchemaVersion;
  summary["seed"] = cfg.seed;
  summary["reps"] = cfg.reps;
  summary["p"] = cfg.p;
  summary["k"] = k;
  summary["offdiag"] = cfg.offdiag;
  summary["c1"] = cfg.penalty.c1;
  summary["c2"] = cfg.penalty.c2;
  summary["grid_size"] = cfg.penalty.grid_size;
  summary["gamma_ebic"] = cfg.penalty.gamma_ebic;
  summary["restarts"] = cfg.em.restarts;
  summary["rows"] = std::move(json_rows);

  fs::path csv_path = cfg.out_prefix;
  csv_path += ".csv";
  fs::path json_path = cfg.out_prefix;
  json_path += ".json";
  io::write_file_atomic(csv_path, summary_csv(rows));
  io::write_file_atomic(json_path, summary.dump(2) + "\n");
  return rows;
}

namespace {

void add_em_options(CLI::App* cmd, mixture::EmControl& em, std::string& init) {
  cmd->add_option("--seed", em.seed, "Master seed")->envname("GGMM_SEED");
  cmd->add_option("--restarts", em.restarts, "EM restarts per lambda")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", em.max_iters, "EM iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", em.tol, "Relative penalized log-likelihood tolerance");
  cmd->add_option("--init", init, "Initialization: dirichlet or kmeans")
      ->check(CLI::IsMember({"dirichlet", "kmeans"}));
  cmd->add_option("--alpha", em.dirichlet_alpha, "Dirichlet concentration for random init");
  cmd->add_option("--glasso-max-sweeps", em.glasso.max_sweeps, "Glasso sweep cap");
  cmd->add_option("--glasso-tol", em.glasso.conv_tol, "Glasso convergence tolerance");
}

void add_penalty_options(CLI::App* cmd, modelsel::PenaltyConfig& pen) {
  cmd->add_option("--grid", pen.grid_size, "Lambda grid size")->check(CLI::PositiveNumber);
  cmd->add_option("--c1", pen.c1, "Lower grid multiplier");
  cmd->add_option("--c2", pen.c2, "Upper grid multiplier");
  cmd->add_option("--gamma-ebic", pen.gamma_ebic, "EBIC gamma");
  cmd->add_flag("--penalized-ebic", pen.penalized_ebic,
                "Score EBIC with the penalized log-likelihood");
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidConfig("cannot parse '" + tok + "' as a number");
    }
  }
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Sparse Gaussian graphical mixture models via penalized EM"};
  app.require_subcommand(1);

  SimulateConfig sim;
  std::string sim_pi = "0.5";
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a chain-structured Gaussian mixture");
  sim_cmd->add_option("--p", sim.p, "Number of variables")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--n", sim.n, "Number of observations");
  sim_cmd->add_option("--seed", sim.seed, "Seed")->envname("GGMM_SEED");
  sim_cmd->add_option("--scheme", sim.scheme, "Components, e.g. chain1:chain2");
  sim_cmd->add_option("--pi", sim_pi, "Comma separated mixing proportions");
  sim_cmd->add_option("--offdiag", sim.offdiag, "Band value of the chain precisions");
  sim_cmd->add_option("--out", sim.data_out, "Data CSV path");
  sim_cmd->add_option("--truth", sim.truth_out, "Truth JSON path");
  sim_cmd->add_flag("--header", sim.header, "Write a header row");

  FitConfig fit;
  fit.em.center = true;
  std::string fit_scheme = "nlogp";
  std::string fit_init = "dirichlet";
  double fit_lambda = -1.0;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a penalized mixture with EBIC lambda selection");
  fit_cmd->add_option("--data", fit.data_in, "Input CSV")->required();
  fit_cmd->add_flag("--header", fit.header, "Input has a header row");
  fit_cmd->add_option("--k", fit.k, "Number of components")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--lambda-scheme", fit_scheme, "nlogp or logp")
      ->check(CLI::IsMember({"nlogp", "logp"}));
  fit_cmd->add_option("--lambda", fit_lambda, "Fit one fixed lambda instead of a grid");
  add_penalty_options(fit_cmd, fit.penalty);
  add_em_options(fit_cmd, fit.em, fit_init);
  fit_cmd->add_flag("--center,!--no-center", fit.em.center, "Subtract column means (default on)");
  fit_cmd->add_option("--out", fit.out, "Fit JSON path");
  fit_cmd->add_option("--dot-prefix", fit.dot_prefix, "Write <prefix><k>.dot per cluster");

  EvalConfig ev;
  std::string ad_mode = "max";
  auto* eval_cmd = app.add_subcommand("eval", "Score a fit against the simulation truth");
  eval_cmd->add_option("--fit", ev.fit_in, "Fit JSON")->required();
  eval_cmd->add_option("--truth", ev.truth_in, "Truth JSON")->required();
  eval_cmd->add_option("--out", ev.out, "Metrics JSON path");
  eval_cmd->add_option("--ad", ad_mode, "AD aggregation: max or mean")
      ->check(CLI::IsMember({"max", "mean"}));

  ReplicateConfig rep;
  rep.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string rep_scheme = "both";
  std::string rep_ns = "100,300,800,2000,5000";
  std::string rep_init = "dirichlet";
  auto* rep_cmd = app.add_subcommand("replicate", "Run the sample-size sweep for both schemes");
  rep_cmd->add_option("--scheme", rep_scheme, "nlogp, logp or both")
      ->check(CLI::IsMember({"nlogp", "logp", "both"}));
  rep_cmd->add_option("--ns", rep_ns, "Comma separated sample sizes");
  rep_cmd->add_option("--reps", rep.reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  rep_cmd->add_option("--p", rep.p, "Number of variables")->check(CLI::PositiveNumber);
  add_penalty_options(rep_cmd, rep.penalty);
  add_em_options(rep_cmd, rep.em, rep_init);
  rep_cmd->add_option("--jobs", rep.jobs, "Concurrent cells")->check(CLI::PositiveNumber);
  rep_cmd->add_option("--out-prefix", rep.out_prefix, "Writes <prefix>.csv and <prefix>.json");
  rep_cmd->add_flag("--resume", rep.resume, "Reuse completed cells from <prefix>_cells/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim_cmd) {
      sim.pi = parse_number_list(sim_pi);
      cmd_simulate(sim);
    } else if (*fit_cmd) {
      fit.penalty.scheme = modelsel::parse_scheme(fit_scheme);
      fit.em.init = fit_init == "kmeans" ? mixture::InitPolicy::KMeans : mixture::InitPolicy::Dirichlet;
      if (fit_cmd->count("--lambda") > 0) {
        if (!(fit_lambda >= 0.0)) throw InvalidConfig("--lambda must be >= 0");
        fit.lambda = fit_lambda;
      }
      cmd_fit(fit);
    } else if (*eval_cmd) {
      ev.ad_mode = ad_mode == "mean" ? metrics::AdMode::Mean : metrics::AdMode::Max;
      cmd_eval(ev);
    } else if (*rep_cmd) {
      if (rep_scheme == "both")
        rep.schemes = {modelsel::LambdaScheme::NLogP, modelsel::LambdaScheme::LogP};
      else
        rep.schemes = {modelsel::parse_scheme(rep_scheme)};
      rep.ns.clear();
      for (double v : parse_number_list(rep_ns)) {
        if (!(v >= 2.0) || v != std::floor(v)) throw InvalidConfig("--ns entries must be integers >= 2");
        rep.ns.push_back(static_cast<std::size_t>(v));
      }
      rep.em.init = rep_init == "kmeans" ? mixture::InitPolicy::KMeans : mixture::InitPolicy::Dirichlet;
      cmd_replicate(rep);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ggmm::cli
