#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ggmm/errors.hpp"
#include "ggmm/evalmetrics.hpp"
#include "ggmm/mixture.hpp"
#include "ggmm/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ggmm;
using mixture::Dataset;
using mixture::MixtureParams;
using mixture::Responsibilities;
using symlin::SymMatrix;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Dataset column(std::initializer_list<double> values) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) y(i++, 0) = v;
  return Dataset(y);
}

MixtureParams params_of(std::initializer_list<double> pi, std::vector<SymMatrix> thetas) {
  MixtureParams m;
  m.pi.resize(static_cast<Eigen::Index>(pi.size()));
  Eigen::Index i = 0;
  for (double v : pi) m.pi(i++) = v;
  m.thetas = std::move(thetas);
  return m;
}

Dataset gaussian_rows(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd y(n, p);
  for (auto& v : y.reshaped()) v = z(rng);
  return Dataset(y);
}

// Direct evaluation of the normal density without logs, for well-conditioned inputs.
double density(const Eigen::VectorXd& y, const SymMatrix& theta) {
  const double det = theta.dense().determinant();
  const double p = static_cast<double>(y.size());
  return std::pow(2.0 * std::numbers::pi, -p / 2.0) * std::sqrt(det) *
         std::exp(-0.5 * y.dot(theta.dense() * y));
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Zero(1, 3)), InvalidInput);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset{bad}, InvalidInput);
  const Dataset c = gaussian_rows(50, 3, 1).centered();
  CHECK(c.rows().colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("log_component_density examples") {
  const auto one = SymMatrix::identity(1);
  CHECK(mixture::log_component_density(Eigen::VectorXd::Zero(1), one) == doctest::Approx(-kHalfLog2Pi));
  CHECK(mixture::log_component_density(Eigen::VectorXd::Ones(1), one) == doctest::Approx(-1.4189385332046727));
  CHECK(mixture::log_component_density(Eigen::VectorXd::Ones(2), SymMatrix::identity(2)) ==
        doctest::Approx(-2.8378770664093453));
  CHECK_THROWS_AS(mixture::log_component_density(Eigen::VectorXd::Ones(2), SymMatrix{{1, 2}, {2, 1}}),
                  NotPositiveDefinite);
}

TEST_CASE("batched densities agree with the single-observation path") {
  const Dataset d = gaussian_rows(20, 4, 9);
  const SymMatrix t = simulate::chain_precision(4, 1);
  const Eigen::VectorXd batch = mixture::log_component_densities(d, t);
  for (Eigen::Index i = 0; i < 20; ++i)
    CHECK(batch(i) == doctest::Approx(mixture::log_component_density(d.rows().row(i).transpose(), t)));
}

TEST_CASE("e_step examples") {
  const Dataset d = gaussian_rows(10, 2, 4);
  const auto single = mixture::e_step(d, params_of({1.0}, {SymMatrix::identity(2)}));
  CHECK((single.omega.array() == 1.0).all());

  const auto t = simulate::chain_precision(2, 1);
  const auto same = mixture::e_step(d, params_of({0.5, 0.5}, {t, t}));
  CHECK((same.omega.array() - 0.5).abs().maxCoeff() < 1e-15);

  // densities at zero scale with sqrt(theta): 1 : 2
  const auto r = mixture::e_step(column({0.0, 0.0}),
                                 params_of({0.5, 0.5}, {SymMatrix{{1.0}}, SymMatrix{{4.0}}}));
  CHECK(r.omega(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(r.omega(0, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("property: e_step rows sum to one and match direct evaluation") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + trial % 3;
    const std::size_t p = 2 + trial % 3;
    const Dataset d = gaussian_rows(30, p, 100 + trial);
    MixtureParams m;
    m.pi.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
      m.pi(static_cast<Eigen::Index>(c)) = u(rng);
      m.thetas.push_back(simulate::chain_precision(p, 1 + c % (p - 1), 1.0 + 0.3 * c, -0.3));
    }
    m.pi /= m.pi.sum();
    const auto r = mixture::e_step(d, m);
    for (Eigen::Index i = 0; i < 30; ++i) {
      CHECK(std::abs(r.omega.row(i).sum() - 1.0) <= 1e-12);
      Eigen::VectorXd direct(static_cast<Eigen::Index>(k));
      for (std::size_t c = 0; c < k; ++c)
        direct(static_cast<Eigen::Index>(c)) =
            m.pi(static_cast<Eigen::Index>(c)) * density(d.rows().row(i).transpose(), m.thetas[c]);
      direct /= direct.sum();
      CHECK((direct - r.omega.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("e_step survives observations far in the tails") {
  // direct masses underflow to zero here; the log domain path does not
  const Dataset d = column({60.0, -60.0, 0.0});
  const auto r = mixture::e_step(d, params_of({0.5, 0.5}, {SymMatrix{{1.0}}, SymMatrix{{2.0}}}));
  CHECK(r.omega(0, 0) > 0.999);
  CHECK(std::abs(r.omega.row(0).sum() - 1.0) < 1e-12);
}

TEST_CASE("m_step_pi examples and collapse") {
  Responsibilities r1{Eigen::MatrixXd(2, 2)};
  r1.omega << 1, 0, 0, 1;
  CHECK(mixture::m_step_pi(r1)(0) == 0.5);  // exactly at the floor of 1.0
  r1.omega << 1, 0, 0.5, 0.5;
  CHECK_THROWS_AS(mixture::m_step_pi(r1), ClusterCollapse);

  Responsibilities r2{Eigen::MatrixXd(4, 2)};
  r2.omega << 1, 0, 0, 1, 1, 0, 0, 1;
  const auto pi2 = mixture::m_step_pi(r2);
  CHECK(pi2(0) == doctest::Approx(0.5));

  Responsibilities r3{Eigen::MatrixXd(10, 2)};
  r3.omega.col(0).setConstant(0.3);
  r3.omega.col(1).setConstant(0.7);
  const auto pi3 = mixture::m_step_pi(r3);
  CHECK(pi3(0) == doctest::Approx(0.3));
  CHECK(pi3(1) == doctest::Approx(0.7));

  Responsibilities r4{Eigen::MatrixXd(3, 2)};
  r4.omega << 0.9, 0.1, 0.5, 0.5, 0.1, 0.9;
  const auto pi4 = mixture::m_step_pi(r4);
  CHECK(pi4(0) == doctest::Approx(0.5));
  CHECK(std::abs(pi4.sum() - 1.0) <= 1e-12);
}

TEST_CASE("property: m_step_pi stays on the simplex") {
  std::mt19937_64 rng(12);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + trial % 4;
    Responsibilities r{Eigen::MatrixXd(200, static_cast<Eigen::Index>(k))};
    for (Eigen::Index i = 0; i < 200; ++i) {
      for (auto& v : r.omega.row(i)) v = g(rng) + 1e-3;
      r.omega.row(i) /= r.omega.row(i).sum();
    }
    const auto pi = mixture::m_step_pi(r);
    CHECK(std::abs(pi.sum() - 1.0) <= 1e-12);
    CHECK((pi.array() >= 0.0).all());
  }
}

TEST_CASE("weighted_covariance examples") {
  const Dataset d = gaussian_rows(40, 3, 21);
  const Responsibilities ones{Eigen::MatrixXd::Ones(40, 1)};
  const Eigen::MatrixXd moment = d.rows().transpose() * d.rows() / 40.0;
  CHECK(symlin::max_abs_diff(mixture::weighted_covariance(d, ones, 0).dense(), moment) <= 1e-12);

  Eigen::MatrixXd two(2, 2);
  two << 1.0, 2.0, 3.0, 4.0;
  Responsibilities w{Eigen::MatrixXd(2, 2)};
  w.omega << 1.0, 0.0, 0.0, 1.0;
  const auto aa = mixture::weighted_covariance(Dataset(two), w, 0);
  CHECK(aa(0, 0) == doctest::Approx(1.0));
  CHECK(aa(0, 1) == doctest::Approx(2.0));
  CHECK(aa(1, 1) == doctest::Approx(4.0));

  Eigen::MatrixXd unit(2, 2);
  unit << 1.0, 0.0, 0.0, 1.0;
  Responsibilities half{Eigen::MatrixXd::Constant(2, 1, 0.5)};
  const auto s = mixture::weighted_covariance(Dataset(unit), half, 0);
  CHECK(symlin::max_abs_diff(s.dense(), 0.5 * Eigen::MatrixXd::Identity(2, 2)) < 1e-15);

  Responsibilities zero{Eigen::MatrixXd::Zero(2, 1)};
  CHECK_THROWS_AS(mixture::weighted_covariance(Dataset(unit), zero, 0), ClusterCollapse);
}

TEST_CASE("m_step_theta scales the penalty by the component mass") {
  CHECK(mixture::effective_lambda(1.0, 2.0) == 1.0);
  const Dataset d = gaussian_rows(200, 3, 5);
  const Responsibilities ones{Eigen::MatrixXd::Ones(200, 1)};
  const auto s = mixture::weighted_covariance(d, ones, 0);
  const auto mle = mixture::m_step_theta(s, 200.0, 0.0, {});
  CHECK(symlin::max_abs_diff(mle.theta.dense(), symlin::inverse(s).dense()) < 1e-6);

  glasso::GlassoConfig direct;
  direct.lambda = 1.0;
  const auto a = mixture::m_step_theta(s, 2.0, 1.0, {});
  const auto b = glasso::glasso_fit(s, direct);
  CHECK(a.theta == b.theta);
}

TEST_CASE("penalized_loglik examples") {
  const auto m = params_of({1.0}, {SymMatrix{{1.0}}});
  CHECK(mixture::penalized_loglik(column({0.0, 0.0}), m, 0.0) == doctest::Approx(-2.0 * kHalfLog2Pi));
  // data {0} alone is not a valid Dataset (n >= 2), so the single-point values
  // are checked through the per-point term
  CHECK(mixture::penalized_loglik(column({0.0, 0.0}), m, 0.0) / 2.0 == doctest::Approx(-0.9189385332));
  CHECK(mixture::penalized_loglik(column({0.0, 0.0}), m, 1.0) ==
        doctest::Approx(2.0 * -0.9189385332 - 1.0));

  // K = 2 toy instance against a hand expansion of each term
  const Dataset d = column({0.5, -1.0, 2.0});
  const auto two = params_of({0.3, 0.7}, {SymMatrix{{1.0}}, SymMatrix{{0.25}}});
  double expected = 0.0;
  for (double y : {0.5, -1.0, 2.0}) {
    const double f1 = std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
    const double f2 = std::sqrt(0.25) * std::exp(-0.5 * 0.25 * y * y) / std::sqrt(2.0 * std::numbers::pi);
    expected += std::log(0.3 * f1 + 0.7 * f2);
  }
  expected -= 0.5 * (1.0 + 0.25);
  CHECK(mixture::penalized_loglik(d, two, 0.5) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("em_fit with one component is a single glasso fit") {
  const Dataset d = gaussian_rows(300, 4, 17);
  mixture::EmControl ctrl;
  ctrl.restarts = 2;
  const auto rep = mixture::em_fit(d, 1, 0.5, ctrl);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);
  CHECK(rep.params.pi(0) == 1.0);
  glasso::GlassoConfig g;
  g.lambda = 2.0 * 0.5 / 300.0;
  const auto direct = glasso::glasso_fit(
      mixture::weighted_covariance(d, Responsibilities{Eigen::MatrixXd::Ones(300, 1)}, 0), g);
  CHECK(symlin::max_abs_diff(rep.params.thetas[0].dense(), direct.theta.dense()) < 1e-12);
}

TEST_CASE("em_fit separates two 1-D variance components") {
  // theta = 1 vs theta = 100 with equal weight
  const auto truth = params_of({0.5, 0.5}, {SymMatrix{{1.0}}, SymMatrix{{100.0}}});
  const auto [data, sim] = simulate::sample_mixture(truth, 2000, 4242);
  mixture::EmControl ctrl;
  ctrl.seed = 7;
  const auto rep = mixture::em_fit(data, 2, 0.5, ctrl);
  const auto perm = metrics::align_clusters(rep.params, truth);
  CHECK(metrics::pi_ad(rep.params.pi, truth.pi, perm) <= 0.05);
  CHECK(rep.params.pi(0) >= rep.params.pi(1));  // descending order
}

TEST_CASE("property: EM ascent and responsibility invariants across seeds") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t p = seed % 2 ? 3 : 6;
    const auto truth = simulate::two_chain_mixture(p);
    const auto [data, sim] = simulate::sample_mixture(truth, 300, 50 + seed);
    mixture::EmControl ctrl;
    ctrl.seed = seed;
    ctrl.restarts = 2;
    ctrl.init = seed % 3 == 0 ? mixture::InitPolicy::KMeans : mixture::InitPolicy::Dirichlet;
    const auto rep = mixture::em_fit(data, 2, 1.0, ctrl);
    for (std::size_t t = 1; t < rep.loglik_trace.size(); ++t)
      CHECK(rep.loglik_trace[t] >= rep.loglik_trace[t - 1] - 1e-6);
    CHECK((rep.responsibilities.omega.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    rep.params.validate();
  }
}

TEST_CASE("em_fit is deterministic for a fixed seed") {
  const auto truth = simulate::two_chain_mixture(5);
  const auto [data, sim] = simulate::sample_mixture(truth, 200, 3);
  mixture::EmControl ctrl;
  ctrl.seed = 99;
  ctrl.restarts = 3;
  const auto a = mixture::em_fit(data, 2, 1.0, ctrl);
  const auto b = mixture::em_fit(data, 2, 1.0, ctrl);
  CHECK(a.loglik_trace == b.loglik_trace);
  CHECK(a.params.thetas[0] == b.params.thetas[0]);
  CHECK(a.restart_index == b.restart_index);
}

TEST_CASE("em_fit reports collapse when every restart collapses") {
  // 3 points cannot support 3 components above the floor of 1.0 each for long
  Eigen::MatrixXd y(3, 1);
  y << 0.1, 0.2, 0.3;
  mixture::EmControl ctrl;
  ctrl.restarts = 2;
  CHECK_THROWS_AS(mixture::em_fit(Dataset(y), 3, 0.1, ctrl), ClusterCollapse);
  CHECK_THROWS_AS(mixture::em_fit(Dataset(y), 0, 0.1, ctrl), InvalidInput);
}

TEST_CASE("centering flag removes column means before fitting") {
  Eigen::MatrixXd y = gaussian_rows(200, 3, 8).rows();
  y.rowwise() += Eigen::RowVector3d(5.0, -3.0, 2.0);
  mixture::EmControl ctrl;
  ctrl.restarts = 1;
  ctrl.center = true;
  const auto centered = mixture::em_fit(Dataset(y), 1, 0.1, ctrl);
  ctrl.center = false;
  const auto manual = mixture::em_fit(Dataset(y).centered(), 1, 0.1, ctrl);
  CHECK(symlin::max_abs_diff(centered.params.thetas[0].dense(), manual.params.thetas[0].dense()) < 1e-12);
}
