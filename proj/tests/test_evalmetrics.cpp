#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ggmm/errors.hpp"
#include "ggmm/evalmetrics.hpp"
#include "ggmm/simulate.hpp"

#include <cmath>
#include <random>

using namespace ggmm;
using metrics::EdgeSet;
using symlin::SymMatrix;

TEST_CASE("edge_set examples") {
  CHECK(metrics::edge_set(SymMatrix::identity(5)).empty());
  CHECK(metrics::edge_set(simulate::chain_precision(5, 1)) == EdgeSet{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(metrics::edge_set(simulate::chain_precision(5, 2)) == EdgeSet{{0, 2}, {1, 3}, {2, 4}});
}

TEST_CASE("confusion and rates") {
  const EdgeSet truth{{0, 1}, {1, 2}, {2, 3}};
  const auto self = metrics::confusion(truth, truth, 5);
  CHECK(self.fp == 0);
  CHECK(self.fn == 0);
  CHECK(self.f1() == 1.0);

  CHECK(metrics::precision(5, 5) == 0.5);
  CHECK(metrics::f1(0.4444, 1.0) == doctest::Approx(0.6153).epsilon(5e-4 / 0.6153));
  CHECK(metrics::precision(0, 0) == 0.0);
  CHECK(metrics::recall(0, 0) == 0.0);
  CHECK(metrics::f1(0.0, 0.0) == 0.0);

  CHECK_THROWS_AS(metrics::confusion(EdgeSet{{0, 7}}, truth, 5), InvalidInput);
}

TEST_CASE("property: confusion partitions all pairs; f1 uses est as prediction") {
  std::mt19937_64 rng(6);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 2 + trial % 12;
    EdgeSet a, b;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) {
        if (coin(rng)) a.emplace(i, j);
        if (coin(rng)) b.emplace(i, j);
      }
    const auto ab = metrics::confusion(a, b, p);
    const auto ba = metrics::confusion(b, a, p);
    CHECK(ab.tp + ab.fp + ab.fn + ab.tn == p * (p - 1) / 2);
    CHECK(ab.tp == ba.tp);
    CHECK(ab.fp == ba.fn);
    CHECK(ab.precision() == ba.recall());
    CHECK(ab.recall() == ba.precision());
    CHECK(ab.f1() == doctest::Approx(ba.f1()));
    for (double r : {ab.precision(), ab.recall(), ab.f1()}) CHECK((r >= 0.0 && r <= 1.0));
  }
}

TEST_CASE("frobenius_error examples") {
  const SymMatrix t = simulate::chain_precision(4, 1);
  CHECK(metrics::frobenius_error(t, t) == 0.0);
  SymMatrix shifted = SymMatrix::identity(2);
  shifted.set(0, 0, 2.0);
  shifted.set(1, 1, 2.0);
  CHECK(metrics::frobenius_error(shifted, SymMatrix::identity(2)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(metrics::frobenius_error(SymMatrix::identity(2), SymMatrix{{2, 1}, {1, 2}}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(metrics::frobenius_error(SymMatrix::identity(2), SymMatrix::identity(3)), DimensionMismatch);
}

TEST_CASE("pi_ad examples") {
  const Eigen::Vector2d half(0.5, 0.5);
  CHECK(metrics::pi_ad(half, half) == 0.0);
  CHECK(metrics::pi_ad(Eigen::Vector2d(0.55, 0.45), half) == doctest::Approx(0.05));
  CHECK(metrics::pi_ad(Eigen::Vector2d(0.55, 0.45), Eigen::Vector2d(0.5, 0.5), metrics::AdMode::Mean) ==
        doctest::Approx(0.05));
  CHECK(metrics::pi_ad(Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.6, 0.4)) ==
        metrics::pi_ad(Eigen::Vector2d(0.7, 0.3), Eigen::Vector2d(0.4, 0.6)));
  CHECK_THROWS_AS(metrics::pi_ad(half, Eigen::Vector3d(0.2, 0.3, 0.5)), DimensionMismatch);
}

TEST_CASE("property: pi_ad is invariant to a shared permutation") {
  std::mt19937_64 rng(10);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d a, b;
    for (int i = 0; i < 3; ++i) {
      a(i) = g(rng);
      b(i) = g(rng);
    }
    a /= a.sum();
    b /= b.sum();
    const Eigen::Vector3d ap(a(2), a(0), a(1)), bp(b(2), b(0), b(1));
    CHECK(metrics::pi_ad(a, b) == metrics::pi_ad(ap, bp));
  }
}

TEST_CASE("align_clusters") {
  const auto truth = simulate::two_chain_mixture(6);
  CHECK(metrics::align_clusters(truth, truth) == std::vector<std::size_t>{0, 1});

  mixture::MixtureParams swapped;
  swapped.pi = Eigen::Vector2d(0.5, 0.5);
  swapped.thetas = {truth.thetas[1], truth.thetas[0]};
  CHECK(metrics::align_clusters(swapped, truth) == std::vector<std::size_t>{1, 0});

  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 0.01);
  for (auto& t : swapped.thetas)
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = i; j < 6; ++j) t.set(i, j, t(i, j) + z(rng));
  CHECK(metrics::align_clusters(swapped, truth) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("property: align_clusters(x, x) is the identity") {
  for (std::size_t k = 1; k <= 4; ++k) {
    mixture::MixtureParams m;
    m.pi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1.0 / double(k));
    for (std::size_t c = 0; c < k; ++c) m.thetas.push_back(simulate::chain_precision(6, c + 1, 1.0 + 0.1 * c));
    std::vector<std::size_t> id(k);
    std::iota(id.begin(), id.end(), 0);
    CHECK(metrics::align_clusters(m, m) == id);
  }
  // identical components tie; the lexicographically first permutation wins
  mixture::MixtureParams twins;
  twins.pi = Eigen::Vector2d(0.5, 0.5);
  twins.thetas = {SymMatrix::identity(3), SymMatrix::identity(3)};
  CHECK(metrics::align_clusters(twins, twins) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("evaluate on the truth itself") {
  const auto truth = simulate::two_chain_mixture(10);
  const auto r = metrics::evaluate(truth, truth);
  CHECK(r.pi_ad == 0.0);
  for (const auto& c : r.per_cluster) {
    CHECK(c.f1 == 1.0);
    CHECK(c.frobenius == 0.0);
  }
  CHECK(r.per_cluster[0].tp == 9);
  CHECK(r.per_cluster[1].tp == 8);
}
