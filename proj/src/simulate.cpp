#include "ggmm/simulate.hpp"

#include "ggmm/errors.hpp"

#include <cstdlib>
#include <random>

namespace ggmm::simulate {

SymMatrix chain_precision(std::size_t p, std::size_t offset, double diag, double offdiag) {
  if (p < 1) throw InvalidInput("chain precision needs p >= 1");
  if (offset < 1) throw InvalidInput("chain offset must be >= 1");
  SymMatrix m(p);
  for (std::size_t i = 0; i < p; ++i) {
    m.set(i, i, diag);
    if (i + offset < p) m.set(i, i + offset, offdiag);
  }
  if (!symlin::is_positive_definite(m))
    throw NotPositiveDefinite("chain precision with diag " + std::to_string(diag) + " and band " +
                              std::to_string(offdiag) + " is not positive definite");
  return m;
}

mixture::MixtureParams two_chain_mixture(std::size_t p, double offdiag) {
  mixture::MixtureParams params;
  params.pi = Eigen::Vector2d(0.5, 0.5);
  params.thetas = {chain_precision(p, 1, 1.0, offdiag), chain_precision(p, 2, 1.0, offdiag)};
  return params;
}

namespace {

void fill_rows(const symlin::LowerTriangularFactor& chol, Rng& rng, Eigen::MatrixXd& out,
               Eigen::Index row) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index p = chol.l.rows();
  Eigen::VectorXd z(p);
  for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
  out.row(row) = chol.l.transpose().triangularView<Eigen::Upper>().solve(z).transpose();
}

}  // namespace

Eigen::MatrixXd sample_component(const SymMatrix& theta, std::size_t n, Rng& rng) {
  const auto chol = symlin::cholesky(theta);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(theta.dim()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) fill_rows(chol, rng, out, i);
  return out;
}

std::pair<mixture::Dataset, SimTruth> sample_mixture(const mixture::MixtureParams& params,
                                                     std::size_t n, std::uint64_t seed) {
  params.validate();
  std::vector<symlin::LowerTriangularFactor> factors;
  for (const auto& t : params.thetas) factors.push_back(symlin::cholesky(t));

  Rng rng(seed);
  std::discrete_distribution<std::size_t> component(params.pi.data(),
                                                    params.pi.data() + params.pi.size());
  SimTruth truth{params, std::vector<std::size_t>(n), seed};
  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(params.p()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = component(rng);
    truth.labels[i] = c;
    fill_rows(factors[c], rng, y, static_cast<Eigen::Index>(i));
  }
  return {mixture::Dataset(std::move(y)), std::move(truth)};
}

}  // namespace ggmm::simulate
