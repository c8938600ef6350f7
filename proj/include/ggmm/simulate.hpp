#pragma once

#include "ggmm/mixture.hpp"
#include "ggmm/rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ggmm::simulate {

using symlin::SymMatrix;

struct SimTruth {
  mixture::MixtureParams params;
  std::vector<std::size_t> labels;
  std::uint64_t seed = 0;
};

/// Banded precision: `diag` on the diagonal, `offdiag` where |i - j| == offset,
/// zero elsewhere. An offset >= p leaves the band empty. Throws
/// NotPositiveDefinite if the result is not PD.
SymMatrix chain_precision(std::size_t p, std::size_t offset, double diag = 1.0,
                          double offdiag = -0.4);

/// Two equally weighted components with bands at offsets 1 and 2.
mixture::MixtureParams two_chain_mixture(std::size_t p, double offdiag = -0.4);

/// n draws from N(0, theta^{-1}): solves L' y = z with theta = L L'.
Eigen::MatrixXd sample_component(const SymMatrix& theta, std::size_t n, Rng& rng);

/// Labels drawn from pi, then each row from its component.
std::pair<mixture::Dataset, SimTruth> sample_mixture(const mixture::MixtureParams& params,
                                                     std::size_t n, std::uint64_t seed);

}  // namespace ggmm::simulate
