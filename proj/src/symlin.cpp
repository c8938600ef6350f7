#include "ggmm/symlin.hpp"

#include "ggmm/errors.hpp"

#include <cmath>
#include <string>

namespace ggmm::symlin {

SymMatrix::SymMatrix(std::size_t dim) : m_(Eigen::MatrixXd::Zero(dim, dim)) {
  if (dim == 0) throw InvalidInput("SymMatrix dimension must be >= 1");
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw InvalidInput("SymMatrix literal must be square");
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  *this = from_dense(m);
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw InvalidInput("SymMatrix requires a non-empty square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw InvalidInput("matrix is not symmetric");
  SymMatrix out;
  out.m_ = m.triangularView<Eigen::Upper>();
  out.m_.triangularView<Eigen::StrictlyLower>() = m.transpose();
  return out;
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix out(dim);
  out.m_.setIdentity();
  return out;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(diag.size()));
  Eigen::Index i = 0;
  for (double v : diag) d(i++) = v;
  return diagonal(d);
}

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& diag) {
  SymMatrix out(static_cast<std::size_t>(diag.size()));
  out.m_.diagonal() = diag;
  return out;
}

LowerTriangularFactor cholesky(const SymMatrix& a) {
  const auto& m = a.dense();
  const Eigen::Index n = m.rows();
  LowerTriangularFactor f{Eigen::MatrixXd::Zero(n, n)};
  auto& l = f.l;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot >= kPivotTolerance))
      throw NotPositiveDefinite("Cholesky pivot " + std::to_string(pivot) + " at index " +
                                std::to_string(j));
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i)
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
  }
  return f;
}

double log_det(const LowerTriangularFactor& f) {
  return 2.0 * f.l.diagonal().array().log().sum();
}

double log_det(const SymMatrix& a) { return log_det(cholesky(a)); }

SymMatrix inverse(const LowerTriangularFactor& f) {
  const Eigen::Index n = f.l.rows();
  // L^{-1} by forward substitution, then inv = L^{-T} L^{-1}.
  Eigen::MatrixXd linv = f.l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd inv = linv.transpose() * linv;
  return SymMatrix::from_dense(0.5 * (inv + inv.transpose()));
}

SymMatrix inverse(const SymMatrix& a) { return inverse(cholesky(a)); }

bool is_positive_definite(const SymMatrix& a) {
  try {
    (void)cholesky(a);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

double trace_product(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("trace_product dimension mismatch");
  return a.dense().cwiseProduct(b.dense()).sum();
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("max_abs_diff dimension mismatch");
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ggmm::symlin
