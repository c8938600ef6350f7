#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>

namespace ggmm::symlin {

/// Cholesky pivots (squared diagonal of L) below this value are treated as
/// loss of positive definiteness.
inline constexpr double kPivotTolerance = 1e-12;

/// Dense symmetric matrix. Every write is mirrored, so (i,j) == (j,i) holds
/// exactly at all times.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  /// Adopts a dense matrix. Throws InvalidInput if it is not square or if
  /// the two triangles disagree beyond `tol` (relative to the largest entry);
  /// the upper triangle wins.
  static SymMatrix from_dense(const Eigen::MatrixXd& m, double tol = 1e-10);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::initializer_list<double> diag);
  static SymMatrix diagonal(const Eigen::VectorXd& diag);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const Eigen::MatrixXd& dense() const noexcept { return m_; }

  /// Elementwise absolute sum, diagonal included.
  double l1_norm() const { return m_.cwiseAbs().sum(); }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Eigen::MatrixXd m_;
};

/// Lower-triangular L with L * L^T equal to the factored matrix.
struct LowerTriangularFactor {
  Eigen::MatrixXd l;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(l.rows()); }
  Eigen::MatrixXd reconstruct() const { return l * l.transpose(); }
};

/// Throws NotPositiveDefinite when any pivot is below kPivotTolerance.
LowerTriangularFactor cholesky(const SymMatrix& a);

/// ln|a| = 2 * sum(ln L_ii).
double log_det(const SymMatrix& a);
double log_det(const LowerTriangularFactor& f);

SymMatrix inverse(const SymMatrix& a);
SymMatrix inverse(const LowerTriangularFactor& f);

bool is_positive_definite(const SymMatrix& a);

/// tr(a * b) without forming the product.
double trace_product(const SymMatrix& a, const SymMatrix& b);

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace ggmm::symlin
