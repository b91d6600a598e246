#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "vds/common.hpp"

namespace vds {

// Dense complex matrix. Entries are exposed in row-major order through
// entry()/row(); storage is an Eigen matrix so products stay fast at the
// dimensions the toolkit targets (n <= 4096).
class DenseOperator {
 public:
  using Matrix = Eigen::MatrixXcd;

  DenseOperator() = default;
  DenseOperator(std::size_t rows, std::size_t cols);  // zero-initialised
  explicit DenseOperator(Matrix m);
  // Row-major entries; throws DimensionError on a size mismatch and
  // ArgumentError on non-finite values.
  DenseOperator(std::size_t rows, std::size_t cols, std::span<const Complex> row_major);

  static DenseOperator identity(std::size_t n);
  static DenseOperator from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(m_.cols()); }
  bool empty() const noexcept { return m_.size() == 0; }

  Complex entry(std::size_t i, std::size_t j) const { return m_(Eigen::Index(i), Eigen::Index(j)); }
  ComplexVector row(std::size_t i) const { return m_.row(Eigen::Index(i)).transpose(); }
  ComplexVector col(std::size_t j) const { return m_.col(Eigen::Index(j)); }

  const Matrix& matrix() const noexcept { return m_; }
  Matrix& matrix() noexcept { return m_; }

  DenseOperator adjoint() const { return DenseOperator(Matrix(m_.adjoint())); }
  ComplexVector apply(const ComplexVector& x) const;
  ComplexVector apply_adjoint(const ComplexVector& y) const;

  bool all_finite() const;

 private:
  Matrix m_;
};

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b);
DenseOperator kron(const DenseOperator& a, const DenseOperator& b);
// Stack row-blocks vertically; all blocks must share the column count.
DenseOperator vstack(std::span<const DenseOperator> blocks);

Real max_abs_entry(const DenseOperator::Matrix& m);
// max |(M*M - Id)_{ij}|
Real isometry_defect(const DenseOperator& m);

// max_i ||e_i^* M||_1
Real norm_inf_to_inf(const DenseOperator& m);
// max_j ||M e_j||_1
Real norm_1_to_1(const DenseOperator& m);
// max_j ||M e_j||_2
Real norm_1_to_2(const DenseOperator& m);

struct PowerIterationOptions {
  Real tol = 1e-12;
  // 0 selects the default cap max(10 * dim, 1000), dim being the side the
  // iteration runs on (min(rows, cols)).
  std::size_t max_iters = 0;
};

// Largest singular value by power iteration on the smaller Gram matrix with a
// deterministic start vector. Throws ConvergenceError (carrying the last
// iterate) when the relative change of the estimate does not drop below tol
// within the cap. Empty matrices have norm 0.
Real norm_2_to_2(const DenseOperator& m, Real tol);
Real norm_2_to_2(const DenseOperator& m, const PowerIterationOptions& opts);

// Exact ||M||_{2->2}^2 via a dense Hermitian eigensolve of the smaller Gram
// matrix. Used where coherence values must be tight to ~1e-12.
Real spectral_norm_squared_exact(const DenseOperator& m);

// Smallest singular value of a matrix with at least as many rows as columns.
Real sigma_min(const DenseOperator& m);

// M P_S^*: columns of M in ascending index order. Throws IndexError.
DenseOperator restrict_columns(const DenseOperator& m, const IndexSet& s);
// Rows of M in the given order (repetitions allowed).
DenseOperator select_rows(const DenseOperator& m, std::span<const std::size_t> ids);

// P_S x : entries of x on S.
ComplexVector restrict_vector(const ComplexVector& x, const IndexSet& s);
// P_S^* z : embed z (|S| entries) into length n.
ComplexVector embed(const ComplexVector& z, const IndexSet& s, std::size_t n);

struct SupportFit {
  ComplexVector x;  // full length, zero off S
  Real sigma_min = 0.0;
  Real sigma_max = 0.0;
};

// x_S = (A_S^* A_S)^{-1} A_S^* y by a Cholesky solve of the normal equations,
// without regularisation. Throws RankError when sigma_min(A_S) is below
// 1e-12 * sigma_max(A_S), ArgumentError when |S| > rows(A).
SupportFit least_squares_on_support(const DenseOperator& a, const IndexSet& s, const ComplexVector& y);

// Matrix-free map C^cols -> C^rows given by its action and adjoint action.
struct LinearMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::function<ComplexVector(const ComplexVector&)> apply;
  std::function<ComplexVector(const ComplexVector&)> adjoint;

  // Borrows `a`, which must outlive the map.
  static LinearMap borrow(const DenseOperator& a);
  // Dense columns M P_S^* built from |S| applications to unit vectors.
  DenseOperator columns(const IndexSet& s) const;
  DenseOperator to_dense() const;
};

// Largest singular value by power iteration on M^* M from a deterministic
// start; throws ConvergenceError like the dense version.
Real norm_2_to_2(const LinearMap& m, const PowerIterationOptions& opts);

}  // namespace vds
