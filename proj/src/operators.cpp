#include "vds/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace vds {

namespace {

using Matrix = DenseOperator::Matrix;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_nonempty(const DenseOperator& m, const char* what) {
  if (m.empty()) throw DimensionError(std::string(what) + ": empty matrix");
}

// Deterministic, non-degenerate start vector for power iteration.
ComplexVector start_vector(Eigen::Index dim) {
  ComplexVector v(dim);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (Eigen::Index i = 0; i < dim; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
    v(i) = Complex(1.0 + u, 0.5 - u);
  }
  return v / v.norm();
}

}  // namespace

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols) : m_(Matrix::Zero(ix(rows), ix(cols))) {}

DenseOperator::DenseOperator(Matrix m) : m_(std::move(m)) {}

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols, std::span<const Complex> row_major)
    : m_(ix(rows), ix(cols)) {
  if (row_major.size() != rows * cols) throw DimensionError("entries length must equal rows * cols");
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Complex z = row_major[i * cols + j];
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ArgumentError("non-finite matrix entry");
      m_(ix(i), ix(j)) = z;
    }
  }
}

DenseOperator DenseOperator::identity(std::size_t n) { return DenseOperator(Matrix::Identity(ix(n), ix(n))); }

DenseOperator DenseOperator::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<Complex> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return DenseOperator(r, c, flat);
}

ComplexVector DenseOperator::apply(const ComplexVector& x) const {
  if (x.size() != m_.cols()) throw DimensionError("apply: vector length != cols");
  return m_ * x;
}

ComplexVector DenseOperator::apply_adjoint(const ComplexVector& y) const {
  if (y.size() != m_.rows()) throw DimensionError("apply_adjoint: vector length != rows");
  return m_.adjoint() * y;
}

bool DenseOperator::all_finite() const { return m_.allFinite(); }

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
  if (a.cols() != b.rows()) throw DimensionError("product: inner dimensions differ");
  return DenseOperator(Matrix(a.matrix() * b.matrix()));
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  const auto ar = a.matrix().rows(), ac = a.matrix().cols();
  const auto br = b.matrix().rows(), bc = b.matrix().cols();
  Matrix k(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i)
    for (Eigen::Index j = 0; j < ac; ++j) k.block(i * br, j * bc, br, bc) = a.matrix()(i, j) * b.matrix();
  return DenseOperator(std::move(k));
}

DenseOperator vstack(std::span<const DenseOperator> blocks) {
  if (blocks.empty()) return {};
  const auto cols = blocks.front().matrix().cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.matrix().cols() != cols) throw DimensionError("vstack: column counts differ");
    rows += b.matrix().rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.matrix().rows()) = b.matrix();
    r += b.matrix().rows();
  }
  return DenseOperator(std::move(out));
}

Real max_abs_entry(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Real isometry_defect(const DenseOperator& m) {
  Matrix g = m.matrix().adjoint() * m.matrix();
  g -= Matrix::Identity(g.rows(), g.cols());
  return max_abs_entry(g);
}

Real norm_inf_to_inf(const DenseOperator& m) {
  require_nonempty(m, "norm_inf_to_inf");
  return m.matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

Real norm_1_to_1(const DenseOperator& m) {
  require_nonempty(m, "norm_1_to_1");
  return m.matrix().cwiseAbs().colwise().sum().maxCoeff();
}

Real norm_1_to_2(const DenseOperator& m) {
  require_nonempty(m, "norm_1_to_2");
  return m.matrix().colwise().norm().maxCoeff();
}

// 10 * dim, floored at 1000: for tiny matrices with close top singular values
// 10 * dim steps cannot reach a tight tolerance.
static std::size_t default_power_cap(std::size_t dim) { return std::max<std::size_t>(10 * dim, 1000); }

Real norm_2_to_2(const DenseOperator& m, Real tol) { return norm_2_to_2(m, PowerIterationOptions{tol, 0}); }

Real norm_2_to_2(const DenseOperator& m, const PowerIterationOptions& opts) {
  if (!(opts.tol > 0)) throw ArgumentError("norm_2_to_2: tol must be positive");
  if (m.empty()) return 0.0;
  // Iterate on whichever Gram matrix is smaller; both share the top eigenvalue.
  const bool on_cols = m.cols() <= m.rows();
  const Matrix& a = m.matrix();
  const Eigen::Index dim = on_cols ? a.cols() : a.rows();
  const std::size_t cap = opts.max_iters ? opts.max_iters : default_power_cap(static_cast<std::size_t>(dim));

  ComplexVector v = start_vector(dim);
  Real lambda = 0.0;
  for (std::size_t it = 0; it < cap; ++it) {
    ComplexVector w = on_cols ? ComplexVector(a.adjoint() * (a * v)) : ComplexVector(a * (a.adjoint() * v));
    // Rayleigh quotient of the unit vector v.
    const Real next = std::max(0.0, v.dot(w).real());
    const Real wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(next - lambda) <= opts.tol * next) return std::sqrt(next);
    lambda = next;
  }
  throw ConvergenceError("norm_2_to_2: power iteration did not converge within " + std::to_string(cap) +
                             " iterations",
                         v);
}

Real spectral_norm_squared_exact(const DenseOperator& m) {
  if (m.empty()) return 0.0;
  const Matrix& a = m.matrix();
  if (std::min(a.rows(), a.cols()) == 1) return a.squaredNorm();
  Matrix g = a.cols() <= a.rows() ? Matrix(a.adjoint() * a) : Matrix(a * a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

Real sigma_min(const DenseOperator& m) {
  if (m.cols() == 0) return 0.0;
  if (m.rows() < m.cols()) return 0.0;
  Matrix g = m.matrix().adjoint() * m.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

DenseOperator restrict_columns(const DenseOperator& m, const IndexSet& s) {
  Matrix out(m.matrix().rows(), ix(s.size()));
  Eigen::Index c = 0;
  for (std::size_t j : s) {
    if (j >= m.cols()) throw IndexError("restrict_columns: index " + std::to_string(j) + " out of range");
    out.col(c++) = m.matrix().col(ix(j));
  }
  return DenseOperator(std::move(out));
}

DenseOperator select_rows(const DenseOperator& m, std::span<const std::size_t> ids) {
  Matrix out(ix(ids.size()), m.matrix().cols());
  Eigen::Index r = 0;
  for (std::size_t i : ids) {
    if (i >= m.rows()) throw IndexError("select_rows: index " + std::to_string(i) + " out of range");
    out.row(r++) = m.matrix().row(ix(i));
  }
  return DenseOperator(std::move(out));
}

ComplexVector restrict_vector(const ComplexVector& x, const IndexSet& s) {
  ComplexVector out(ix(s.size()));
  Eigen::Index k = 0;
  for (std::size_t i : s) {
    if (ix(i) >= x.size()) throw IndexError("restrict_vector: index out of range");
    out(k++) = x(ix(i));
  }
  return out;
}

ComplexVector embed(const ComplexVector& z, const IndexSet& s, std::size_t n) {
  if (static_cast<std::size_t>(z.size()) != s.size()) throw DimensionError("embed: |z| != |S|");
  ComplexVector out = ComplexVector::Zero(ix(n));
  Eigen::Index k = 0;
  for (std::size_t i : s) {
    if (i >= n) throw IndexError("embed: index out of range");
    out(ix(i)) = z(k++);
  }
  return out;
}

SupportFit least_squares_on_support(const DenseOperator& a, const IndexSet& s, const ComplexVector& y) {
  if (s.size() > a.rows()) throw ArgumentError("least_squares_on_support: |S| exceeds rows(A)");
  if (static_cast<std::size_t>(y.size()) != a.rows()) throw DimensionError("least_squares_on_support: |y| != rows(A)");
  SupportFit fit;
  fit.x = ComplexVector::Zero(ix(a.cols()));
  if (s.empty()) return fit;

  const DenseOperator as = restrict_columns(a, s);
  const Matrix gram = as.matrix().adjoint() * as.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  fit.sigma_min = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
  fit.sigma_max = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  if (!(fit.sigma_min > 1e-12 * fit.sigma_max)) throw RankError("least_squares_on_support: A_S is rank deficient");

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw RankError("least_squares_on_support: Cholesky factorisation failed");
  const ComplexVector xs = llt.solve(as.matrix().adjoint() * y);
  fit.x = embed(xs, s, a.cols());
  return fit;
}

LinearMap LinearMap::borrow(const DenseOperator& a) {
  LinearMap m;
  m.rows = a.rows();
  m.cols = a.cols();
  const Matrix* p = &a.matrix();
  m.apply = [p](const ComplexVector& x) { return ComplexVector(*p * x); };
  m.adjoint = [p](const ComplexVector& y) { return ComplexVector(p->adjoint() * y); };
  return m;
}

DenseOperator LinearMap::columns(const IndexSet& s) const {
  Matrix out(ix(rows), ix(s.size()));
  ComplexVector e = ComplexVector::Zero(ix(cols));
  Eigen::Index c = 0;
  for (std::size_t j : s) {
    if (j >= cols) throw IndexError("LinearMap::columns: index " + std::to_string(j) + " out of range");
    e(ix(j)) = 1.0;
    out.col(c++) = apply(e);
    e(ix(j)) = 0.0;
  }
  return DenseOperator(std::move(out));
}

DenseOperator LinearMap::to_dense() const { return columns(IndexSet::range(0, cols)); }

Real norm_2_to_2(const LinearMap& m, const PowerIterationOptions& opts) {
  if (!(opts.tol > 0)) throw ArgumentError("norm_2_to_2: tol must be positive");
  if (m.rows == 0 || m.cols == 0) return 0.0;
  const std::size_t cap = opts.max_iters ? opts.max_iters : default_power_cap(m.cols);
  ComplexVector v = start_vector(ix(m.cols));
  Real lambda = 0.0;
  for (std::size_t it = 0; it < cap; ++it) {
    ComplexVector w = m.adjoint(m.apply(v));
    const Real next = std::max(0.0, v.dot(w).real());
    const Real wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 0 && std::abs(next - lambda) <= opts.tol * next) return std::sqrt(next);
    lambda = next;
  }
  throw ConvergenceError("norm_2_to_2: power iteration did not converge within " + std::to_string(cap) + " iterations",
                         v);
}

}  // namespace vds
