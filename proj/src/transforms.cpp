#include "vds/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace vds {

namespace {

using Matrix = DenseOperator::Matrix;

std::size_t level_size(std::size_t j) { return std::size_t{1} << std::max<std::size_t>(1, j); }

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t dyadic_depth(std::size_t n) {
  if (n < 2 || !is_power_of_two(n)) throw ArgumentError("dimension " + std::to_string(n) + " is not 2^(J+1), J >= 0");
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  return log2n - 1;
}

SubbandPartition::SubbandPartition(std::size_t n, PartitionKind kind) : n_(n), kind_(kind), level_of_(n) {
  const std::size_t depth = dyadic_depth(n);
  std::size_t first = 0;
  for (std::size_t j = 0; j <= depth; ++j) {
    const std::size_t last = first + level_size(j);
    levels_.push_back(IndexSet::range(first, last));
    for (std::size_t k = first; k < last; ++k) level_of_[k] = j;
    first = last;
  }
}

std::vector<long> relabelled_frequencies(std::size_t n) {
  const std::size_t depth = dyadic_depth(n);
  std::vector<long> f{0, 1};
  for (std::size_t j = 1; j <= depth; ++j) {
    const long hi = 1L << j, lo = 1L << (j - 1);
    for (long w = -hi + 1; w <= -lo; ++w) f.push_back(w);
    for (long w = lo + 1; w <= hi; ++w) f.push_back(w);
  }
  return f;
}

DenseOperator haar_matrix(std::size_t n) {
  const std::size_t depth = dyadic_depth(n);
  Matrix h = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
  const double base = 1.0 / std::sqrt(static_cast<double>(n));
  const auto half = Eigen::Index(n / 2);
  h.row(0).setConstant(base);
  h.row(1).head(half).setConstant(base);
  h.row(1).tail(half).setConstant(-base);
  Eigen::Index r = 2;
  for (std::size_t j = 1; j <= depth; ++j) {
    const auto len = Eigen::Index(n >> j);
    const double amp = base * std::pow(2.0, 0.5 * static_cast<double>(j));
    for (std::size_t k = 0; k < (std::size_t{1} << j); ++k, ++r) {
      const Eigen::Index start = Eigen::Index(k) * len;
      h.row(r).segment(start, len / 2).setConstant(amp);
      h.row(r).segment(start + len / 2, len / 2).setConstant(-amp);
    }
  }
  return DenseOperator(std::move(h));
}

DenseOperator fourier_matrix(std::size_t n) {
  const auto freqs = relabelled_frequencies(n);
  Matrix f = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    // Reduce f*t mod n exactly before forming the phase.
    const long long w = ((freqs[k] % long(n)) + long(n)) % long(n);
    for (std::size_t t = 0; t < n; ++t) {
      const long long p = (w * static_cast<long long>(t)) % static_cast<long long>(n);
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(n);
      f(Eigen::Index(k), Eigen::Index(t)) = scale * Complex(std::cos(phase), std::sin(phase));
    }
  }
  return DenseOperator(std::move(f));
}

FourierHaar1D fourier_haar_1d(std::size_t n) {
  // Row k of F H^* is H applied to row k of F (H is real).
  const DenseOperator f = fourier_matrix(n);
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < a.rows(); ++k) a.row(k) = haar_analysis(f.matrix().row(k).transpose()).transpose();
  return {DenseOperator(std::move(a)), SubbandPartition(n, PartitionKind::wavelet),
          SubbandPartition(n, PartitionKind::frequency)};
}

std::vector<std::vector<Real>> local_coherences(const FourierHaar1D& fh) {
  const std::size_t levels = fh.wavelet.num_levels();
  std::vector<std::vector<Real>> mu(levels, std::vector<Real>(levels, 0.0));
  const Matrix& a = fh.a0.matrix();
  for (std::size_t k = 0; k < fh.a0.rows(); ++k) {
    const std::size_t j = fh.frequency.level_of(k);
    for (std::size_t i = 0; i < fh.a0.cols(); ++i) {
      const std::size_t l = fh.wavelet.level_of(i);
      mu[j][l] = std::max(mu[j][l], std::norm(a(Eigen::Index(k), Eigen::Index(i))));
    }
  }
  return mu;
}

Real local_coherence_constant(const FourierHaar1D& fh) {
  const auto mu = local_coherences(fh);
  Real c = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    for (std::size_t l = 0; l < mu.size(); ++l) {
      const double d = static_cast<double>(j > l ? j - l : l - j);
      const double shape = std::pow(2.0, -static_cast<double>(j) - d);
      c = std::max(c, mu[j][l] / shape);
    }
  }
  return c;
}

TensorBlockDictionary::TensorBlockDictionary(DenseOperator phi, LineOrientation orientation)
    : phi_(std::move(phi)), orientation_(orientation) {
  if (phi_.rows() != phi_.cols()) throw DimensionError("tensor_line_dictionary: phi must be square");
}

DenseOperator TensorBlockDictionary::block(std::size_t k) const {
  if (k >= num_blocks()) throw IndexError("tensor dictionary block index out of range");
  const DenseOperator row(Matrix(phi_.matrix().row(Eigen::Index(k))));
  return orientation_ == LineOrientation::vertical ? kron(row, phi_) : kron(phi_, row);
}

std::vector<DenseOperator> TensorBlockDictionary::blocks() const {
  std::vector<DenseOperator> out;
  out.reserve(num_blocks());
  for (std::size_t k = 0; k < num_blocks(); ++k) out.push_back(block(k));
  return out;
}

TensorBlockDictionary tensor_line_dictionary(const DenseOperator& phi, LineOrientation orientation) {
  return TensorBlockDictionary(phi, orientation);
}

GaussLegendre gauss_legendre(std::size_t n) {
  if (n == 0) throw ArgumentError("gauss_legendre: n must be >= 1");
  GaussLegendre gl;
  gl.nodes.assign(n, 0.0);
  gl.weights.assign(n, 0.0);
  const double nn = static_cast<double>(n);
  // Legendre P_n and its derivative at z.
  auto evaluate = [n, nn](double z, double& deriv) {
    double p1 = 1.0, p0 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = p0;
      p0 = p1;
      p1 = ((2.0 * kk - 1.0) * z * p0 - (kk - 1.0) * p2) / kk;
    }
    deriv = nn * (z * p1 - p0) / (z * z - 1.0);
    return p1;
  };
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nn + 0.5));
    double deriv = 0.0;
    bool converged = false;
    for (int step = 0; step < 100; ++step) {
      const double p = evaluate(z, deriv);
      const double dz = p / deriv;
      z -= dz;
      if (std::abs(dz) <= 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      ComplexVector last(1);
      last(0) = z;
      throw ConvergenceError("gauss_legendre: Newton iteration did not converge", last);
    }
    evaluate(z, deriv);
    const double w = 2.0 / ((1.0 - z * z) * deriv * deriv);
    // Guesses run from the largest root downwards.
    gl.nodes[n - 1 - i] = z;
    gl.nodes[i] = -z;
    gl.weights[n - 1 - i] = w;
    gl.weights[i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

std::vector<Real> normalized_legendre(Real t, std::size_t n) {
  std::vector<Real> out(n);
  double pm1 = 0.0, p = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    // p holds P_j(t)
    out[j] = std::sqrt(2.0 * static_cast<double>(j) + 1.0) * p;
    const double jj = static_cast<double>(j);
    const double next = ((2.0 * jj + 1.0) * t * p - jj * pm1) / (jj + 1.0);
    pm1 = p;
    p = next;
  }
  return out;
}

LegendreSystem legendre_system(std::size_t n) {
  auto gl = gauss_legendre(n);
  Matrix a = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto l = normalized_legendre(gl.nodes[i], n);
    const double s = std::sqrt(gl.weights[i] / 2.0);
    for (std::size_t j = 0; j < n; ++j) a(Eigen::Index(i), Eigen::Index(j)) = s * l[j];
  }
  return {DenseOperator(std::move(a)), std::move(gl.nodes), std::move(gl.weights)};
}

// Coefficient layout: c_0 scaling, c_1 mother, then 2^j details of level j
// starting at 2^j. One butterfly pass per level, each of cost O(length).
ComplexVector haar_analysis(const ComplexVector& z) {
  const auto n = static_cast<std::size_t>(z.size());
  dyadic_depth(n);
  const double r = std::sqrt(0.5);
  ComplexVector c(z.size());
  std::vector<Complex> a(z.data(), z.data() + z.size()), next(n / 2);
  for (std::size_t len = n; len > 1; len /= 2) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      next[k] = r * (a[2 * k] + a[2 * k + 1]);
      c(Eigen::Index(half + k)) = r * (a[2 * k] - a[2 * k + 1]);
    }
    std::copy(next.begin(), next.begin() + Eigen::Index(half), a.begin());
  }
  c(0) = a[0];
  return c;
}

ComplexVector haar_synthesis(const ComplexVector& c) {
  const auto n = static_cast<std::size_t>(c.size());
  dyadic_depth(n);
  const double r = std::sqrt(0.5);
  std::vector<Complex> a(n), next(n);
  a[0] = c(0);
  for (std::size_t half = 1; half < n; half *= 2) {
    for (std::size_t k = 0; k < half; ++k) {
      const Complex d = c(Eigen::Index(half + k));
      next[2 * k] = r * (a[k] + d);
      next[2 * k + 1] = r * (a[k] - d);
    }
    std::copy(next.begin(), next.begin() + Eigen::Index(2 * half), a.begin());
  }
  return Eigen::Map<const ComplexVector>(a.data(), Eigen::Index(n));
}

namespace {

// FFTW plans are created under a lock (the planner is not reentrant) and
// executed with the new-array interface, which is.
class FftPair {
 public:
  explicit FftPair(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fwd_ = fftw_plan_dft_1d(int(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(int(n), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;
  ~FftPair() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  // Unnormalised sum_t in_t e^{-+2 pi i b t / n}; buffers come from fftw_malloc
  // so they share the planning alignment.
  void forward(const Complex* in, Complex* out) const { run(fwd_, in, out); }
  void backward(const Complex* in, Complex* out) const { run(inv_, in, out); }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  void run(fftw_plan plan, const Complex* in, Complex* out) const {
    auto* bin = fftw_alloc_complex(n_);
    auto* bout = fftw_alloc_complex(n_);
    std::memcpy(bin, in, n_ * sizeof(Complex));
    fftw_execute_dft(plan, bin, bout);
    std::memcpy(static_cast<void*>(out), bout, n_ * sizeof(Complex));
    fftw_free(bin);
    fftw_free(bout);
  }

  std::size_t n_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace

LinearMap fourier_haar_rows(std::size_t n, std::vector<std::size_t> ids, std::vector<Real> scales) {
  dyadic_depth(n);
  if (ids.size() != scales.size()) throw DimensionError("fourier_haar_rows: one scale per row id");
  const auto freqs = relabelled_frequencies(n);
  // DFT bin of every sampled row.
  auto bins = std::make_shared<std::vector<std::size_t>>();
  for (std::size_t k : ids) {
    if (k >= n) throw IndexError("fourier_haar_rows: row id " + std::to_string(k) + " out of range");
    bins->push_back(static_cast<std::size_t>(((freqs[k] % long(n)) + long(n)) % long(n)));
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  auto w = std::make_shared<std::vector<Real>>(std::move(scales));
  for (Real& v : *w) v *= norm;
  auto fft = std::make_shared<const FftPair>(n);

  LinearMap m;
  m.rows = ids.size();
  m.cols = n;
  m.apply = [=](const ComplexVector& x) {
    const ComplexVector z = haar_synthesis(x);
    ComplexVector spec(z.size());
    fft->forward(z.data(), spec.data());
    ComplexVector y(static_cast<Eigen::Index>(bins->size()));
    for (std::size_t i = 0; i < bins->size(); ++i) y(Eigen::Index(i)) = (*w)[i] * spec(Eigen::Index((*bins)[i]));
    return y;
  };
  m.adjoint = [=](const ComplexVector& y) {
    ComplexVector spec = ComplexVector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < bins->size(); ++i) spec(Eigen::Index((*bins)[i])) += (*w)[i] * y(Eigen::Index(i));
    ComplexVector z(spec.size());
    fft->backward(spec.data(), z.data());
    return haar_analysis(z);
  };
  return m;
}

}  // namespace vds
