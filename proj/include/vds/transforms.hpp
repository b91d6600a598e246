#pragma once

#include <cstddef>
#include <vector>

#include "vds/operators.hpp"

namespace vds {

enum class PartitionKind { wavelet, frequency };

// Dyadic subband partition of {0..n-1}. For the wavelet kind, level j holds
// the Haar rows Omega_j; for the frequency kind, the relabelled Fourier rows
// of band W_j. Both have |level_j| = 2^max(1,j) and are contiguous ranges.
class SubbandPartition {
 public:
  SubbandPartition() = default;
  // n must be 2^(J+1), J >= 0.
  SubbandPartition(std::size_t n, PartitionKind kind);

  std::size_t n() const noexcept { return n_; }
  std::size_t num_levels() const noexcept { return levels_.size(); }  // J + 1
  std::size_t max_level() const noexcept { return levels_.size() - 1; }  // J
  PartitionKind kind() const noexcept { return kind_; }
  const IndexSet& level(std::size_t j) const { return levels_.at(j); }
  const std::vector<IndexSet>& levels() const noexcept { return levels_; }
  // j(k): the level containing index k.
  std::size_t level_of(std::size_t k) const { return level_of_.at(k); }

 private:
  std::size_t n_ = 0;
  PartitionKind kind_ = PartitionKind::wavelet;
  std::vector<IndexSet> levels_;
  std::vector<std::size_t> level_of_;
};

bool is_power_of_two(std::size_t n);
// log2(n) - 1 for n = 2^(J+1); throws ArgumentError otherwise.
std::size_t dyadic_depth(std::size_t n);

// Signed frequency carried by relabelled Fourier row k (band order W_0..W_J,
// negative frequencies before positive within a band, ascending).
std::vector<long> relabelled_frequencies(std::size_t n);

// Orthonormal Haar analysis matrix: row 0 is the scaling function, row 1 the
// mother wavelet, then levels j = 1..J with 2^j translates each.
DenseOperator haar_matrix(std::size_t n);

// Unitary DFT, entry (k, t) = n^{-1/2} exp(-2 pi i f_k t / n) with f_k from
// relabelled_frequencies(n).
DenseOperator fourier_matrix(std::size_t n);

// H z and H^* c for the orthonormal Haar matrix above, without forming it.
ComplexVector haar_analysis(const ComplexVector& z);
ComplexVector haar_synthesis(const ComplexVector& c);

// Rows ids[i] of F H^* scaled by scales[i] (repetitions allowed), applied
// through the FFT and the fast Haar transform in O(n log n).
LinearMap fourier_haar_rows(std::size_t n, std::vector<std::size_t> ids, std::vector<Real> scales);

struct FourierHaar1D {
  DenseOperator a0;  // F H^*
  SubbandPartition wavelet;
  SubbandPartition frequency;
};

FourierHaar1D fourier_haar_1d(std::size_t n);

// mu_{j,l} = max_{k in W_j, i in Omega_l} |A0_{ki}|^2, indexed [j][l].
std::vector<std::vector<Real>> local_coherences(const FourierHaar1D& fh);

// Smallest C with mu_{j,l} <= C 2^{-j} 2^{-|j-l|} for all (j, l).
Real local_coherence_constant(const FourierHaar1D& fh);

enum class LineOrientation { vertical, horizontal };

// Blocks of phi (x) phi grouped by lines of the 2D frequency grid.
// vertical:   D_k = phi_{k,:} (x) phi   (k-th column of Y = phi X phi^T)
// horizontal: D_k = phi (x) phi_{k,:}
class TensorBlockDictionary {
 public:
  TensorBlockDictionary(DenseOperator phi, LineOrientation orientation);

  std::size_t side() const noexcept { return phi_.rows(); }  // sqrt(n)
  std::size_t num_blocks() const noexcept { return phi_.rows(); }
  std::size_t dimension() const noexcept { return phi_.rows() * phi_.rows(); }
  LineOrientation orientation() const noexcept { return orientation_; }
  const DenseOperator& base() const noexcept { return phi_; }

  DenseOperator block(std::size_t k) const;
  std::vector<DenseOperator> blocks() const;

 private:
  DenseOperator phi_;
  LineOrientation orientation_;
};

TensorBlockDictionary tensor_line_dictionary(const DenseOperator& phi, LineOrientation orientation);

struct GaussLegendre {
  std::vector<Real> nodes;    // ascending
  std::vector<Real> weights;  // sum to 2
};

// Roots of P_n by Newton iteration from Chebyshev-type initial guesses,
// converged to 1e-14. Throws ConvergenceError after 100 steps per root.
GaussLegendre gauss_legendre(std::size_t n);

// L_j(t) = sqrt(2j - 1) P_{j-1}(t), j = 1..n, so that int L_j L_k = 2 delta_jk.
std::vector<Real> normalized_legendre(Real t, std::size_t n);

struct LegendreSystem {
  DenseOperator a0;  // (A0)_{ij} = sqrt(w_i / 2) L_j(g_i), orthogonal
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

LegendreSystem legendre_system(std::size_t n);

}  // namespace vds
