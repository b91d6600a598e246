#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vds/common.hpp"
#include "vds/transforms.hpp"

namespace vds {

enum class SignModel { rademacher, steinhaus };
// constant: |x_i| = 1 on S. level_decay: |x_i| = 2^{-j(i)} for the wavelet
// level j(i) of i, for stability experiments with compressible signals.
enum class MagnitudeLaw { constant, level_decay };

std::string to_string(SignModel model);
SignModel sign_model_from_string(const std::string& name);  // ConfigError
std::string to_string(MagnitudeLaw law);
MagnitudeLaw magnitude_law_from_string(const std::string& name);  // ConfigError

// Per-level sparsities s_j = |S n Omega_j|.
struct LevelSparsity {
  std::vector<std::size_t> counts;

  std::size_t total() const;
  // Throws ArgumentError when the level count differs or s_j > |Omega_j|.
  void validate(const SubbandPartition& partition) const;
};

struct SignalInstance {
  std::size_t n = 0;
  IndexSet support;
  ComplexVector coefficients;  // zero off the support
  SignModel sign_model = SignModel::rademacher;
  std::vector<Real> magnitudes;  // |x_i| for i in support, in support order
};

// Uniformly random s-subset of {0..n-1}.
IndexSet random_support(std::size_t n, std::size_t s, std::uint64_t seed);

// Union of uniformly random s_j-subsets of each level.
IndexSet support_in_levels(const SubbandPartition& partition, const LevelSparsity& levels, std::uint64_t seed);

// |S n Omega_j| for every level.
LevelSparsity measure_level_sparsity(const SubbandPartition& partition, const IndexSet& support);

// 2D supports live on a side x side grid; the flat index of cell (row t,
// column q) is q * side + t, matching the column-stacked vectorisation under
// which phi (x) phi acts as X -> phi X phi^T.
std::size_t grid_index(std::size_t row, std::size_t col, std::size_t side);
IndexSet transpose_support(const IndexSet& support, std::size_t side);

// s^r_j = max over rows t of |{q in Omega_j : (t, q) in S}|, where Omega_j
// are the levels of `partition` (size side) applied to column indices.
std::vector<std::size_t> anisotropic_row_sparsities(const IndexSet& support, const SubbandPartition& partition);
// Column variant: s^c_j computed as s^r_j of the transposed support.
std::vector<std::size_t> anisotropic_column_sparsities(const IndexSet& support, const SubbandPartition& partition);

// Random-sign signal on S. level_decay needs the wavelet partition.
SignalInstance make_signal(std::size_t n, const IndexSet& support, SignModel model, MagnitudeLaw law,
                           std::uint64_t seed, const SubbandPartition* levels = nullptr);

}  // namespace vds
