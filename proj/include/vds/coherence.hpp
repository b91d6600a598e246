#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vds/distribution.hpp"
#include "vds/operators.hpp"
#include "vds/transforms.hpp"

namespace vds {

// Partition of the rows of an isometry into blocks D_k (p_k x n).
// Construction checks that all blocks share n columns and that
// ||sum_k D_k^* D_k - Id||_max <= 1e-8.
class BlockDictionary {
 public:
  explicit BlockDictionary(std::vector<DenseOperator> blocks);

  // One singleton block per row of a0.
  static BlockDictionary from_rows(const DenseOperator& a0);
  // Rows of a0 grouped by the given disjoint cover of {0..rows-1}.
  static BlockDictionary from_partition(const DenseOperator& a0, const std::vector<IndexSet>& groups);
  // The isotropy defect is evaluated from the base phi (G = phi^* phi gives
  // entries G_ik G_jl of the full Gram), which avoids forming an n x n product.
  static BlockDictionary from_tensor(const TensorBlockDictionary& dict);

  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  std::size_t dimension() const noexcept { return n_; }
  const DenseOperator& block(std::size_t k) const { return blocks_.at(k); }
  const std::vector<DenseOperator>& blocks() const noexcept { return blocks_; }
  Real isotropy_defect() const noexcept { return isotropy_defect_; }

 private:
  BlockDictionary(std::vector<DenseOperator> blocks, Real isotropy_defect);

  std::vector<DenseOperator> blocks_;
  std::size_t n_ = 0;
  Real isotropy_defect_ = 0.0;
};

// Per-block numerators of the coherence quantities before division by pi_k.
// theta_k  = ||D_k^* D_{k,S}||_{inf->inf}
// lambda_k = ||D_{k,S}^* D_{k,S}||_{2->2}
// gamma_k  = ||D_k||_{1->2}^2
std::vector<Real> theta_numerators(const BlockDictionary& dict, const IndexSet& s);
std::vector<Real> lambda_numerators(const BlockDictionary& dict, const IndexSet& s);
std::vector<Real> gamma_numerators(const BlockDictionary& dict);

// Isolated-row numerators for an orthogonal a0 with rows d_k^*.
// theta_k = ||d_k||_inf ||d_{k,S}||_1, lambda_k = ||d_{k,S}||_2^2, gamma_k = ||d_k||_inf^2
std::vector<Real> theta_numerators_iso(const DenseOperator& a0, const IndexSet& s);
std::vector<Real> lambda_numerators_iso(const DenseOperator& a0, const IndexSet& s);
std::vector<Real> gamma_numerators_iso(const DenseOperator& a0);
// max_{j in S^c} ||d_{k, S u {j}}||_2^2 = ||d_{k,S}||^2 + max_{j in S^c} |d_{kj}|^2
std::vector<Real> lambda_enlarged_numerators_iso(const DenseOperator& a0, const IndexSet& s);

// max_k numerator_k / pi_k with 0/0 = 0. Throws InfiniteCoherenceError when
// some pi_k = 0 has a positive numerator.
Real max_ratio(const std::vector<Real>& numerators, const ProbabilityDistribution& pi);

Real theta_block(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi);
Real lambda_block(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi);
Real gamma_block(const BlockDictionary& dict, const ProbabilityDistribution& pi);

struct CoherenceReport {
  Real theta = 0.0;
  Real lambda = 0.0;
  Real gamma = 0.0;
  IndexSet support;
  ProbabilityDistribution pi;
  std::optional<Real> lambda_enlarged;  // max_{j in S^c} Lambda(S u {j}, pi), when computed
};

CoherenceReport coherence_iso(const DenseOperator& a0, const IndexSet& s, const ProbabilityDistribution& pi);
CoherenceReport coherence_block(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi);

// max_{j in S^c} Lambda(S u {j}, pi). Throws ArgumentError when S is the full set.
Real lambda_enlarged(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi);
Real lambda_enlarged_iso(const DenseOperator& a0, const IndexSet& s, const ProbabilityDistribution& pi);

enum class LevelWeighting { theta, lambda };

// gamma_j = 2^{-j} sum_p 2^{-w|j-p|} s_p with w = 1/2 (theta) or 1 (lambda).
std::vector<Real> levels_estimates_1d(const std::vector<std::size_t>& sparsities, LevelWeighting kind);

struct ConditionConstants {
  Real theta_noiseless = 82.0;   // m >= c Theta ln^2(6n/eps), BP
  Real theta_noisy = 889.0;      // same form, qBP
  Real oracle = 32.0 / 3.0;      // m >= c Lambda ln(2s/eps)
  Real lambda_gamma = 50.0;      // Lambda >= c Gamma ln(3n/eps)
  Real lambda_m = 100.0;         // m >= c Lambda ln(3n/eps)
  Real enlarged = 19.0;          // m >= c max_j Lambda(S u {j}) ln(6(s+1)(n-s)/eps) ln(6n/eps)
};

struct Condition {
  bool satisfied = false;
  // lhs - rhs of the inequality; >= 0 iff satisfied.
  Real margin = 0.0;
  Real required = 0.0;  // right-hand side
};

struct ConditionCheck {
  Condition theta_noiseless;
  Condition theta_noisy;
  Condition oracle;
  Condition lambda_gamma;
  Condition lambda_m;
  std::optional<Condition> enlarged;
  ConditionConstants constants;
};

// Evaluates the sufficient measurement conditions for the given report.
// Requires eps in (0,1) and m >= 1 (ArgumentError otherwise).
ConditionCheck recovery_condition_report(const CoherenceReport& report, std::size_t n, Real epsilon, std::size_t m,
                                         const ConditionConstants& constants = {});

}  // namespace vds
