#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vds/coherence.hpp"
#include "vds/distribution.hpp"
#include "vds/rng.hpp"
#include "vds/transforms.hpp"

namespace vds {

struct OptimalProbability {
  ProbabilityDistribution pi;
  Real min_value = 0.0;  // K(pi*) = sum_k gamma_k
};

// K(pi) = max_k gamma_k / pi_k, with 0/0 = 0 and gamma_k / 0 = +inf.
Real max_ratio_objective(const std::vector<Real>& gamma, const ProbabilityDistribution& pi);

// Unique minimiser of K over the simplex: pi*_k = gamma_k / sum(gamma).
// Throws DegenerateError for an all-zero gamma, ArgumentError for negatives.
OptimalProbability optimal_probability(const std::vector<Real>& gamma);

enum class DesignMode {
  pi_inf,            // ||d_k||_inf^2
  pi_theta_block,    // ||D_k^* D_{k,S}||_{inf->inf}
  pi_lambda_block,   // ||D_{k,S}^* D_{k,S}||_{2->2}
  pi_theta_iso,      // ||d_k||_inf ||d_{k,S}||_1
  pi_lambda_iso,     // ||d_{k,S}||_2^2
  pi_lambda_tilde,   // max_{j in S^c} ||d_{k,S u {j}}||_2^2
  pi_levels_1d,      // 2^{-j(k)} sum_p 2^{-w|j(k)-p|} s_p over frequencies
  pi_lines_2d,       // same shape over lines, with row sparsities s^r
  pi_fh_theta,       // ||d_k||_inf sum_j s_j ||d_{k,Omega_j}||_inf
  pi_fh_lambda,      // sum_j s_j ||d_{k,Omega_j}||_inf^2
};

std::string to_string(DesignMode mode);
DesignMode design_mode_from_string(const std::string& name);  // ConfigError on unknown names

// Inputs for design_pi. Each mode reads only what it needs and throws
// ArgumentError when a required input is missing.
struct DesignInputs {
  const DenseOperator* a0 = nullptr;            // iso modes, pi_fh_*
  const BlockDictionary* dictionary = nullptr;  // block modes
  std::optional<IndexSet> support;              // S-dependent modes
  const SubbandPartition* frequency = nullptr;  // level modes: bands over sampled indices
  const SubbandPartition* wavelet = nullptr;    // pi_fh_*: Haar levels
  std::vector<std::size_t> level_sparsities;    // s_j or s^r_j
  double exponent = 1.0;                        // w in {1/2, 1} for level modes
};

ProbabilityDistribution design_pi(DesignMode mode, const DesignInputs& inputs);

// Unnormalised masses behind design_pi (gamma of the max-ratio objective).
std::vector<Real> design_masses(DesignMode mode, const DesignInputs& inputs);

// Level-shaped masses 2^{-j(k)} sum_p 2^{-w|j(k)-p|} s_p for every index k of
// the partition.
std::vector<Real> level_masses(const SubbandPartition& frequency, const std::vector<std::size_t>& sparsities,
                               double exponent);

// Block ids of the frequency bands W_0..W_{j0}: the low-frequency saturation
// helper for partial deterministic sampling.
IndexSet saturate_low_frequencies(const SubbandPartition& frequency, std::size_t j0);

struct SamplingPlan {
  std::shared_ptr<const BlockDictionary> dictionary;
  ProbabilityDistribution pi;
  std::size_t m = 0;          // total number of blocks, m > m_0 unless every block is saturated
  IndexSet deterministic;     // saturated block ids; m_0 = |deterministic|
  std::uint64_t seed = 0;

  std::size_t m0() const noexcept { return deterministic.size(); }
  // Throws ArgumentError on inconsistent sizes or m <= m_0 (m == m_0 is allowed
  // when every block is saturated).
  void validate() const;
};

struct SensingMatrix {
  DenseOperator matrix;
  std::vector<std::size_t> drawn_block_ids;  // random draws, in draw order
  IndexSet deterministic_ids;
  std::vector<std::size_t> row_block;        // source block of every row
};

// Deterministic blocks enter unscaled; the m - m_0 random blocks are drawn
// i.i.d. from pi restricted to the non-saturated blocks (renormalised) and
// scaled by 1 / sqrt((m - m_0) pi'_k). Then E[A^* A] = Id. When every block
// is saturated the random part is empty.
SensingMatrix draw_sensing_matrix(const SamplingPlan& plan);
SensingMatrix draw_sensing_matrix(const SamplingPlan& plan, CounterRng& rng);

// Row ids and weights of isolated sampling: m i.i.d. draws k ~ pi, each with
// weight 1 / sqrt(m pi_k). draw_isolated_rows consumes rng identically.
struct RowDraw {
  std::vector<std::size_t> ids;
  std::vector<Real> scales;
};
RowDraw draw_isolated_ids(const ProbabilityDistribution& pi, std::size_t m, CounterRng& rng);

// Isolated-row sampling straight from a0 (no singleton dictionary): m i.i.d.
// rows d_k^* / sqrt(m pi_k).
SensingMatrix draw_isolated_rows(const DenseOperator& a0, const ProbabilityDistribution& pi, std::size_t m,
                                 CounterRng& rng);

// ||mean_t A_t^* A_t - Id||_max over `trials` independent draws, trial t
// seeded with derive_seed(plan.seed, t).
Real isotropy_check(const SamplingPlan& plan, std::size_t trials);

}  // namespace vds
