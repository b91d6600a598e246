#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vds/common.hpp"

namespace vds {

// Discrete probability distribution over block (or row) indices.
// Invariant: weights are nonnegative and sum to 1 within 1e-12.
class ProbabilityDistribution {
 public:
  ProbabilityDistribution() = default;
  // Validates the invariant; throws ArgumentError.
  explicit ProbabilityDistribution(std::vector<Real> weights);

  static ProbabilityDistribution uniform(std::size_t size);
  // Normalises nonnegative masses; throws DegenerateError on zero total.
  static ProbabilityDistribution from_masses(std::span<const Real> masses);

  std::size_t size() const noexcept { return weights_.size(); }
  Real operator[](std::size_t k) const { return weights_[k]; }
  const std::vector<Real>& weights() const noexcept { return weights_; }

  friend bool operator==(const ProbabilityDistribution&, const ProbabilityDistribution&) = default;

 private:
  std::vector<Real> weights_;
};

// ||p - q||_2 over matching supports.
Real l2_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q);

}  // namespace vds
