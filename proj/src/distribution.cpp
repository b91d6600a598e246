#include "vds/distribution.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace vds {

ProbabilityDistribution::ProbabilityDistribution(std::vector<Real> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ArgumentError("ProbabilityDistribution: empty weight list");
  Real total = 0.0;
  for (Real w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("ProbabilityDistribution: weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ArgumentError("ProbabilityDistribution: weights sum to " + std::to_string(total) + ", not 1");
}

ProbabilityDistribution ProbabilityDistribution::uniform(std::size_t size) {
  if (size == 0) throw ArgumentError("ProbabilityDistribution::uniform: size 0");
  return ProbabilityDistribution(std::vector<Real>(size, 1.0 / static_cast<Real>(size)));
}

ProbabilityDistribution ProbabilityDistribution::from_masses(std::span<const Real> masses) {
  if (masses.empty()) throw ArgumentError("ProbabilityDistribution::from_masses: empty mass list");
  Real total = 0.0;
  for (Real w : masses) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("ProbabilityDistribution::from_masses: negative or non-finite mass");
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateError("ProbabilityDistribution::from_masses: zero total mass");
  std::vector<Real> w(masses.begin(), masses.end());
  for (Real& v : w) v /= total;
  return ProbabilityDistribution(std::move(w));
}

Real l2_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q) {
  if (p.size() != q.size()) throw DimensionError("l2_distance: size mismatch");
  Real acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Real d = p[k] - q[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace vds
