#include "vds/signals.hpp"

#include <cmath>
#include <numbers>

#include "vds/rng.hpp"

namespace vds {

namespace {

std::size_t grid_side(const IndexSet& support, std::size_t side) {
  if (!support.empty() && support.max_index() >= side * side) throw IndexError("2D support outside the grid");
  return side;
}

}  // namespace

std::string to_string(SignModel model) { return model == SignModel::rademacher ? "rademacher" : "steinhaus"; }

SignModel sign_model_from_string(const std::string& name) {
  if (name == "rademacher") return SignModel::rademacher;
  if (name == "steinhaus") return SignModel::steinhaus;
  throw ConfigError("unknown sign model '" + name + "'");
}

std::string to_string(MagnitudeLaw law) { return law == MagnitudeLaw::constant ? "constant" : "level_decay"; }

MagnitudeLaw magnitude_law_from_string(const std::string& name) {
  if (name == "constant") return MagnitudeLaw::constant;
  if (name == "level_decay") return MagnitudeLaw::level_decay;
  throw ConfigError("unknown magnitude law '" + name + "'");
}

std::size_t LevelSparsity::total() const {
  std::size_t s = 0;
  for (std::size_t c : counts) s += c;
  return s;
}

void LevelSparsity::validate(const SubbandPartition& partition) const {
  if (counts.size() != partition.num_levels())
    throw ArgumentError("LevelSparsity: " + std::to_string(counts.size()) + " counts for " +
                        std::to_string(partition.num_levels()) + " levels");
  for (std::size_t j = 0; j < counts.size(); ++j)
    if (counts[j] > partition.level(j).size())
      throw ArgumentError("LevelSparsity: s_" + std::to_string(j) + " exceeds the level size");
}

IndexSet random_support(std::size_t n, std::size_t s, std::uint64_t seed) {
  if (s > n) throw ArgumentError("random_support: s > n");
  CounterRng rng(seed);
  return IndexSet(sample_without_replacement(rng, n, s));
}

IndexSet support_in_levels(const SubbandPartition& partition, const LevelSparsity& levels, std::uint64_t seed) {
  levels.validate(partition);
  CounterRng rng(seed);
  std::vector<std::size_t> ids;
  ids.reserve(levels.total());
  for (std::size_t j = 0; j < levels.counts.size(); ++j) {
    const IndexSet& omega = partition.level(j);
    for (std::size_t pos : sample_without_replacement(rng, omega.size(), levels.counts[j])) ids.push_back(omega[pos]);
  }
  return IndexSet(std::move(ids));
}

LevelSparsity measure_level_sparsity(const SubbandPartition& partition, const IndexSet& support) {
  if (!support.empty() && support.max_index() >= partition.n()) throw IndexError("measure_level_sparsity: index out of range");
  LevelSparsity out{std::vector<std::size_t>(partition.num_levels(), 0)};
  for (std::size_t i : support) ++out.counts[partition.level_of(i)];
  return out;
}

std::size_t grid_index(std::size_t row, std::size_t col, std::size_t side) {
  if (row >= side || col >= side) throw IndexError("grid_index: cell outside the grid");
  return col * side + row;
}

IndexSet transpose_support(const IndexSet& support, std::size_t side) {
  grid_side(support, side);
  std::vector<std::size_t> ids;
  ids.reserve(support.size());
  for (std::size_t f : support) ids.push_back(grid_index(f / side, f % side, side));
  return IndexSet(std::move(ids));
}

std::vector<std::size_t> anisotropic_row_sparsities(const IndexSet& support, const SubbandPartition& partition) {
  const std::size_t side = grid_side(support, partition.n());
  // counts[t][j] = |{q in Omega_j : (t, q) in S}|
  std::vector<std::vector<std::size_t>> counts(side, std::vector<std::size_t>(partition.num_levels(), 0));
  for (std::size_t f : support) ++counts[f % side][partition.level_of(f / side)];
  std::vector<std::size_t> out(partition.num_levels(), 0);
  for (const auto& row : counts)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j], row[j]);
  return out;
}

std::vector<std::size_t> anisotropic_column_sparsities(const IndexSet& support, const SubbandPartition& partition) {
  return anisotropic_row_sparsities(transpose_support(support, partition.n()), partition);
}

SignalInstance make_signal(std::size_t n, const IndexSet& support, SignModel model, MagnitudeLaw law,
                           std::uint64_t seed, const SubbandPartition* levels) {
  if (!support.empty() && support.max_index() >= n) throw IndexError("make_signal: support outside {0..n-1}");
  if (law == MagnitudeLaw::level_decay && (!levels || levels->n() != n))
    throw ArgumentError("make_signal: level_decay needs a wavelet partition of size n");
  CounterRng rng(seed);
  SignalInstance out;
  out.n = n;
  out.support = support;
  out.sign_model = model;
  out.coefficients = ComplexVector::Zero(Eigen::Index(n));
  out.magnitudes.reserve(support.size());
  for (std::size_t i : support) {
    const Real mag = law == MagnitudeLaw::constant ? 1.0 : std::exp2(-static_cast<Real>(levels->level_of(i)));
    Complex sign;
    if (model == SignModel::rademacher) {
      sign = rng.rademacher();
    } else {
      sign = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    }
    out.coefficients(Eigen::Index(i)) = mag * sign;
    out.magnitudes.push_back(mag);
  }
  return out;
}

}  // namespace vds
