#include "vds/sampling.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace vds {

namespace {

using Matrix = DenseOperator::Matrix;

constexpr std::array<std::pair<DesignMode, const char*>, 10> kModeNames{{
    {DesignMode::pi_inf, "pi_inf"},
    {DesignMode::pi_theta_block, "pi_theta_block"},
    {DesignMode::pi_lambda_block, "pi_lambda_block"},
    {DesignMode::pi_theta_iso, "pi_theta_iso"},
    {DesignMode::pi_lambda_iso, "pi_lambda_iso"},
    {DesignMode::pi_lambda_tilde, "pi_lambda_tilde"},
    {DesignMode::pi_levels_1d, "pi_levels_1d"},
    {DesignMode::pi_lines_2d, "pi_lines_2d"},
    {DesignMode::pi_fh_theta, "pi_fh_theta"},
    {DesignMode::pi_fh_lambda, "pi_fh_lambda"},
}};

const DenseOperator& need_a0(const DesignInputs& in, DesignMode mode) {
  if (!in.a0) throw ArgumentError(to_string(mode) + ": requires an isometry a0");
  return *in.a0;
}

const BlockDictionary& need_dictionary(const DesignInputs& in, DesignMode mode) {
  if (!in.dictionary) throw ArgumentError(to_string(mode) + ": requires a block dictionary");
  return *in.dictionary;
}

const IndexSet& need_support(const DesignInputs& in, DesignMode mode) {
  if (!in.support) throw ArgumentError(to_string(mode) + ": requires a support S");
  return *in.support;
}

const SubbandPartition& need_partition(const SubbandPartition* p, DesignMode mode, const char* what) {
  if (!p) throw ArgumentError(to_string(mode) + ": requires a " + what + " partition");
  return *p;
}

// s_j-weighted per-level sup norms of the rows of a0 over the wavelet levels.
std::vector<Real> fh_masses(const DesignInputs& in, DesignMode mode) {
  const DenseOperator& a0 = need_a0(in, mode);
  const SubbandPartition& omega = need_partition(in.wavelet, mode, "wavelet");
  if (omega.n() != a0.cols()) throw DimensionError(to_string(mode) + ": partition size differs from a0 columns");
  if (in.level_sparsities.size() != omega.num_levels())
    throw DimensionError(to_string(mode) + ": need one sparsity per wavelet level");
  std::vector<Real> out(a0.rows(), 0.0);
  for (std::size_t k = 0; k < a0.rows(); ++k) {
    const auto row = a0.matrix().row(Eigen::Index(k));
    Real acc = 0.0;
    for (std::size_t j = 0; j < omega.num_levels(); ++j) {
      if (in.level_sparsities[j] == 0) continue;
      Real sup = 0.0;
      for (std::size_t i : omega.level(j)) sup = std::max(sup, std::abs(row(Eigen::Index(i))));
      const Real sj = static_cast<Real>(in.level_sparsities[j]);
      acc += mode == DesignMode::pi_fh_theta ? sj * sup : sj * sup * sup;
    }
    out[k] = mode == DesignMode::pi_fh_theta ? row.cwiseAbs().maxCoeff() * acc : acc;
  }
  return out;
}

}  // namespace

Real max_ratio_objective(const std::vector<Real>& gamma, const ProbabilityDistribution& pi) {
  if (gamma.size() != pi.size()) throw DimensionError("max_ratio_objective: size mismatch");
  Real best = 0.0;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (gamma[k] == 0.0) continue;
    if (pi[k] == 0.0) return std::numeric_limits<Real>::infinity();
    best = std::max(best, gamma[k] / pi[k]);
  }
  return best;
}

OptimalProbability optimal_probability(const std::vector<Real>& gamma) {
  if (gamma.empty()) throw ArgumentError("optimal_probability: empty gamma");
  Real total = 0.0;
  for (Real g : gamma) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ArgumentError("optimal_probability: gamma must be finite and >= 0");
    total += g;
  }
  if (!(total > 0.0)) throw DegenerateError("optimal_probability: all-zero gamma");
  return {ProbabilityDistribution::from_masses(gamma), total};
}

std::string to_string(DesignMode mode) {
  for (const auto& [m, name] : kModeNames)
    if (m == mode) return name;
  return "unknown";
}

DesignMode design_mode_from_string(const std::string& name) {
  for (const auto& [m, n] : kModeNames)
    if (name == n) return m;
  throw ConfigError("unknown design mode '" + name + "'");
}

std::vector<Real> level_masses(const SubbandPartition& frequency, const std::vector<std::size_t>& sparsities,
                               double exponent) {
  if (sparsities.size() != frequency.num_levels())
    throw DimensionError("level_masses: need one sparsity per level (" + std::to_string(frequency.num_levels()) + ")");
  if (!(exponent > 0.0)) throw ArgumentError("level_masses: exponent must be > 0");
  std::vector<Real> per_level(sparsities.size(), 0.0);
  for (std::size_t j = 0; j < sparsities.size(); ++j) {
    Real acc = 0.0;
    for (std::size_t p = 0; p < sparsities.size(); ++p) {
      const double d = static_cast<double>(j > p ? j - p : p - j);
      acc += std::exp2(-exponent * d) * static_cast<double>(sparsities[p]);
    }
    per_level[j] = std::exp2(-static_cast<double>(j)) * acc;
  }
  std::vector<Real> out(frequency.n());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = per_level[frequency.level_of(k)];
  return out;
}

std::vector<Real> design_masses(DesignMode mode, const DesignInputs& in) {
  switch (mode) {
    case DesignMode::pi_inf:
      if (in.dictionary) return gamma_numerators(*in.dictionary);
      return gamma_numerators_iso(need_a0(in, mode));
    case DesignMode::pi_theta_block:
      return theta_numerators(need_dictionary(in, mode), need_support(in, mode));
    case DesignMode::pi_lambda_block:
      return lambda_numerators(need_dictionary(in, mode), need_support(in, mode));
    case DesignMode::pi_theta_iso:
      return theta_numerators_iso(need_a0(in, mode), need_support(in, mode));
    case DesignMode::pi_lambda_iso:
      return lambda_numerators_iso(need_a0(in, mode), need_support(in, mode));
    case DesignMode::pi_lambda_tilde:
      return lambda_enlarged_numerators_iso(need_a0(in, mode), need_support(in, mode));
    case DesignMode::pi_levels_1d:
    case DesignMode::pi_lines_2d:
      return level_masses(need_partition(in.frequency, mode, "frequency"), in.level_sparsities, in.exponent);
    case DesignMode::pi_fh_theta:
    case DesignMode::pi_fh_lambda:
      return fh_masses(in, mode);
  }
  throw ArgumentError("design_masses: unknown mode");
}

ProbabilityDistribution design_pi(DesignMode mode, const DesignInputs& inputs) {
  const auto masses = design_masses(mode, inputs);
  try {
    return ProbabilityDistribution::from_masses(masses);
  } catch (const DegenerateError&) {
    throw DegenerateError(to_string(mode) + ": zero total mass");
  }
}

IndexSet saturate_low_frequencies(const SubbandPartition& frequency, std::size_t j0) {
  if (j0 > frequency.max_level()) throw ArgumentError("saturate_low_frequencies: j0 exceeds the finest level");
  IndexSet out;
  for (std::size_t j = 0; j <= j0; ++j) out = out.unite(frequency.level(j));
  return out;
}

void SamplingPlan::validate() const {
  if (!dictionary) throw ArgumentError("SamplingPlan: no dictionary");
  if (pi.size() != dictionary->num_blocks())
    throw DimensionError("SamplingPlan: pi has " + std::to_string(pi.size()) + " entries for " +
                         std::to_string(dictionary->num_blocks()) + " blocks");
  if (!deterministic.empty() && deterministic.max_index() >= dictionary->num_blocks())
    throw IndexError("SamplingPlan: deterministic block id out of range");
  const bool all_saturated = m0() == dictionary->num_blocks() && m == m0();
  if (m <= m0() && !all_saturated) throw ArgumentError("SamplingPlan: need m > m_0");
}

SensingMatrix draw_sensing_matrix(const SamplingPlan& plan) {
  CounterRng rng(plan.seed);
  return draw_sensing_matrix(plan, rng);
}

SensingMatrix draw_sensing_matrix(const SamplingPlan& plan, CounterRng& rng) {
  plan.validate();
  const BlockDictionary& dict = *plan.dictionary;
  const std::size_t n = dict.dimension();
  const std::size_t draws = plan.m - plan.m0();

  // Saturated blocks are acquired deterministically and removed from the
  // random law, which is renormalised over the remaining blocks.
  std::vector<Real> law(plan.pi.weights());
  for (std::size_t k : plan.deterministic) law[k] = 0.0;
  Real mass = 0.0;
  for (Real w : law) mass += w;
  const bool random_part = plan.deterministic.size() < dict.num_blocks();
  if (random_part && !(mass > 0.0))
    throw DegenerateError("draw_sensing_matrix: pi has no mass outside the deterministic blocks");
  for (Real& w : law) w = random_part ? w / mass : 0.0;

  SensingMatrix out;
  out.deterministic_ids = plan.deterministic;
  std::size_t rows = 0;
  for (std::size_t k : plan.deterministic) rows += dict.block(k).rows();
  if (random_part) {
    DiscreteSampler sampler(law);
    out.drawn_block_ids.reserve(draws);
    for (std::size_t l = 0; l < draws; ++l) {
      const std::size_t k = sampler(rng);
      out.drawn_block_ids.push_back(k);
      rows += dict.block(k).rows();
    }
  }

  Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  out.row_block.reserve(rows);
  Eigen::Index r = 0;
  for (std::size_t k : plan.deterministic) {
    const Matrix& d = dict.block(k).matrix();
    a.middleRows(r, d.rows()) = d;
    r += d.rows();
    out.row_block.insert(out.row_block.end(), std::size_t(d.rows()), k);
  }
  for (std::size_t k : out.drawn_block_ids) {
    const Matrix& d = dict.block(k).matrix();
    a.middleRows(r, d.rows()) = d / std::sqrt(static_cast<Real>(draws) * law[k]);
    r += d.rows();
    out.row_block.insert(out.row_block.end(), std::size_t(d.rows()), k);
  }
  out.matrix = DenseOperator(std::move(a));
  return out;
}

RowDraw draw_isolated_ids(const ProbabilityDistribution& pi, std::size_t m, CounterRng& rng) {
  if (m < 1) throw ArgumentError("draw_isolated_ids: m must be >= 1");
  DiscreteSampler sampler(pi.weights());
  RowDraw out;
  out.ids.reserve(m);
  out.scales.reserve(m);
  for (std::size_t l = 0; l < m; ++l) {
    const std::size_t k = sampler(rng);
    out.ids.push_back(k);
    out.scales.push_back(1.0 / std::sqrt(static_cast<Real>(m) * pi[k]));
  }
  return out;
}

SensingMatrix draw_isolated_rows(const DenseOperator& a0, const ProbabilityDistribution& pi, std::size_t m,
                                 CounterRng& rng) {
  if (pi.size() != a0.rows()) throw DimensionError("draw_isolated_rows: pi size differs from rows(a0)");
  if (m < 1) throw ArgumentError("draw_isolated_rows: m must be >= 1");
  const RowDraw draw = draw_isolated_ids(pi, m, rng);
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a0.cols()));
  for (std::size_t l = 0; l < m; ++l) a.row(Eigen::Index(l)) = a0.matrix().row(Eigen::Index(draw.ids[l])) * draw.scales[l];
  SensingMatrix out;
  out.drawn_block_ids = draw.ids;
  out.row_block = draw.ids;
  out.matrix = DenseOperator(std::move(a));
  return out;
}

Real isotropy_check(const SamplingPlan& plan, std::size_t trials) {
  if (trials < 1) throw ArgumentError("isotropy_check: trials must be >= 1");
  plan.validate();
  const Eigen::Index n = Eigen::Index(plan.dictionary->dimension());
  Matrix acc = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_seed(plan.seed, t));
    const SensingMatrix sm = draw_sensing_matrix(plan, rng);
    const Matrix& a = sm.matrix.matrix();
    acc.noalias() += a.adjoint() * a;
  }
  acc /= static_cast<Real>(trials);
  acc -= Matrix::Identity(n, n);
  return max_abs_entry(acc);
}

}  // namespace vds
