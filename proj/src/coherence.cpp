#include "vds/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vds {

namespace {

using Matrix = DenseOperator::Matrix;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_support(const IndexSet& s, std::size_t n) {
  if (!s.empty() && s.max_index() >= n) throw IndexError("support index out of range");
}

Real top_eigenvalue(const Matrix& hermitian) {
  if (hermitian.rows() == 1) return std::max(0.0, hermitian(0, 0).real());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

}  // namespace

BlockDictionary::BlockDictionary(std::vector<DenseOperator> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw DimensionError("BlockDictionary: no blocks");
  n_ = blocks_.front().cols();
  Matrix acc = Matrix::Zero(ix(n_), ix(n_));
  for (const auto& b : blocks_) {
    if (b.cols() != n_) throw DimensionError("BlockDictionary: blocks must share the column count");
    acc.noalias() += b.matrix().adjoint() * b.matrix();
  }
  acc -= Matrix::Identity(ix(n_), ix(n_));
  isotropy_defect_ = max_abs_entry(acc);
  if (isotropy_defect_ > 1e-8)
    throw ArgumentError("BlockDictionary: blocks are not a partition of an isometry (defect " +
                        std::to_string(isotropy_defect_) + ")");
}

BlockDictionary BlockDictionary::from_rows(const DenseOperator& a0) {
  std::vector<DenseOperator> blocks;
  blocks.reserve(a0.rows());
  for (std::size_t i = 0; i < a0.rows(); ++i) blocks.emplace_back(Matrix(a0.matrix().row(ix(i))));
  return BlockDictionary(std::move(blocks));
}

BlockDictionary BlockDictionary::from_partition(const DenseOperator& a0, const std::vector<IndexSet>& groups) {
  std::vector<int> seen(a0.rows(), 0);
  std::vector<DenseOperator> blocks;
  for (const auto& g : groups) {
    for (std::size_t i : g) {
      if (i >= a0.rows()) throw IndexError("from_partition: row index out of range");
      if (seen[i]++) throw ArgumentError("from_partition: groups overlap");
    }
    blocks.push_back(select_rows(a0, g.ids()));
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw ArgumentError("from_partition: groups do not cover all rows");
  return BlockDictionary(std::move(blocks));
}

BlockDictionary::BlockDictionary(std::vector<DenseOperator> blocks, Real isotropy_defect)
    : blocks_(std::move(blocks)), isotropy_defect_(isotropy_defect) {
  if (blocks_.empty()) throw DimensionError("BlockDictionary: no blocks");
  n_ = blocks_.front().cols();
  if (isotropy_defect_ > 1e-8)
    throw ArgumentError("BlockDictionary: blocks are not a partition of an isometry (defect " +
                        std::to_string(isotropy_defect_) + ")");
}

BlockDictionary BlockDictionary::from_tensor(const TensorBlockDictionary& dict) {
  const Matrix& phi = dict.base().matrix();
  const Matrix g = phi.adjoint() * phi;
  // Gram of phi (x) phi is G (x) G; its deviation from Id is maximised over
  // pairs of entries of G.
  const Eigen::Index r = g.rows();
  Real defect = 0.0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < r; ++k)
      for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index l = 0; l < r; ++l) {
          const Complex target = (i == k && j == l) ? Complex(1.0) : Complex(0.0);
          defect = std::max(defect, std::abs(g(i, k) * g(j, l) - target));
        }
  return BlockDictionary(dict.blocks(), defect);
}

std::vector<Real> theta_numerators(const BlockDictionary& dict, const IndexSet& s) {
  check_support(s, dict.dimension());
  std::vector<Real> out(dict.num_blocks(), 0.0);
  if (s.empty()) return out;
  for (std::size_t k = 0; k < dict.num_blocks(); ++k) {
    const DenseOperator& d = dict.block(k);
    const Matrix ds = restrict_columns(d, s).matrix();
    const Matrix prod = d.matrix().adjoint() * ds;
    out[k] = prod.cwiseAbs().rowwise().sum().maxCoeff();
  }
  return out;
}

std::vector<Real> lambda_numerators(const BlockDictionary& dict, const IndexSet& s) {
  check_support(s, dict.dimension());
  std::vector<Real> out(dict.num_blocks(), 0.0);
  if (s.empty()) return out;
  for (std::size_t k = 0; k < dict.num_blocks(); ++k)
    out[k] = spectral_norm_squared_exact(restrict_columns(dict.block(k), s));
  return out;
}

std::vector<Real> gamma_numerators(const BlockDictionary& dict) {
  std::vector<Real> out(dict.num_blocks(), 0.0);
  for (std::size_t k = 0; k < dict.num_blocks(); ++k) {
    const Real c = norm_1_to_2(dict.block(k));
    out[k] = c * c;
  }
  return out;
}

std::vector<Real> theta_numerators_iso(const DenseOperator& a0, const IndexSet& s) {
  check_support(s, a0.cols());
  std::vector<Real> out(a0.rows(), 0.0);
  for (std::size_t k = 0; k < a0.rows(); ++k) {
    const auto row = a0.matrix().row(ix(k));
    Real l1 = 0.0;
    for (std::size_t i : s) l1 += std::abs(row(ix(i)));
    out[k] = row.cwiseAbs().maxCoeff() * l1;
  }
  return out;
}

std::vector<Real> lambda_numerators_iso(const DenseOperator& a0, const IndexSet& s) {
  check_support(s, a0.cols());
  std::vector<Real> out(a0.rows(), 0.0);
  for (std::size_t k = 0; k < a0.rows(); ++k) {
    Real acc = 0.0;
    for (std::size_t i : s) acc += std::norm(a0.entry(k, i));
    out[k] = acc;
  }
  return out;
}

std::vector<Real> gamma_numerators_iso(const DenseOperator& a0) {
  std::vector<Real> out(a0.rows(), 0.0);
  for (std::size_t k = 0; k < a0.rows(); ++k) {
    const Real m = a0.matrix().row(ix(k)).cwiseAbs().maxCoeff();
    out[k] = m * m;
  }
  return out;
}

std::vector<Real> lambda_enlarged_numerators_iso(const DenseOperator& a0, const IndexSet& s) {
  if (s.size() >= a0.cols()) throw ArgumentError("lambda_enlarged: S must be a proper subset");
  auto out = lambda_numerators_iso(a0, s);
  const IndexSet sc = s.complement(a0.cols());
  for (std::size_t k = 0; k < a0.rows(); ++k) {
    Real best = 0.0;
    for (std::size_t j : sc) best = std::max(best, std::norm(a0.entry(k, j)));
    out[k] += best;
  }
  return out;
}

Real max_ratio(const std::vector<Real>& numerators, const ProbabilityDistribution& pi) {
  if (numerators.size() != pi.size())
    throw DimensionError("coherence: distribution size " + std::to_string(pi.size()) + " != number of blocks " +
                         std::to_string(numerators.size()));
  Real best = 0.0;
  for (std::size_t k = 0; k < numerators.size(); ++k) {
    if (numerators[k] == 0.0) continue;
    if (pi[k] == 0.0)
      throw InfiniteCoherenceError("coherence: block " + std::to_string(k) +
                                   " has zero probability but contributes to the quantity");
    best = std::max(best, numerators[k] / pi[k]);
  }
  return best;
}

Real theta_block(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi) {
  return max_ratio(theta_numerators(dict, s), pi);
}

Real lambda_block(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi) {
  return max_ratio(lambda_numerators(dict, s), pi);
}

Real gamma_block(const BlockDictionary& dict, const ProbabilityDistribution& pi) {
  return max_ratio(gamma_numerators(dict), pi);
}

CoherenceReport coherence_iso(const DenseOperator& a0, const IndexSet& s, const ProbabilityDistribution& pi) {
  CoherenceReport r;
  r.theta = max_ratio(theta_numerators_iso(a0, s), pi);
  r.lambda = max_ratio(lambda_numerators_iso(a0, s), pi);
  r.gamma = max_ratio(gamma_numerators_iso(a0), pi);
  r.support = s;
  r.pi = pi;
  return r;
}

CoherenceReport coherence_block(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi) {
  CoherenceReport r;
  r.theta = theta_block(dict, s, pi);
  r.lambda = lambda_block(dict, s, pi);
  r.gamma = gamma_block(dict, pi);
  r.support = s;
  r.pi = pi;
  return r;
}

Real lambda_enlarged(const BlockDictionary& dict, const IndexSet& s, const ProbabilityDistribution& pi) {
  const std::size_t n = dict.dimension();
  check_support(s, n);
  if (s.size() >= n) throw ArgumentError("lambda_enlarged: S must be a proper subset");
  const IndexSet sc = s.complement(n);
  std::vector<Real> numerators(dict.num_blocks(), 0.0);
  for (std::size_t k = 0; k < dict.num_blocks(); ++k) {
    const DenseOperator& d = dict.block(k);
    // Row-side Gram of D_{k,S}; adding column j is a rank-one update d_j d_j^*.
    const Matrix ds = restrict_columns(d, s).matrix();
    const Matrix gram = ds * ds.adjoint();
    Real best = 0.0;
    for (std::size_t j : sc) {
      const auto col = d.matrix().col(ix(j));
      best = std::max(best, top_eigenvalue(gram + col * col.adjoint()));
    }
    numerators[k] = best;
  }
  return max_ratio(numerators, pi);
}

Real lambda_enlarged_iso(const DenseOperator& a0, const IndexSet& s, const ProbabilityDistribution& pi) {
  return max_ratio(lambda_enlarged_numerators_iso(a0, s), pi);
}

std::vector<Real> levels_estimates_1d(const std::vector<std::size_t>& sparsities, LevelWeighting kind) {
  const double w = kind == LevelWeighting::theta ? 0.5 : 1.0;
  std::vector<Real> out(sparsities.size(), 0.0);
  for (std::size_t j = 0; j < sparsities.size(); ++j) {
    Real acc = 0.0;
    for (std::size_t p = 0; p < sparsities.size(); ++p) {
      const double d = static_cast<double>(j > p ? j - p : p - j);
      acc += std::exp2(-w * d) * static_cast<double>(sparsities[p]);
    }
    out[j] = std::exp2(-static_cast<double>(j)) * acc;
  }
  return out;
}

ConditionCheck recovery_condition_report(const CoherenceReport& report, std::size_t n, Real epsilon, std::size_t m,
                                         const ConditionConstants& c) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ArgumentError("recovery_condition_report: epsilon must lie in (0,1)");
  if (m < 1) throw ArgumentError("recovery_condition_report: m must be >= 1");
  if (n < 1) throw ArgumentError("recovery_condition_report: n must be >= 1");
  const Real md = static_cast<Real>(m);
  const Real nd = static_cast<Real>(n);
  const Real s = static_cast<Real>(report.support.size());

  auto m_condition = [md](Real required) {
    return Condition{md >= required, md - required, required};
  };

  ConditionCheck out;
  out.constants = c;
  if (report.support.empty()) {
    // Nothing to recover: every condition holds vacuously.
    out.theta_noiseless = out.theta_noisy = out.oracle = out.lambda_m = m_condition(0.0);
    out.lambda_gamma = Condition{true, 0.0, 0.0};
    if (report.lambda_enlarged) out.enlarged = m_condition(0.0);
    return out;
  }

  const Real log6 = std::log(6.0 * nd / epsilon);
  const Real log3 = std::log(3.0 * nd / epsilon);
  out.theta_noiseless = m_condition(c.theta_noiseless * report.theta * log6 * log6);
  out.theta_noisy = m_condition(c.theta_noisy * report.theta * log6 * log6);
  out.oracle = m_condition(c.oracle * report.lambda * std::log(2.0 * s / epsilon));
  const Real gamma_required = c.lambda_gamma * report.gamma * log3;
  out.lambda_gamma = Condition{report.lambda >= gamma_required, report.lambda - gamma_required, gamma_required};
  out.lambda_m = m_condition(c.lambda_m * report.lambda * log3);
  if (report.lambda_enlarged) {
    const Real loge = std::log(6.0 * (s + 1.0) * (nd - s) / epsilon);
    out.enlarged = m_condition(c.enlarged * *report.lambda_enlarged * loge * log6);
  }
  return out;
}

}  // namespace vds
