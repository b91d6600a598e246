#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vds/coherence.hpp"
#include "vds/sampling.hpp"
#include "vds/transforms.hpp"

using namespace vds;
using oracle::cd;

namespace {

// Splits the rows of a random unitary into consecutive blocks of the given sizes.
BlockDictionary random_dictionary(std::size_t n, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  const DenseOperator u = oracle::random_unitary(n, seed);
  std::vector<IndexSet> groups;
  std::size_t start = 0;
  for (std::size_t p : sizes) {
    groups.push_back(IndexSet::range(start, start + p));
    start += p;
  }
  return BlockDictionary::from_partition(u, groups);
}

struct OracleNumerators {
  std::vector<double> theta, lambda, gamma;
};

OracleNumerators oracle_numerators(const BlockDictionary& dict, const IndexSet& s) {
  OracleNumerators out;
  for (const DenseOperator& b : dict.blocks()) {
    const oracle::Grid g = oracle::to_grid(b);
    const oracle::Grid gs = oracle::columns(g, s.ids());
    out.theta.push_back(s.empty() ? 0.0 : oracle::row_l1_max(oracle::multiply_adjoint(g, gs)));
    const double l = s.empty() ? 0.0 : oracle::spectral_norm(gs);
    out.lambda.push_back(l * l);
    double gm = 0.0;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double c = 0.0;
      for (std::size_t i = 0; i < b.rows(); ++i) c += std::norm(g[i][j]);
      gm = std::max(gm, c);
    }
    out.gamma.push_back(gm);
  }
  return out;
}

double ratio_max(const std::vector<double>& num, const ProbabilityDistribution& pi) {
  double best = 0.0;
  for (std::size_t k = 0; k < num.size(); ++k)
    if (num[k] > 0.0) best = std::max(best, num[k] / pi[k]);
  return best;
}

}  // namespace

TEST_CASE("block quantities on singleton identity rows") {
  const BlockDictionary id = BlockDictionary::from_rows(DenseOperator::identity(4));
  const auto uniform = ProbabilityDistribution::uniform(4);
  CHECK(theta_block(id, IndexSet{1}, uniform) == doctest::Approx(4.0));
  CHECK(lambda_block(id, IndexSet{1}, uniform) == doctest::Approx(4.0));
  CHECK(gamma_block(id, uniform) == doctest::Approx(4.0));
  CHECK(lambda_block(id, IndexSet{}, uniform) == 0.0);

  // All mass on the only contributing block: 1 / 1.
  const ProbabilityDistribution point({0.0, 1.0, 0.0, 0.0});
  CHECK(theta_block(id, IndexSet{1}, point) == doctest::Approx(1.0));
  // A zero-probability block with a positive numerator makes Theta infinite.
  CHECK_THROWS_AS(theta_block(id, IndexSet{2}, point), InfiniteCoherenceError);
  CHECK_THROWS_AS(gamma_block(id, point), InfiniteCoherenceError);
}

TEST_CASE("block quantities match direct enumeration") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BlockDictionary dict = random_dictionary(4, {2, 2}, 50 + seed);
    const IndexSet s{1, 2};
    const auto uniform = ProbabilityDistribution::uniform(2);
    const auto o = oracle_numerators(dict, s);
    CHECK(theta_block(dict, s, uniform) == doctest::Approx(ratio_max(o.theta, uniform)).epsilon(1e-12));
    CHECK(lambda_block(dict, s, uniform) == doctest::Approx(ratio_max(o.lambda, uniform)).epsilon(1e-10));
    CHECK(gamma_block(dict, uniform) == doctest::Approx(ratio_max(o.gamma, uniform)).epsilon(1e-12));
  }
}

TEST_CASE("Fourier rows are totally incoherent") {
  const BlockDictionary f = BlockDictionary::from_rows(fourier_matrix(16));
  CHECK(gamma_block(f, ProbabilityDistribution::uniform(16)) == doctest::Approx(1.0));
}

TEST_CASE("coherence_iso examples") {
  const auto uniform = ProbabilityDistribution::uniform(8);
  const CoherenceReport r = coherence_iso(DenseOperator::identity(8), IndexSet{0, 5}, uniform);
  CHECK(r.theta == doctest::Approx(8.0));
  CHECK(r.lambda == doctest::Approx(8.0));
  CHECK(r.gamma == doctest::Approx(8.0));

  const CoherenceReport f = coherence_iso(fourier_matrix(8), IndexSet{1, 2, 6}, uniform);
  CHECK(f.lambda == doctest::Approx(3.0));
}

TEST_CASE("lambda_enlarged examples") {
  const auto u4 = ProbabilityDistribution::uniform(4);
  CHECK(lambda_enlarged_iso(DenseOperator::identity(4), IndexSet{1}, u4) == doctest::Approx(4.0));
  CHECK(lambda_enlarged_iso(fourier_matrix(4), IndexSet{}, u4) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lambda_enlarged_iso(DenseOperator::identity(4), IndexSet::full(4), u4), ArgumentError);
  const BlockDictionary id = BlockDictionary::from_rows(DenseOperator::identity(4));
  CHECK(lambda_enlarged(id, IndexSet{1}, u4) == doctest::Approx(4.0));
}

TEST_CASE("levels_estimates_1d hand values") {
  auto g = levels_estimates_1d({1, 0}, LevelWeighting::lambda);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.25));
  g = levels_estimates_1d({1, 0}, LevelWeighting::theta);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.5 / std::sqrt(2.0)));
  for (double v : levels_estimates_1d({0, 0, 0}, LevelWeighting::theta)) CHECK(v == 0.0);
}

TEST_CASE("recovery_condition_report") {
  CoherenceReport r;
  r.theta = r.lambda = r.gamma = 0.0;
  const ConditionCheck empty = recovery_condition_report(r, 16, 0.1, 1);
  CHECK(empty.theta_noiseless.satisfied);
  CHECK(empty.theta_noisy.satisfied);
  CHECK(empty.oracle.satisfied);
  CHECK(empty.lambda_gamma.satisfied);
  CHECK(empty.lambda_m.satisfied);

  // m = 82 Theta ln^2(6n/eps) exactly: pick Theta = 1 / ln^2(6n/eps).
  r.support = IndexSet{0};
  const double l6 = std::log(6.0 * 4.0 / 0.5);
  r.theta = 1.0 / (l6 * l6);
  r.lambda = r.gamma = 1.0;
  ConditionCheck c = recovery_condition_report(r, 4, 0.5, 82);
  CHECK(std::abs(c.theta_noiseless.margin) <= 1e-12);
  CHECK(c.theta_noiseless.required == doctest::Approx(82.0));
  CHECK(recovery_condition_report(r, 4, 0.5, 83).theta_noiseless.satisfied);
  CHECK_FALSE(recovery_condition_report(r, 4, 0.5, 81).theta_noiseless.satisfied);

  // ln(3n/eps) = 2 with n = 2: Lambda must reach 50 * 1 * 2 = 100.
  const double eps = 6.0 / std::exp(2.0);
  c = recovery_condition_report(r, 2, eps, 1000);
  CHECK_FALSE(c.lambda_gamma.satisfied);
  CHECK(c.lambda_gamma.required == doctest::Approx(100.0));

  CHECK_THROWS_AS(recovery_condition_report(r, 4, 1.0, 10), ArgumentError);
  CHECK_THROWS_AS(recovery_condition_report(r, 4, 0.5, 0), ArgumentError);
}

TEST_CASE("property: Lambda <= Theta on random dictionaries") {
  std::mt19937_64 gen(3);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t n = 8;
    const BlockDictionary dict = random_dictionary(n, {1, 3, 2, 2}, 700 + seed);
    const IndexSet s(oracle::random_subset(n, 1 + seed % 4, gen));
    std::vector<double> w(4);
    for (double& v : w) v = 0.1 + std::uniform_real_distribution<double>(0, 1)(gen);
    const auto pi = ProbabilityDistribution::from_masses(w);
    const CoherenceReport r = coherence_block(dict, s, pi);
    CHECK(r.lambda <= r.theta * (1.0 + 1e-12));
    CHECK(r.lambda >= 0.0);
    CHECK(r.gamma > 0.0);
  }
}

TEST_CASE("property: value_k / pi_k grows as pi_k shrinks") {
  const BlockDictionary dict = random_dictionary(6, {2, 2, 2}, 91);
  const IndexSet s{0, 4};
  const auto num = theta_numerators(dict, s);
  double previous = 0.0;
  for (double p : {0.6, 0.4, 0.2, 0.1, 0.05}) {
    const auto pi = ProbabilityDistribution::from_masses(std::vector<double>{p, (1 - p) / 2, (1 - p) / 2});
    const double v = num[0] / pi[0];
    CHECK(v >= previous);
    CHECK(theta_block(dict, s, pi) >= v * (1.0 - 1e-12));
    previous = v;
  }
}

TEST_CASE("property: isolated quantities equal the singleton-row block quantities") {
  std::mt19937_64 gen(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 8;
    const DenseOperator a0 = seed % 2 ? oracle::random_unitary(n, 900 + seed) : fourier_haar_1d(n).a0;
    const BlockDictionary rows = BlockDictionary::from_rows(a0);
    const IndexSet s(oracle::random_subset(n, 1 + seed % 5, gen));
    std::vector<double> w(n);
    for (double& v : w) v = 0.1 + std::uniform_real_distribution<double>(0, 1)(gen);
    const auto pi = ProbabilityDistribution::from_masses(w);
    const CoherenceReport iso = coherence_iso(a0, s, pi);
    const CoherenceReport blk = coherence_block(rows, s, pi);
    CHECK(iso.theta == doctest::Approx(blk.theta).epsilon(1e-13));
    CHECK(iso.lambda == doctest::Approx(blk.lambda).epsilon(1e-13));
    CHECK(iso.gamma == doctest::Approx(blk.gamma).epsilon(1e-13));
    CHECK(lambda_enlarged_iso(a0, s, pi) == doctest::Approx(lambda_enlarged(rows, s, pi)).epsilon(1e-12));
  }
}

TEST_CASE("property: the w = 1 level estimate lower-bounds the w = 1/2 one") {
  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::size_t> s(1 + rep % 10);
    for (auto& v : s) v = gen() % 20;
    const auto l = levels_estimates_1d(s, LevelWeighting::lambda);
    const auto t = levels_estimates_1d(s, LevelWeighting::theta);
    for (std::size_t j = 0; j < s.size(); ++j) CHECK(l[j] <= t[j]);
  }
}

TEST_CASE("BlockDictionary rejects non-isometric blocks") {
  const DenseOperator half = DenseOperator::from_rows({{1.0, 0.0}});
  CHECK_THROWS_AS(BlockDictionary(std::vector<DenseOperator>{half}), ArgumentError);
}
