#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vds/signals.hpp"

using namespace vds;

TEST_CASE("random_support extremes and reproducibility") {
  CHECK(random_support(10, 0, 1).empty());
  CHECK(random_support(10, 10, 1) == IndexSet::full(10));
  CHECK(random_support(100, 7, 3) == random_support(100, 7, 3));
  CHECK(random_support(100, 7, 3).size() == 7);
  CHECK_THROWS(random_support(5, 6, 1));
}

TEST_CASE("support_in_levels respects the per-level counts") {
  const SubbandPartition p(64, PartitionKind::wavelet);
  LevelSparsity zero{std::vector<std::size_t>(p.num_levels(), 0)};
  CHECK(support_in_levels(p, zero, 1).empty());
  LevelSparsity all;
  for (const auto& l : p.levels()) all.counts.push_back(l.size());
  CHECK(support_in_levels(p, all, 1) == IndexSet::full(64));

  LevelSparsity some{{1, 2, 0, 3, 5, 9}};
  const IndexSet s = support_in_levels(p, some, 8);
  CHECK(measure_level_sparsity(p, s).counts == some.counts);
  CHECK(some.total() == 20);

  LevelSparsity too_many{{3, 0, 0, 0, 0, 0}};
  CHECK_THROWS_AS(too_many.validate(p), ArgumentError);
  LevelSparsity wrong_length{{1, 1}};
  CHECK_THROWS_AS(wrong_length.validate(p), ArgumentError);
}

TEST_CASE("anisotropic row sparsities on a hand-built support") {
  const std::size_t side = 8;
  const SubbandPartition p(side, PartitionKind::wavelet);
  CHECK(anisotropic_row_sparsities(IndexSet{}, p) == std::vector<std::size_t>{0, 0, 0});

  // Row 0 holds columns {0,1} of the coarse band and {4,5,6} of the finest;
  // row 3 holds columns {2,3} of the middle band and column 0.
  std::vector<std::size_t> cells;
  for (std::size_t q : {0u, 1u, 4u, 5u, 6u}) cells.push_back(grid_index(0, q, side));
  for (std::size_t q : {0u, 2u, 3u}) cells.push_back(grid_index(3, q, side));
  const IndexSet s(cells);
  CHECK(anisotropic_row_sparsities(s, p) == std::vector<std::size_t>{2, 2, 3});

  // One full row of the finest band: s^r_J = side / 2, others zero.
  std::vector<std::size_t> row;
  for (std::size_t q : p.level(2)) row.push_back(grid_index(5, q, side));
  CHECK(anisotropic_row_sparsities(IndexSet(row), p) == std::vector<std::size_t>{0, 0, 4});
}

TEST_CASE("property: row sparsities are invariant under moves inside a cell and match columns of the transpose") {
  std::mt19937_64 gen(12);
  const std::size_t side = 16;
  const SubbandPartition p(side, PartitionKind::wavelet);
  for (int rep = 0; rep < 30; ++rep) {
    const IndexSet s(oracle::random_subset(side * side, 5 + rep, gen));
    const auto sr = anisotropic_row_sparsities(s, p);
    CHECK(sr == anisotropic_column_sparsities(transpose_support(s, side), p));
    CHECK(transpose_support(transpose_support(s, side), side) == s);

    // Permute column positions within each (row, band) cell.
    std::vector<std::size_t> moved;
    for (std::size_t t = 0; t < side; ++t)
      for (const IndexSet& band : p.levels()) {
        std::size_t count = 0;
        for (std::size_t q : band) count += s.contains(grid_index(t, q, side));
        std::vector<std::size_t> cols(band.begin(), band.end());
        std::shuffle(cols.begin(), cols.end(), gen);
        for (std::size_t i = 0; i < count; ++i) moved.push_back(grid_index(t, cols[i], side));
      }
    CHECK(anisotropic_row_sparsities(IndexSet(moved), p) == sr);
  }
}

TEST_CASE("make_signal sign models and magnitudes") {
  CHECK(make_signal(8, IndexSet{}, SignModel::rademacher, MagnitudeLaw::constant, 1).coefficients.isZero());

  const IndexSet s{1, 4, 6};
  const SignalInstance r = make_signal(8, s, SignModel::rademacher, MagnitudeLaw::constant, 2);
  for (std::size_t i = 0; i < 8; ++i) {
    if (s.contains(i)) CHECK((r.coefficients(Eigen::Index(i)) == Complex(1.0) || r.coefficients(Eigen::Index(i)) == Complex(-1.0)));
    else CHECK(r.coefficients(Eigen::Index(i)) == Complex(0.0));
  }

  const SignalInstance st = make_signal(64, IndexSet::full(64), SignModel::steinhaus, MagnitudeLaw::constant, 3);
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(std::abs(std::abs(st.coefficients(i)) - 1.0) <= 1e-12);

  const SubbandPartition p(16, PartitionKind::wavelet);
  const SignalInstance d = make_signal(16, IndexSet{0, 5, 12}, SignModel::steinhaus, MagnitudeLaw::level_decay, 4, &p);
  std::size_t idx = 0;
  for (std::size_t i : d.support) {
    const double expected = std::exp2(-double(p.level_of(i)));
    CHECK(d.magnitudes[idx++] == doctest::Approx(expected));
    CHECK(std::abs(d.coefficients(Eigen::Index(i))) == doctest::Approx(expected));
  }
  CHECK_THROWS(make_signal(16, IndexSet{0}, SignModel::rademacher, MagnitudeLaw::level_decay, 4));
  CHECK_THROWS_AS(sign_model_from_string("gaussian"), ConfigError);
}

TEST_CASE("property: Rademacher signs are centred") {
  const std::size_t n = 8, draws = 10000;
  std::vector<double> mean(n, 0.0);
  for (std::size_t t = 0; t < draws; ++t) {
    const SignalInstance x = make_signal(n, IndexSet::full(n), SignModel::rademacher, MagnitudeLaw::constant, t);
    for (std::size_t i = 0; i < n; ++i) mean[i] += x.coefficients(Eigen::Index(i)).real() / double(draws);
  }
  for (double m : mean) CHECK(std::abs(m) <= 4.0 / std::sqrt(double(draws)));
}
