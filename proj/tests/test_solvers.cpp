#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vds/solvers.hpp"

using namespace vds;
using oracle::cd;

namespace {

double l1(const ComplexVector& x) { return x.cwiseAbs().sum(); }

struct Instance {
  DenseOperator a;
  IndexSet s;
  ComplexVector x;
  ComplexVector signs;
};

// Gaussian rows scaled by 1/sqrt(m), s-sparse x with unit Rademacher entries.
Instance gaussian_instance(std::size_t m, std::size_t n, std::size_t s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Instance in;
  in.a = DenseOperator(oracle::gaussian_matrix(m, n, seed, false).matrix() / std::sqrt(double(m)));
  in.s = IndexSet(oracle::random_subset(n, s, gen));
  in.x = ComplexVector::Zero(Eigen::Index(n));
  in.signs.resize(Eigen::Index(s));
  Eigen::Index r = 0;
  for (std::size_t i : in.s) {
    const double sign = (gen() & 1) ? 1.0 : -1.0;
    in.x(Eigen::Index(i)) = sign;
    in.signs(r++) = sign;
  }
  return in;
}

}  // namespace

TEST_CASE("solve_qbp on the identity") {
  const DenseOperator id = DenseOperator::identity(6);
  ComplexVector x(6);
  x << cd(1.0), cd(0.0), cd(-2.0, 1.0), cd(0.0), cd(0.5), cd(0.0);
  SolverResult r = solve_qbp(id, x, 0.0);
  CHECK(r.converged);
  CHECK((r.x_hat - x).norm() <= 1e-8);

  r = solve_qbp(id, x, x.norm());
  CHECK(r.x_hat.norm() <= 1e-8);

  r = solve_qbp(id, ComplexVector::Zero(6), 0.0);
  CHECK(r.x_hat.norm() <= 1e-12);

  CHECK_THROWS_AS(solve_qbp(id, ComplexVector::Zero(5), 0.0), DimensionError);
  CHECK_THROWS_AS(solve_qbp(id, x, -1.0), ArgumentError);
}

TEST_CASE("converged results satisfy the declared KKT bounds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance in = gaussian_instance(20, 40, 3, 10 + seed);
    const ComplexVector y = in.a.apply(in.x);
    for (double eta : {0.0, 0.05, 0.3}) {
      SolverOptions opts;
      const SolverResult r = solve_qbp(in.a, y, eta, opts);
      if (!r.converged) continue;
      CHECK((in.a.apply(r.x_hat) - y).norm() <= eta + opts.kkt_tol * (1.0 + y.norm()));
      if (!r.polished) {
        CHECK(r.primal_residual <= opts.kkt_tol);
        CHECK(r.dual_residual <= opts.kkt_tol);
      }
    }
  }
}

TEST_CASE("property: no feasible support refit has a smaller l1 norm") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Instance in = gaussian_instance(24, 48, 4, 50 + seed);
    const ComplexVector noise = 0.02 * oracle::gaussian_matrix(24, 1, 60 + seed).col(0);
    const ComplexVector y = in.a.apply(in.x) + noise;
    const double eta = noise.norm() * 1.1;
    const SolverResult r = solve_qbp(in.a, y, eta);
    REQUIRE(r.converged);
    std::vector<std::size_t> supp;
    for (Eigen::Index i = 0; i < r.x_hat.size(); ++i)
      if (std::abs(r.x_hat(i)) > 1e-9) supp.push_back(std::size_t(i));
    if (supp.empty() || supp.size() > 24) continue;
    const SupportFit fit = least_squares_on_support(in.a, IndexSet(supp), y);
    const bool feasible = (in.a.apply(fit.x) - y).norm() <= eta;
    if (feasible) CHECK(l1(fit.x) >= l1(r.x_hat) - 1e-6 * (1.0 + l1(r.x_hat)));
  }
}

TEST_CASE("property: the l1 norm of the solution is non-increasing in eta") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance in = gaussian_instance(16, 32, 3, 80 + seed);
    const ComplexVector y = in.a.apply(in.x);
    double previous = std::numeric_limits<double>::infinity();
    for (double eta : {0.0, 0.1, 0.2, 0.5, 1.0, 2.0}) {
      const SolverResult r = solve_qbp(in.a, y, eta);
      CHECK(l1(r.x_hat) <= previous + 1e-6);
      previous = l1(r.x_hat);
    }
  }
}

TEST_CASE("matrix-free and dense solves agree") {
  const Instance in = gaussian_instance(20, 40, 3, 123);
  const ComplexVector y = in.a.apply(in.x);
  const SolverResult d = solve_qbp(in.a, y, 0.0);
  const SolverResult m = solve_qbp(LinearMap::borrow(in.a), y, 0.0);
  CHECK(d.converged);
  CHECK(m.converged);
  CHECK((d.x_hat - m.x_hat).norm() <= 1e-6);
}

TEST_CASE("dual_certificate examples") {
  const DenseOperator id = DenseOperator::identity(5);
  ComplexVector signs(2);
  signs << cd(1.0), cd(0.0, -1.0);
  CertificateReport c = dual_certificate(id, IndexSet{1, 3}, signs);
  CHECK(c.injective);
  CHECK(c.max_offsupport == doctest::Approx(0.0));
  CHECK(c.exact_recovery_certified);
  CHECK(c.stable.delta == doctest::Approx(0.0));
  REQUIRE(c.stable.tau);
  CHECK(*c.stable.tau == doctest::Approx(1.0));

  // Column 2 duplicates column 0: the certificate sees an inner product of one.
  DenseOperator dup = oracle::gaussian_matrix(6, 4, 9, false);
  dup.matrix().col(2) = dup.matrix().col(0);
  ComplexVector one(1);
  one << cd(1.0);
  c = dual_certificate(dup, IndexSet{0}, one);
  CHECK(c.max_offsupport >= 1.0 - 1e-12);
  CHECK_FALSE(c.exact_recovery_certified);

  c = dual_certificate(dup, IndexSet{0, 2}, ComplexVector::Ones(2));
  CHECK_FALSE(c.injective);
  CHECK_FALSE(c.exact_recovery_certified);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseOperator u = oracle::random_unitary(8, 40 + seed);
    c = dual_certificate(u, IndexSet{0, 2, 5}, ComplexVector::Ones(3));
    CHECK(c.exact_recovery_certified);
  }
}

TEST_CASE("dual_certificate stable parameters follow their definitions") {
  const Instance in = gaussian_instance(30, 20, 3, 77);
  const CertificateReport c = dual_certificate(in.a, in.s, in.signs);
  const DenseOperator as = restrict_columns(in.a, in.s);
  const auto g = (as.matrix().adjoint() * as.matrix() - DenseOperator::Matrix::Identity(3, 3)).eval();
  const auto ev = oracle::hermitian_eigenvalues(oracle::to_grid(DenseOperator(g)));
  CHECK(c.stable.delta == doctest::Approx(std::max(std::abs(ev.front()), std::abs(ev.back()))).epsilon(1e-10));
  double t = 0.0;
  for (std::size_t l : in.s.complement(20)) t = std::max(t, (as.matrix().adjoint() * in.a.matrix().col(Eigen::Index(l))).norm());
  CHECK(c.stable.t == doctest::Approx(t).epsilon(1e-12));
  CHECK(c.stable.gamma == 0.0);
  CHECK(c.stable.theta == doctest::Approx(c.max_offsupport));
  if (c.stable.delta < 1.0) {
    REQUIRE(c.stable.rho);
    CHECK(*c.stable.rho == doctest::Approx(c.stable.theta));
  }
  CHECK(sigma_min(as) == doctest::Approx(c.sigma_min).epsilon(1e-10));
}

TEST_CASE("oracle_recover and its deterministic error bound") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance in = gaussian_instance(20, 30, 4, 200 + seed);
    CHECK((oracle_recover(in.a, in.s, in.a.apply(in.x)) - in.x).norm() <= 1e-10);

    const ComplexVector eps = 0.1 * oracle::gaussian_matrix(20, 1, 300 + seed).col(0);
    const ComplexVector xs = oracle_recover(in.a, in.s, in.a.apply(in.x) + eps);
    const double smin = oracle::smallest_singular_value(oracle::columns(oracle::to_grid(in.a), in.s.ids()));
    CHECK((in.x - xs).norm() * smin <= eps.norm() + 1e-9);

    // Mass off S: the bound gains the off-support term and still holds.
    ComplexVector x = in.x;
    x(Eigen::Index(in.s.complement(30)[0])) = 0.05;
    const ComplexVector y = in.a.apply(x) + eps;
    const OracleBound b = oracle_error_bound(in.a, in.s, x, eps);
    CHECK(b.offsupport_term > 0.0);
    CHECK((restrict_vector(x, in.s) - restrict_vector(oracle_recover(in.a, in.s, y), in.s)).norm() <= b.total() + 1e-9);
  }
  DenseOperator dup = DenseOperator::identity(3);
  dup.matrix().col(1) = dup.matrix().col(0);
  CHECK_THROWS_AS(oracle_recover(dup, IndexSet{0, 1}, ComplexVector::Ones(3)), RankError);
}

TEST_CASE("brute_force_l0 examples") {
  const Instance in = gaussian_instance(6, 10, 1, 5);
  CHECK((brute_force_l0(in.a, in.a.apply(in.x), 2) - in.x).norm() <= 1e-10);
  CHECK(brute_force_l0(in.a, ComplexVector::Zero(6), 2).isZero());
  CHECK_THROWS_AS(brute_force_l0(DenseOperator(4, 17), ComplexVector::Zero(4), 1), ArgumentError);
}

TEST_CASE("certified instances are recovered by the solver and by exhaustive search") {
  std::size_t certified = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance in = gaussian_instance(6, 10, 1 + seed % 2, 400 + seed);
    const CertificateReport c = dual_certificate(in.a, in.s, in.signs);
    if (!c.exact_recovery_certified) continue;
    ++certified;
    const ComplexVector y = in.a.apply(in.x);
    const SolverResult r = solve_qbp(in.a, y, 0.0);
    CHECK((r.x_hat - in.x).norm() <= 1e-6 * in.x.norm());
    CHECK((r.x_hat - brute_force_l0(in.a, y, 2)).norm() <= 1e-6);
  }
  CHECK(certified > 5);
}

TEST_CASE("a truncated basis pursuit solve still returns the certified minimiser") {
  std::size_t certified = 0, exact = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance in = gaussian_instance(20, 40, 3, 700 + seed);
    if (!dual_certificate(in.a, in.s, in.signs).exact_recovery_certified) continue;
    ++certified;
    SolverOptions o;
    o.max_iters = 20;
    const SolverResult r = solve_qbp(in.a, in.a.apply(in.x), 0.0, o);
    // Whenever the flag is raised the answer is the unique minimiser.
    if (r.converged) {
      ++exact;
      CHECK((r.x_hat - in.x).norm() <= 1e-10);
    }
  }
  CHECK(certified > 5);
  CHECK(exact > 0);
}
