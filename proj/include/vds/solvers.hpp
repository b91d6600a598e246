#pragma once

#include <cstddef>
#include <optional>

#include "vds/operators.hpp"

namespace vds {

struct SolverOptions {
  std::size_t max_iters = 0;  // 0 selects 50 * cols(A)
  Real kkt_tol = 1e-7;
  Real step_ratio = 0.99;     // sigma = tau = step_ratio / ||A||_{2->2} initially
  // Residual balancing of the primal/dual steps (sigma * tau stays fixed).
  bool adaptive_steps = true;
  // Restart from the running average or the current iterate, whichever has
  // the smaller KKT error, once that error has decayed enough.
  bool restarts = true;
  // Least-squares refit on the final support, kept only when it is feasible
  // and does not increase the l1 norm. With eta = 0 and an unconverged
  // iterate, supports grown by |A^* u| are also tried and a refit is kept
  // when its sign pattern carries a dual certificate.
  bool polish = true;
  std::size_t check_every = 10;
};

struct SolverResult {
  ComplexVector x_hat;
  std::size_t iterations = 0;
  // max(||A x - y|| - eta, 0) / (1 + ||y||)
  Real primal_residual = 0.0;
  // max_i distance of (-A^* u)_i to the subdifferential of |.| at x_i
  Real dual_residual = 0.0;
  // |l1(x) - dual(u)| / (1 + l1(x)), u scaled into the dual feasible set
  Real feasibility_gap = 0.0;
  // KKT residuals within kkt_tol, before or after polishing, or a certified refit.
  bool converged = false;
  bool polished = false;
};

// min ||z||_1 s.t. ||y - A z||_2 <= eta by primal-dual hybrid gradient
// iterations. eta = 0 is equality-constrained basis pursuit. Throws
// InfeasibleError when the dual iterates diverge (y far outside the range of
// A), ArgumentError on bad inputs.
SolverResult solve_qbp(const DenseOperator& a, const ComplexVector& y, Real eta, const SolverOptions& opts = {});
// Same iterations on a matrix-free map; ||A|| comes from power iteration.
SolverResult solve_qbp(const LinearMap& a, const ComplexVector& y, Real eta, const SolverOptions& opts = {});

struct StableParams {
  Real delta = 0.0;                // ||A_S^* A_S - Id||_{2->2}
  Real t = 0.0;                    // max_{l in S^c} ||A_S^* A e_l||_2
  Real gamma = 0.0;                // ||v_S - sign(x_S)||_2, zero for the exact construction
  Real theta = 0.0;                // max_{l in S^c} |v_l|
  std::optional<Real> tau;         // 1 / sqrt(1 - delta) when delta < 1
  std::optional<Real> rho;         // theta + t gamma / (1 - delta) when delta < 1
};

struct CertificateReport {
  bool injective = false;
  Real sigma_min = 0.0;            // of A_S
  Real max_offsupport = 0.0;
  bool exact_recovery_certified = false;  // injective and max_offsupport < 1
  ComplexVector v;                 // A^* A_S (A_S^* A_S)^{-1} sign(x_S), empty when not injective
  StableParams stable;
};

// signs: one unit-modulus entry per element of S, in S order.
CertificateReport dual_certificate(const DenseOperator& a, const IndexSet& s, const ComplexVector& signs);

// Oracle least-squares estimator supported on S; throws RankError.
ComplexVector oracle_recover(const DenseOperator& a, const IndexSet& s, const ComplexVector& y);

struct OracleBound {
  Real noise_term = 0.0;       // ||eps||_2 / sigma_min(A_S)
  Real offsupport_term = 0.0;  // ||(A_S^* A_S)^{-1}|| ||A_S^* A_{S^c}||_{1->2} ||x_{S^c}||_1
  Real total() const { return noise_term + offsupport_term; }
};

// Deterministic error bound for the oracle estimator when y = A x + eps and
// x may carry mass off S.
OracleBound oracle_error_bound(const DenseOperator& a, const IndexSet& s, const ComplexVector& x,
                               const ComplexVector& eps);

// Exhaustive search over supports of size <= s_max (n <= 16, s_max <= 3).
// Returns the sparsest exact solution (residual <= 1e-10 (1 + ||y||)), ties
// by smaller l1 then lexicographic support; without an exact solution, the
// least-residual one under the same tie rules.
ComplexVector brute_force_l0(const DenseOperator& a, const ComplexVector& y, std::size_t s_max);

}  // namespace vds
