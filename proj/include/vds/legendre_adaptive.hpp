#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vds/distribution.hpp"
#include "vds/operators.hpp"
#include "vds/solvers.hpp"

namespace vds {

enum class AdaptVariant { adapt_i, adapt_ii };
std::string to_string(AdaptVariant v);
AdaptVariant adapt_variant_from_string(const std::string& name);  // ConfigError

// Candidate sampling points: the n Gauss-Legendre nodes, or `points`
// equispaced interior points of (-1, 1) (endpoints excluded).
struct SamplingGrid {
  enum class Kind { gauss, uniform } kind = Kind::gauss;
  std::size_t points = 0;  // uniform grid size; ignored for gauss

  static SamplingGrid gauss() { return {}; }
  static SamplingGrid uniform(std::size_t points) { return {Kind::uniform, points}; }
};

// Rows d_j = sqrt(w_j / 2) (L_1(t_j), ..., L_n(t_j)) for every grid point t_j,
// with w_j the Gauss weights or 2 / points on the uniform grid. On the Gauss
// grid the rows form the orthogonal matrix A0.
struct LegendreGrid {
  DenseOperator rows;
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

LegendreGrid legendre_grid(std::size_t n, const SamplingGrid& grid);

// Weights proportional to (1 - t^2)^{-1/2}; requires |t| < 1.
ProbabilityDistribution chebyshev_reference(const std::vector<Real>& nodes);

struct AdaptOptions {
  AdaptVariant variant = AdaptVariant::adapt_ii;
  std::size_t s = 5;
  std::size_t n = 100;    // number of Legendre polynomials
  std::size_t K = 5;      // iterations
  std::size_t m1 = 10;    // draws per iteration
  Real eta = 0.0;
  std::uint64_t seed = 0;
  SamplingGrid grid;
  SolverOptions solver;
};

struct MeasureTrace {
  std::vector<ProbabilityDistribution> measures;  // pi^(k), k = 1..K
  std::vector<Real> dist_to_cheb;                 // ||pi^(k) - pi_Cheb||_2
  std::vector<Real> l2_error;                     // ||x_hat^(k) - x||_2
};

struct AdaptResult {
  ComplexVector estimate;
  MeasureTrace trace;
  std::vector<IndexSet> supports;                  // S^(k-1) used to build pi^(k); empty for k = 1
  std::vector<std::vector<std::size_t>> draws;     // grid indices drawn at each iteration
  std::vector<SolverResult> solves;
};

// Top-`size` magnitude indices of x, ties to the lower index.
IndexSet top_magnitude_support(const ComplexVector& x, std::size_t size);

// The adaptive loop for a target given by its Legendre coefficients.
// Requires s <= m1 and m1 * K <= number of grid points.
AdaptResult run_adapt(const ComplexVector& coefficients, const AdaptOptions& opts);
// Pointwise target: coefficients are obtained by Gauss quadrature of f.
AdaptResult run_adapt(const std::function<Real(Real)>& f, const AdaptOptions& opts);

enum class BaselineMode { unif_continuous, unif_rows, chebyshev };
std::string to_string(BaselineMode m);
BaselineMode baseline_mode_from_string(const std::string& name);  // ConfigError

struct SampledSystem {
  DenseOperator a;                  // m x n, isotropic: E[A^* A] = Id
  std::vector<Real> points;         // sample locations in (-1, 1)
  std::vector<std::size_t> row_ids; // drawn grid rows (unif_rows only)
};

// unif_rows draws Gauss-Legendre rows uniformly and scales them by
// 1 / sqrt(m pi_J); unif_continuous uses rows L(t) / sqrt(m) with t uniform;
// chebyshev uses arcsine draws and rows sqrt(pi/2) (1 - t^2)^{1/4} L(t) / sqrt(m).
SampledSystem nonadaptive_baselines(BaselineMode mode, std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace vds
