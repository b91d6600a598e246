#include "vds/legendre_adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vds/rng.hpp"
#include "vds/transforms.hpp"

namespace vds {

namespace {

using Matrix = DenseOperator::Matrix;

}  // namespace

std::string to_string(AdaptVariant v) { return v == AdaptVariant::adapt_i ? "adapt_i" : "adapt_ii"; }

AdaptVariant adapt_variant_from_string(const std::string& name) {
  if (name == "adapt_i" || name == "I") return AdaptVariant::adapt_i;
  if (name == "adapt_ii" || name == "II") return AdaptVariant::adapt_ii;
  throw ConfigError("unknown adaptive variant '" + name + "'");
}

std::string to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::unif_continuous: return "unif_continuous";
    case BaselineMode::unif_rows: return "unif_rows";
    case BaselineMode::chebyshev: return "chebyshev";
  }
  return "unknown";
}

BaselineMode baseline_mode_from_string(const std::string& name) {
  if (name == "unif_continuous") return BaselineMode::unif_continuous;
  if (name == "unif_rows") return BaselineMode::unif_rows;
  if (name == "chebyshev") return BaselineMode::chebyshev;
  throw ConfigError("unknown baseline mode '" + name + "'");
}

LegendreGrid legendre_grid(std::size_t n, const SamplingGrid& grid) {
  if (n == 0) throw ArgumentError("legendre_grid: n must be >= 1");
  if (grid.kind == SamplingGrid::Kind::gauss) {
    LegendreSystem sys = legendre_system(n);
    return {std::move(sys.a0), std::move(sys.nodes), std::move(sys.weights)};
  }
  const std::size_t pts = grid.points;
  if (pts == 0) throw ArgumentError("legendre_grid: uniform grid needs at least one point");
  LegendreGrid out;
  out.nodes.resize(pts);
  out.weights.assign(pts, 2.0 / static_cast<Real>(pts));
  Matrix a(static_cast<Eigen::Index>(pts), static_cast<Eigen::Index>(n));
  const Real h = 2.0 / static_cast<Real>(pts + 1);
  const Real scale = std::sqrt(1.0 / static_cast<Real>(pts));
  for (std::size_t i = 0; i < pts; ++i) {
    const Real t = -1.0 + h * static_cast<Real>(i + 1);
    out.nodes[i] = t;
    const auto l = normalized_legendre(t, n);
    for (std::size_t j = 0; j < n; ++j) a(Eigen::Index(i), Eigen::Index(j)) = scale * l[j];
  }
  out.rows = DenseOperator(std::move(a));
  return out;
}

ProbabilityDistribution chebyshev_reference(const std::vector<Real>& nodes) {
  if (nodes.empty()) throw ArgumentError("chebyshev_reference: empty grid");
  std::vector<Real> masses(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Real t = nodes[i];
    if (!(std::abs(t) < 1.0)) throw ArgumentError("chebyshev_reference: nodes must lie in (-1, 1)");
    masses[i] = 1.0 / std::sqrt(1.0 - t * t);
  }
  return ProbabilityDistribution::from_masses(masses);
}

IndexSet top_magnitude_support(const ComplexVector& x, std::size_t size) {
  const std::size_t n = static_cast<std::size_t>(x.size());
  size = std::min(size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(x(Eigen::Index(a))) > std::abs(x(Eigen::Index(b)));
  });
  order.resize(size);
  return IndexSet(std::move(order));
}

AdaptResult run_adapt(const ComplexVector& coefficients, const AdaptOptions& opts) {
  const std::size_t n = opts.n;
  if (static_cast<std::size_t>(coefficients.size()) != n) throw DimensionError("run_adapt: coefficient vector must have length n");
  if (opts.K < 1) throw ArgumentError("run_adapt: K must be >= 1");
  if (opts.s < 1 || opts.s > opts.m1) throw ArgumentError("run_adapt: need 1 <= s <= m1");
  const LegendreGrid grid = legendre_grid(n, opts.grid);
  const std::size_t npts = grid.rows.rows();
  if (opts.m1 * opts.K > npts) throw ArgumentError("run_adapt: need m1 * K <= number of grid points");

  const Matrix& d = grid.rows.matrix();
  const ProbabilityDistribution cheb = chebyshev_reference(grid.nodes);
  CounterRng rng(opts.seed);

  const std::size_t total_rows = opts.m1 * opts.K;
  Matrix stacked(static_cast<Eigen::Index>(total_rows), static_cast<Eigen::Index>(n));
  ComplexVector data(static_cast<Eigen::Index>(total_rows));

  AdaptResult out;
  ComplexVector x_prev;
  for (std::size_t k = 1; k <= opts.K; ++k) {
    ProbabilityDistribution pi = ProbabilityDistribution::uniform(npts);
    IndexSet support;
    if (k > 1 && x_prev.cwiseAbs().maxCoeff() > 0.0) {
      const std::size_t size =
          opts.variant == AdaptVariant::adapt_i ? opts.s : std::min((k - 1) * opts.s, n);
      support = top_magnitude_support(x_prev, size);
      std::vector<Real> masses(npts, 0.0);
      for (std::size_t j = 0; j < npts; ++j)
        for (std::size_t i : support) masses[j] += std::norm(d(Eigen::Index(j), Eigen::Index(i)));
      try {
        pi = ProbabilityDistribution::from_masses(masses);
      } catch (const DegenerateError&) {
        pi = ProbabilityDistribution::uniform(npts);
      }
    }

    DiscreteSampler sampler(pi.weights());
    std::vector<std::size_t> drawn(opts.m1);
    const Eigen::Index base = static_cast<Eigen::Index>((k - 1) * opts.m1);
    for (std::size_t l = 0; l < opts.m1; ++l) {
      const std::size_t j = sampler(rng);
      drawn[l] = j;
      const Real c = 1.0 / std::sqrt(static_cast<Real>(opts.m1) * pi[j]);
      stacked.row(base + Eigen::Index(l)) = c * d.row(Eigen::Index(j));
      data(base + Eigen::Index(l)) = (stacked.row(base + Eigen::Index(l)) * coefficients)(0);
    }

    const Eigen::Index rows = static_cast<Eigen::Index>(k * opts.m1);
    const Real scale = 1.0 / std::sqrt(static_cast<Real>(k));
    const DenseOperator a_k(Matrix(scale * stacked.topRows(rows)));
    const ComplexVector y_k = scale * data.head(rows);
    SolverResult sol = solve_qbp(a_k, y_k, opts.eta, opts.solver);

    out.trace.dist_to_cheb.push_back(l2_distance(pi, cheb));
    out.trace.l2_error.push_back((sol.x_hat - coefficients).norm());
    out.trace.measures.push_back(std::move(pi));
    out.supports.push_back(std::move(support));
    out.draws.push_back(std::move(drawn));
    x_prev = sol.x_hat;
    out.solves.push_back(std::move(sol));
  }
  out.estimate = x_prev;
  return out;
}

AdaptResult run_adapt(const std::function<Real(Real)>& f, const AdaptOptions& opts) {
  const LegendreSystem sys = legendre_system(opts.n);
  // y_i = sqrt(w_i / 2) f(g_i) = (A0 c)_i, and A0 is orthogonal.
  ComplexVector samples(static_cast<Eigen::Index>(opts.n));
  for (std::size_t i = 0; i < opts.n; ++i)
    samples(Eigen::Index(i)) = std::sqrt(sys.weights[i] / 2.0) * f(sys.nodes[i]);
  return run_adapt(ComplexVector(sys.a0.matrix().adjoint() * samples), opts);
}

SampledSystem nonadaptive_baselines(BaselineMode mode, std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw ArgumentError("nonadaptive_baselines: m must be >= 1");
  if (n < 1) throw ArgumentError("nonadaptive_baselines: n must be >= 1");
  CounterRng rng(seed);
  SampledSystem out;
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const Real inv_sqrt_m = 1.0 / std::sqrt(static_cast<Real>(m));

  if (mode == BaselineMode::unif_rows) {
    const LegendreSystem sys = legendre_system(n);
    // pi_J = 1/n, so the row scaling 1/sqrt(m pi_J) is sqrt(n/m).
    const Real c = std::sqrt(static_cast<Real>(n) / static_cast<Real>(m));
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t j = rng.index(n);
      out.row_ids.push_back(j);
      out.points.push_back(sys.nodes[j]);
      a.row(Eigen::Index(l)) = c * sys.a0.matrix().row(Eigen::Index(j));
    }
  } else {
    for (std::size_t l = 0; l < m; ++l) {
      Real t;
      Real c = inv_sqrt_m;
      if (mode == BaselineMode::unif_continuous) {
        do {
          t = rng.uniform(-1.0, 1.0);
        } while (t == -1.0);
      } else {
        // Arcsine law on (-1, 1): t = cos(pi U).
        do {
          t = std::cos(std::numbers::pi * rng.uniform());
        } while (!(std::abs(t) < 1.0));
        c *= std::sqrt(std::numbers::pi / 2.0) * std::pow(1.0 - t * t, 0.25);
      }
      out.points.push_back(t);
      const auto l_t = normalized_legendre(t, n);
      for (std::size_t j = 0; j < n; ++j) a(Eigen::Index(l), Eigen::Index(j)) = c * l_t[j];
    }
  }
  out.a = DenseOperator(std::move(a));
  return out;
}

}  // namespace vds
