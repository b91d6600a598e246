#include "vds/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace vds {

namespace {

using Matrix = DenseOperator::Matrix;

// |z| without hypot's overflow guards; moduli here are far from the limits.
inline Real modulus(Complex z) { return std::sqrt(std::norm(z)); }

Real l1_norm(const ComplexVector& x) {
  Real s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += modulus(x(i));
  return s;
}

// Complex soft thresholding: shrinks moduli by t and keeps phases.
void soft_threshold(ComplexVector& z, Real t) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Real r = modulus(z(i));
    z(i) = r > t ? z(i) * ((r - t) / r) : Complex(0.0, 0.0);
  }
}

// Projection onto the ball B(y, eta).
ComplexVector project_ball(const ComplexVector& z, const ComplexVector& y, Real eta) {
  ComplexVector d = z - y;
  const Real r = d.norm();
  if (r <= eta) return z;
  return y + d * (eta / r);
}

Real operator_norm(const DenseOperator& a) {
  try {
    return norm_2_to_2(a, 1e-9);
  } catch (const ConvergenceError&) {
    return std::sqrt(spectral_norm_squared_exact(a));
  }
}

struct Residuals {
  Real primal = 0.0;
  Real dual = 0.0;
  Real gap = 0.0;
};

// ax = A x and atu = A^* u must be current.
Residuals kkt_residuals(const ComplexVector& x, const ComplexVector& ax, const ComplexVector& u,
                        const ComplexVector& atu, const ComplexVector& y, Real eta) {
  Residuals r;
  const Real ynorm = y.norm();
  r.primal = std::max((ax - y).norm() - eta, 0.0) / (1.0 + ynorm);

  Real worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Complex g = -atu(i);
    const Real xm = modulus(x(i));
    const Real dist = xm > 0.0 ? modulus(g - x(i) / xm) : std::max(modulus(g) - 1.0, 0.0);
    worst = std::max(worst, dist);
  }
  r.dual = worst;

  // Dual objective -Re<u, y> - eta ||u|| over ||A^* u||_inf <= 1.
  const Real scale = std::max(1.0, std::sqrt(atu.cwiseAbs2().maxCoeff()));
  const Real dual_value = -(u.dot(y).real() + eta * u.norm()) / scale;
  const Real l1 = l1_norm(x);
  r.gap = std::abs(l1 - dual_value) / (1.0 + l1);
  return r;
}

bool within(const Residuals& r, Real tol) { return r.primal <= tol && r.dual <= tol && r.gap <= tol; }

Real worst(const Residuals& r) { return std::max({r.primal, r.dual, r.gap}); }

}  // namespace

namespace {

void check_qbp_inputs(std::size_t rows, const ComplexVector& y, Real eta, const SolverOptions& opts) {
  if (static_cast<std::size_t>(y.size()) != rows) throw DimensionError("solve_qbp: y length differs from rows(A)");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ArgumentError("solve_qbp: eta must be finite and >= 0");
  if (!(opts.kkt_tol > 0.0)) throw ArgumentError("solve_qbp: kkt_tol must be > 0");
  if (!(opts.step_ratio > 0.0 && opts.step_ratio < 1.0)) throw ArgumentError("solve_qbp: step_ratio must lie in (0,1)");
  if (!y.allFinite()) throw ArgumentError("solve_qbp: non-finite data");
}

SolverResult pdhg(const LinearMap& a, Real norm_a, const ComplexVector& y, Real eta, const SolverOptions& opts) {
  const auto n = static_cast<Eigen::Index>(a.cols);
  const std::size_t cap = opts.max_iters ? opts.max_iters : 50 * a.cols;
  const std::size_t check = std::max<std::size_t>(1, opts.check_every);

  SolverResult out;
  if (norm_a == 0.0) {
    // A = 0: only z = 0 matters, feasible iff ||y|| <= eta.
    out.x_hat = ComplexVector::Zero(n);
    out.primal_residual = std::max(y.norm() - eta, 0.0) / (1.0 + y.norm());
    out.converged = out.primal_residual <= opts.kkt_tol;
    return out;
  }

  Real tau = opts.step_ratio / norm_a;
  Real sigma = opts.step_ratio / norm_a;
  // Residual balancing parameters (adaptive PDHG).
  Real alpha = 0.5;
  constexpr Real kDecay = 0.95;
  constexpr Real kBand = 1.5;

  ComplexVector x = ComplexVector::Zero(n);
  ComplexVector ax = ComplexVector::Zero(static_cast<Eigen::Index>(a.rows));
  ComplexVector ax_bar = ax;
  ComplexVector u = ax;
  ComplexVector atu = ComplexVector::Zero(n);
  const Real divergence = 1e12 * (1.0 + y.norm()) / norm_a;

  // Restart state: running averages since the last restart and the KKT error
  // at that restart.
  ComplexVector sx = ComplexVector::Zero(n), sax = ComplexVector::Zero(ax.size());
  ComplexVector su = ComplexVector::Zero(u.size()), satu = ComplexVector::Zero(n);
  std::size_t since = 0;
  Real err_restart = std::numeric_limits<Real>::infinity();
  Real err_previous = std::numeric_limits<Real>::infinity();

  Residuals res;
  std::size_t it = 0;
  for (; it < cap; ++it) {
    ComplexVector x_new = x - tau * atu;
    soft_threshold(x_new, tau);
    ComplexVector ax_new = a.apply(x_new);
    ax_bar = 2.0 * ax_new - ax;

    ComplexVector v = u + sigma * ax_bar;
    ComplexVector u_new = v - sigma * project_ball(v / sigma, y, eta);
    ComplexVector atu_new = a.adjoint(u_new);

    if (opts.adaptive_steps) {
      const Real p = l1_norm((x - x_new) / tau - (atu - atu_new));
      const Real d = l1_norm((u - u_new) / sigma - (ax - ax_new));
      if (p > kBand * d) {
        tau /= (1.0 - alpha);
        sigma *= (1.0 - alpha);
        alpha *= kDecay;
      } else if (d > kBand * p) {
        tau *= (1.0 - alpha);
        sigma /= (1.0 - alpha);
        alpha *= kDecay;
      }
    }

    x.swap(x_new);
    ax.swap(ax_new);
    u.swap(u_new);
    atu.swap(atu_new);

    if (!u.allFinite() || u.norm() > divergence)
      throw InfeasibleError("solve_qbp: dual iterates diverge; the constraint set appears empty");

    if (opts.restarts) {
      sx += x;
      sax += ax;
      su += u;
      satu += atu;
      ++since;
    }

    if ((it + 1) % check == 0) {
      res = kkt_residuals(x, ax, u, atu, y, eta);
      if (within(res, opts.kkt_tol)) {
        ++it;
        break;
      }
      if (opts.restarts) {
        const Real w = 1.0 / static_cast<Real>(since);
        const ComplexVector mx = sx * w, max_ = sax * w, mu = su * w, matu = satu * w;
        const Residuals res_avg = kkt_residuals(mx, max_, mu, matu, y, eta);
        const bool use_avg = worst(res_avg) < worst(res);
        const Real err = use_avg ? worst(res_avg) : worst(res);
        // Sufficient decay, stalled decay, or a long stretch without restart.
        const bool restart = err <= 0.2 * err_restart || (err <= 0.8 * err_restart && err > err_previous) ||
                             since >= (it + 1) * 36 / 100;
        if (restart) {
          if (use_avg) {
            x = mx;
            ax = max_;
            u = mu;
            atu = matu;
            res = res_avg;
            if (within(res, opts.kkt_tol)) {
              ++it;
              break;
            }
          }
          err_restart = err;
          sx.setZero();
          sax.setZero();
          su.setZero();
          satu.setZero();
          since = 0;
          err_previous = std::numeric_limits<Real>::infinity();
        } else {
          err_previous = err;
        }
      }
    }
  }
  out.iterations = it;
  const bool iterate_ok = within(kkt_residuals(x, ax, u, atu, y, eta), opts.kkt_tol);

  bool certified = false;
  if (opts.polish) {
    const Real feas_slack = opts.kkt_tol * (1.0 + y.norm());
    const Real l1 = l1_norm(x);
    // Least-squares refit on `support`, kept when feasible and either no worse
    // in l1 or closing the KKT system with the current u. An unconverged x can
    // be slightly infeasible with a smaller l1, hence the second test.
    auto try_refit = [&](const IndexSet& support) {
      if (support.empty() || support.size() > a.rows) return false;
      try {
        const DenseOperator as = a.columns(support);
        const SupportFit fit = least_squares_on_support(as, IndexSet::range(0, support.size()), y);
        const ComplexVector afit = as.apply(fit.x);
        const ComplexVector xfit = embed(fit.x, support, a.cols);
        if ((afit - y).norm() > eta + feas_slack) return false;
        const bool no_worse = l1_norm(xfit) <= l1 + opts.kkt_tol * (1.0 + l1);
        if (!no_worse && !within(kkt_residuals(xfit, afit, u, atu, y, eta), opts.kkt_tol)) return false;
        x = xfit;
        ax = afit;
        return true;
      } catch (const RankError&) {
        return false;
      }
    };
    // With eta = 0, an exact refit z on T whose sign pattern has a dual
    // certificate (A_T injective, |A^* A_T (A_T^* A_T)^{-1} sgn z_T| < 1 off T)
    // is the unique minimiser, whatever the state of the iterate.
    auto try_certified = [&](const IndexSet& candidate) {
      if (candidate.empty() || candidate.size() > a.rows) return false;
      try {
        const DenseOperator ac = a.columns(candidate);
        const SupportFit first = least_squares_on_support(ac, IndexSet::range(0, candidate.size()), y);
        const Real top = first.x.cwiseAbs().maxCoeff();
        std::vector<std::size_t> keep, ids;
        for (std::size_t k = 0; k < candidate.size(); ++k)
          if (std::abs(first.x(Eigen::Index(k))) > 1e-9 * top) {
            keep.push_back(k);
            ids.push_back(candidate.ids()[k]);
          }
        if (ids.empty()) return false;
        const IndexSet t(std::move(ids));
        const DenseOperator at = restrict_columns(ac, IndexSet(std::move(keep)));
        const SupportFit fit = least_squares_on_support(at, IndexSet::range(0, t.size()), y);
        const ComplexVector afit = at.apply(fit.x);
        if ((afit - y).norm() > feas_slack) return false;
        const Matrix& m = at.matrix();
        ComplexVector sgn(fit.x.size());
        for (Eigen::Index k = 0; k < sgn.size(); ++k) sgn(k) = fit.x(k) / modulus(fit.x(k));
        const Eigen::LDLT<Matrix> normal(m.adjoint() * m);
        if (normal.info() != Eigen::Success) return false;
        const ComplexVector v = a.adjoint(m * normal.solve(sgn));
        std::vector<bool> on(a.cols, false);
        for (std::size_t i : t) on[i] = true;
        for (std::size_t i = 0; i < a.cols; ++i)
          if (!on[i] && modulus(v(Eigen::Index(i))) >= 1.0 - 1e-9) return false;
        x = embed(fit.x, t, a.cols);
        ax = afit;
        return true;
      } catch (const RankError&) {
        return false;
      }
    };

    IndexSet numerical;
    {
      std::vector<std::size_t> ids;
      const Real floor = 1e-9 * std::max(x.cwiseAbs().maxCoeff(), std::numeric_limits<Real>::min());
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(x(i)) > floor) ids.push_back(std::size_t(i));
      numerical = IndexSet(std::move(ids));
    }
    out.polished = try_refit(numerical);
    if (!out.polished && !iterate_ok && eta == 0.0) {
      // Entries still shrunk to zero: grow the numerical support by the
      // largest |A^* u| off it, 1, 2, 4, ... indices at a time. Any candidate
      // containing the true support is pruned back to it by the refit.
      std::vector<std::size_t> order;
      std::vector<bool> on(a.cols, false);
      for (std::size_t i : numerical) on[i] = true;
      for (std::size_t i = 0; i < a.cols; ++i)
        if (!on[i]) order.push_back(i);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
        return modulus(atu(Eigen::Index(p))) > modulus(atu(Eigen::Index(q)));
      });
      const std::size_t room = a.rows > numerical.size() ? std::min(a.rows - numerical.size(), order.size()) : 0;
      std::size_t extra = 1;
      while (extra <= room) {
        std::vector<std::size_t> grown = numerical.ids();
        grown.insert(grown.end(), order.begin(), order.begin() + std::ptrdiff_t(extra));
        if (try_certified(IndexSet(std::move(grown)))) {
          out.polished = certified = true;
          break;
        }
        extra = extra == room ? room + 1 : std::min(2 * extra, room);
      }
    }
  }

  res = kkt_residuals(x, ax, u, atu, y, eta);
  out.x_hat = std::move(x);
  out.primal_residual = res.primal;
  out.dual_residual = res.dual;
  out.feasibility_gap = res.gap;
  // The polished point may sit a hair outside the tolerance the iterate met.
  out.converged = iterate_ok || certified || within(res, opts.kkt_tol);
  return out;
}

}  // namespace

SolverResult solve_qbp(const DenseOperator& a, const ComplexVector& y, Real eta, const SolverOptions& opts) {
  if (a.empty()) throw ArgumentError("solve_qbp: empty sensing matrix");
  check_qbp_inputs(a.rows(), y, eta, opts);
  return pdhg(LinearMap::borrow(a), operator_norm(a), y, eta, opts);
}

SolverResult solve_qbp(const LinearMap& a, const ComplexVector& y, Real eta, const SolverOptions& opts) {
  if (a.rows == 0 || a.cols == 0) throw ArgumentError("solve_qbp: empty sensing map");
  check_qbp_inputs(a.rows, y, eta, opts);
  Real norm_a;
  try {
    norm_a = norm_2_to_2(a, PowerIterationOptions{1e-9, 0});
  } catch (const ConvergenceError&) {
    norm_a = operator_norm(a.to_dense());
  }
  return pdhg(a, norm_a, y, eta, opts);
}

CertificateReport dual_certificate(const DenseOperator& a, const IndexSet& s, const ComplexVector& signs) {
  const std::size_t n = a.cols();
  if (!s.empty() && s.max_index() >= n) throw IndexError("dual_certificate: support index out of range");
  if (static_cast<std::size_t>(signs.size()) != s.size()) throw DimensionError("dual_certificate: one sign per support element");
  if (s.size() > a.rows()) throw ArgumentError("dual_certificate: |S| exceeds rows(A)");

  CertificateReport rep;
  const IndexSet sc = s.complement(n);
  if (s.empty()) {
    rep.injective = true;
    rep.exact_recovery_certified = true;
    rep.v = ComplexVector::Zero(Eigen::Index(n));
    rep.stable.tau = 1.0;
    rep.stable.rho = 0.0;
    return rep;
  }

  const Matrix as = restrict_columns(a, s).matrix();
  const Matrix gram = as.adjoint() * as;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const auto& ev = es.eigenvalues();
  const Real lmin = std::max(0.0, ev.minCoeff());
  const Real lmax = std::max(0.0, ev.maxCoeff());
  rep.sigma_min = std::sqrt(lmin);
  rep.injective = lmax > 0.0 && std::sqrt(lmin) > 1e-12 * std::sqrt(lmax);

  // delta = max |eigenvalue - 1| of the Hermitian A_S^* A_S - Id.
  rep.stable.delta = std::max(std::abs(ev.maxCoeff() - 1.0), std::abs(ev.minCoeff() - 1.0));
  const Matrix cross = as.adjoint() * a.matrix();  // A_S^* A, |S| x n
  for (std::size_t l : sc) rep.stable.t = std::max(rep.stable.t, cross.col(Eigen::Index(l)).norm());

  if (rep.injective) {
    const ComplexVector h = es.eigenvectors() *
                            (es.eigenvalues().cwiseInverse().cast<Complex>().asDiagonal() *
                             (es.eigenvectors().adjoint() * signs));
    rep.v = cross.adjoint() * h;
    for (std::size_t l : sc) rep.max_offsupport = std::max(rep.max_offsupport, std::abs(rep.v(Eigen::Index(l))));
    rep.stable.theta = rep.max_offsupport;
    rep.exact_recovery_certified = rep.max_offsupport < 1.0;
  } else {
    rep.max_offsupport = std::numeric_limits<Real>::infinity();
    rep.stable.theta = rep.max_offsupport;
  }
  if (rep.stable.delta < 1.0) {
    rep.stable.tau = 1.0 / std::sqrt(1.0 - rep.stable.delta);
    rep.stable.rho = rep.stable.theta + rep.stable.t * rep.stable.gamma / (1.0 - rep.stable.delta);
  }
  return rep;
}

ComplexVector oracle_recover(const DenseOperator& a, const IndexSet& s, const ComplexVector& y) {
  return least_squares_on_support(a, s, y).x;
}

OracleBound oracle_error_bound(const DenseOperator& a, const IndexSet& s, const ComplexVector& x,
                               const ComplexVector& eps) {
  if (static_cast<std::size_t>(x.size()) != a.cols()) throw DimensionError("oracle_error_bound: x length");
  if (static_cast<std::size_t>(eps.size()) != a.rows()) throw DimensionError("oracle_error_bound: noise length");
  OracleBound b;
  if (s.empty()) {
    b.offsupport_term = 0.0;
    b.noise_term = 0.0;
    return b;
  }
  const Matrix as = restrict_columns(a, s).matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(as.adjoint() * as), Eigen::EigenvaluesOnly);
  const Real lmin = std::max(0.0, es.eigenvalues().minCoeff());
  if (!(lmin > 0.0)) throw RankError("oracle_error_bound: A_S is rank deficient");
  b.noise_term = eps.norm() / std::sqrt(lmin);

  Real off_l1 = 0.0;
  Real cross = 0.0;
  const Matrix c = as.adjoint() * a.matrix();
  for (std::size_t j : s.complement(a.cols())) {
    off_l1 += std::abs(x(Eigen::Index(j)));
    cross = std::max(cross, c.col(Eigen::Index(j)).norm());
  }
  b.offsupport_term = cross * off_l1 / lmin;
  return b;
}

ComplexVector brute_force_l0(const DenseOperator& a, const ComplexVector& y, std::size_t s_max) {
  const std::size_t n = a.cols();
  if (n > 16 || s_max > 3) throw ArgumentError("brute_force_l0: limited to n <= 16 and s_max <= 3");
  if (static_cast<std::size_t>(y.size()) != a.rows()) throw DimensionError("brute_force_l0: y length differs from rows(A)");
  const Real exact_tol = 1e-10 * (1.0 + y.norm());

  struct Candidate {
    ComplexVector x;
    std::size_t size = 0;
    Real residual = std::numeric_limits<Real>::infinity();
    Real l1 = std::numeric_limits<Real>::infinity();
    bool exact = false;
  };
  // Strictly better than the incumbent; supports are visited by size, then
  // lexicographically, so equality keeps the earlier support.
  auto better = [](const Candidate& c, const Candidate& best) {
    if (c.exact != best.exact) return c.exact;
    if (c.exact) {
      if (c.size != best.size) return c.size < best.size;
      return c.l1 < best.l1 * (1.0 - 1e-12);
    }
    if (c.residual < best.residual * (1.0 - 1e-12)) return true;
    if (c.residual > best.residual * (1.0 + 1e-12)) return false;
    return c.l1 < best.l1 * (1.0 - 1e-12);
  };

  Candidate best;
  auto consider = [&](const std::vector<std::size_t>& ids) {
    Candidate c;
    c.size = ids.size();
    if (ids.empty()) {
      c.x = ComplexVector::Zero(Eigen::Index(n));
    } else {
      if (ids.size() > a.rows()) return;
      try {
        c.x = least_squares_on_support(a, IndexSet(ids), y).x;
      } catch (const RankError&) {
        return;
      }
    }
    c.residual = (a.matrix() * c.x - y).norm();
    c.l1 = l1_norm(c.x);
    c.exact = c.residual <= exact_tol;
    if (best.x.size() == 0 || better(c, best)) best = std::move(c);
  };

  std::vector<std::size_t> ids;
  consider(ids);
  for (std::size_t k = 1; k <= std::min(s_max, n); ++k) {
    ids.resize(k);
    for (std::size_t i = 0; i < k; ++i) ids[i] = i;
    while (true) {
      consider(ids);
      // Next k-combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && ids[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++ids[i - 1];
      for (std::size_t j = i; j < k; ++j) ids[j] = ids[j - 1] + 1;
    }
  }
  return best.x;
}

}  // namespace vds
