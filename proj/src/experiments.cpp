#include "vds/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "vds/parallel.hpp"
#include "vds/rng.hpp"
#include "vds/sampling.hpp"
#include "vds/serialization.hpp"
#include "vds/transforms.hpp"

namespace vds {

namespace {

using json = nlohmann::json;
using Matrix = DenseOperator::Matrix;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Streams inside one trial seed.
constexpr std::uint64_t kSupportStream = 0;
constexpr std::uint64_t kSignalStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kModeStreamBase = 16;

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
}

ConditionMargins nan_margins() { return {kNaN, kNaN, kNaN, kNaN, kNaN}; }

void set_nan_coherence(TrialRecord& r) {
  r.theta = r.lambda = r.gamma = kNaN;
  r.margins = nan_margins();
}

// Noise scaled to ||noise|| = level * ||clean||; returns eta = max(eta, ||noise||).
Real add_noise(ComplexVector& y, Real level, Real eta, std::uint64_t seed) {
  if (level <= 0.0) return eta;
  CounterRng rng(seed);
  ComplexVector g(y.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = Complex(rng.normal(), rng.normal());
  const Real target = level * y.norm();
  const Real gn = g.norm();
  if (gn == 0.0 || target == 0.0) return eta;
  g *= target / gn;
  y += g;
  return std::max(eta, g.norm());
}

IndexSet make_support_1d(const ExperimentConfig& c, const SubbandPartition& wavelet, std::uint64_t seed) {
  const auto& sp = c.sparsity;
  // The sparsity values come straight from the config, so a bad value is a config error.
  try {
    if (sp.s) return random_support(c.n, *sp.s, seed);
    if (sp.levels) return support_in_levels(wavelet, LevelSparsity{*sp.levels}, seed);
    if (sp.band_percentages) return support_from_profile(wavelet, *sp.band_percentages, seed);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("sparsity: ") + e.what());
  }
  throw ConfigError("sparsity: need 's', 'levels' or 'band_percentages' for a 1D experiment");
}

IndexSet make_support_2d(const ExperimentConfig& c, const SubbandPartition& side_wavelet, std::uint64_t seed) {
  const std::size_t side = side_wavelet.n();
  const auto& sp = c.sparsity;
  if (sp.s) {
    if (*sp.s > side * side) throw ConfigError("sparsity.s exceeds n");
    return random_support(side * side, *sp.s, seed);
  }
  if (!sp.levels_2d) throw ConfigError("sparsity: need 's' or 'levels_2d' for a 2D experiment");
  const auto& counts = *sp.levels_2d;
  const std::size_t L = side_wavelet.num_levels();
  if (counts.size() != L) throw ConfigError("sparsity.levels_2d: need one row per level");
  CounterRng rng(seed);
  std::vector<std::size_t> ids;
  for (std::size_t l = 0; l < L; ++l) {
    if (counts[l].size() != L) throw ConfigError("sparsity.levels_2d: need one column per level");
    const IndexSet& rows = side_wavelet.level(l);
    for (std::size_t j = 0; j < L; ++j) {
      const IndexSet& cols = side_wavelet.level(j);
      const std::size_t cells = rows.size() * cols.size();
      if (counts[l][j] > cells) throw ConfigError("sparsity.levels_2d: count exceeds the block size");
      for (std::size_t pos : sample_without_replacement(rng, cells, counts[l][j]))
        ids.push_back(grid_index(rows[pos % rows.size()], cols[pos / rows.size()], side));
    }
  }
  return IndexSet(std::move(ids));
}

struct ModeSpec {
  std::string label;
  std::string name;  // design mode or "uniform"
  double exponent = 1.0;
};

std::string exponent_label(double w) {
  std::string s = format_double(w);
  return s;
}

std::vector<ModeSpec> expand_modes(const ExperimentConfig& c, bool lines) {
  std::vector<ModeSpec> out;
  for (const auto& name : c.pi_modes) {
    if (name == "pi_levels_1d" || name == "pi_lines_2d") {
      for (double w : c.exponents) out.push_back({name + "_w" + exponent_label(w), name, w});
    } else {
      out.push_back({name, name, 1.0});
    }
  }
  (void)lines;
  return out;
}

// Shared state for the isolated 1D Fourier-Haar setting.
struct Context1D {
  FourierHaar1D fh;
  std::vector<Real> gamma_num;  // ||d_k||_inf^2, independent of S
  std::vector<ModeSpec> modes;
};

ProbabilityDistribution design_1d(const ModeSpec& mode, const Context1D& ctx, const IndexSet& s,
                                  const LevelSparsity& levels) {
  const std::size_t n = ctx.fh.a0.rows();
  if (mode.name == "uniform") return ProbabilityDistribution::uniform(n);
  const DesignMode dm = design_mode_from_string(mode.name);
  DesignInputs in;
  in.a0 = &ctx.fh.a0;
  in.support = s;
  in.frequency = &ctx.fh.frequency;
  in.wavelet = &ctx.fh.wavelet;
  in.exponent = mode.exponent;
  switch (dm) {
    case DesignMode::pi_inf:
      return ProbabilityDistribution::from_masses(ctx.gamma_num);
    case DesignMode::pi_theta_iso:
    case DesignMode::pi_lambda_iso:
    case DesignMode::pi_lambda_tilde:
      break;
    case DesignMode::pi_fh_theta:
    case DesignMode::pi_fh_lambda:
      in.level_sparsities = levels.counts;
      break;
    case DesignMode::pi_levels_1d:
      // Band W_j of frequencies paired with wavelet level j.
      in.level_sparsities = levels.counts;
      break;
    default:
      throw ConfigError("pi mode '" + mode.name + "' is not available for isolated 1D sampling");
  }
  return design_pi(dm, in);
}

// Rows of a0 for the saturated set, then m - m0 random rows from pi restricted
// to the rest; applied through the fast transforms.
LinearMap sample_rows_1d(std::size_t n, const ProbabilityDistribution& pi, std::size_t m, const IndexSet& saturated,
                         CounterRng& rng) {
  if (saturated.empty()) {
    RowDraw d = draw_isolated_ids(pi, m, rng);
    return fourier_haar_rows(n, std::move(d.ids), std::move(d.scales));
  }
  // m == n with every row saturated is the full isometry; otherwise random rows must remain.
  const bool full = saturated.size() == n && m == n;
  if (m <= saturated.size() && !full) throw ConfigError("m must exceed the number of saturated rows");
  std::vector<std::size_t> ids(saturated.begin(), saturated.end());
  std::vector<Real> scales(ids.size(), 1.0);
  if (saturated.size() < n) {
    std::vector<Real> law(pi.weights());
    for (std::size_t k : saturated) law[k] = 0.0;
    const auto rest = ProbabilityDistribution::from_masses(law);
    const RowDraw d = draw_isolated_ids(rest, m - saturated.size(), rng);
    ids.insert(ids.end(), d.ids.begin(), d.ids.end());
    scales.insert(scales.end(), d.scales.begin(), d.scales.end());
  }
  return fourier_haar_rows(n, std::move(ids), std::move(scales));
}

struct CoherenceNumerators {
  std::vector<Real> theta, lambda;
  const std::vector<Real>* gamma = nullptr;
};

void fill_coherence(TrialRecord& r, const CoherenceNumerators& num, const IndexSet& s, const ProbabilityDistribution& pi,
                    std::size_t n, double eps, std::size_t m) {
  // A zero of pi under a nonzero numerator makes only that quantity infinite.
  auto ratio = [&pi](const std::vector<Real>& num) {
    try {
      return max_ratio(num, pi);
    } catch (const InfiniteCoherenceError&) {
      return std::numeric_limits<Real>::infinity();
    }
  };
  CoherenceReport rep;
  rep.support = s;
  rep.pi = pi;
  rep.theta = ratio(num.theta);
  rep.lambda = ratio(num.lambda);
  rep.gamma = ratio(*num.gamma);
  r.theta = rep.theta;
  r.lambda = rep.lambda;
  r.gamma = rep.gamma;
  r.margins = margins_of(recovery_condition_report(rep, n, eps, m));
}

struct TrialOutcome {
  std::vector<TrialRecord> records;
  std::size_t failures = 0;
  std::size_t solves = 0;
};

TrialOutcome run_trial_1d(const ExperimentConfig& c, const Context1D& ctx, std::size_t trial,
                          const std::vector<std::size_t>& ms) {
  const std::size_t n = c.n;
  const std::uint64_t ts = derive_seed(c.seed, trial);
  const IndexSet s = make_support_1d(c, ctx.fh.wavelet, derive_seed(ts, kSupportStream));
  const SignalInstance sig =
      make_signal(n, s, c.sign_model, c.magnitude_law, derive_seed(ts, kSignalStream), &ctx.fh.wavelet);
  const LevelSparsity levels = measure_level_sparsity(ctx.fh.wavelet, s);
  const IndexSet saturated =
      c.saturate_levels ? saturate_low_frequencies(ctx.fh.frequency, *c.saturate_levels) : IndexSet{};

  CoherenceNumerators num;
  if (c.condition_report) {
    num.theta = theta_numerators_iso(ctx.fh.a0, s);
    num.lambda = lambda_numerators_iso(ctx.fh.a0, s);
    num.gamma = &ctx.gamma_num;
  }

  TrialOutcome out;
  for (std::size_t q = 0; q < ctx.modes.size(); ++q) {
    const ModeSpec& mode = ctx.modes[q];
    const ProbabilityDistribution pi = design_1d(mode, ctx, s, levels);
    for (std::size_t m : ms) {
      CounterRng rng(derive_seed(ts, kModeStreamBase + q));
      const LinearMap a = sample_rows_1d(n, pi, m, saturated, rng);
      ComplexVector y = a.apply(sig.coefficients);
      const Real eta = add_noise(y, c.noise_level, c.eta, derive_seed(derive_seed(ts, kNoiseStream), q));
      const SolverResult sol = solve_qbp(a, y, eta, c.solver);

      TrialRecord r;
      r.trial = trial;
      r.mode = mode.label;
      r.m = m;
      r.psnr = psnr(sig.coefficients, sol.x_hat);
      r.l2_error = (sol.x_hat - sig.coefficients).norm();
      r.recovered = exactly_recovered(sig.coefficients, sol.x_hat);
      r.iterations = sol.iterations;
      r.converged = sol.converged;
      if (c.condition_report)
        fill_coherence(r, num, s, pi, n, c.epsilon, m);
      else
        set_nan_coherence(r);
      ++out.solves;
      if (!sol.converged) ++out.failures;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

Context1D make_context_1d(const ExperimentConfig& c, std::vector<std::string> default_modes) {
  Context1D ctx{fourier_haar_1d(c.n), {}, {}};
  ctx.gamma_num = gamma_numerators_iso(ctx.fh.a0);
  ExperimentConfig with_modes = c;
  if (with_modes.pi_modes.empty()) with_modes.pi_modes = std::move(default_modes);
  ctx.modes = expand_modes(with_modes, false);
  return ctx;
}

struct Context2D {
  std::size_t side = 0;
  FourierHaar1D fh;  // 1D transform on one side
  std::shared_ptr<const BlockDictionary> dict;
  std::vector<Real> gamma_num;
  std::vector<ModeSpec> modes;
};

Context2D make_context_2d(const ExperimentConfig& c) {
  Context2D ctx;
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(c.n))));
  if (side * side != c.n || !is_power_of_two(side) || side < 2)
    throw ConfigError("n must be 4^(J+1) for a 2D experiment (sqrt(n) a power of two)");
  ctx.side = side;
  ctx.fh = fourier_haar_1d(side);
  ctx.dict = std::make_shared<const BlockDictionary>(
      BlockDictionary::from_tensor(tensor_line_dictionary(ctx.fh.a0, LineOrientation::vertical)));
  ctx.gamma_num = gamma_numerators(*ctx.dict);
  ExperimentConfig with_modes = c;
  if (with_modes.pi_modes.empty()) with_modes.pi_modes = {"pi_lines_2d"};
  ctx.modes = expand_modes(with_modes, true);
  return ctx;
}

bool band_constant(const ProbabilityDistribution& pi, const SubbandPartition& frequency) {
  for (const auto& band : frequency.levels())
    for (std::size_t k : band)
      if (pi[k] != pi[band[0]]) return false;
  return true;
}

TrialOutcome run_trial_2d(const ExperimentConfig& c, const Context2D& ctx, std::size_t trial,
                          const std::vector<std::size_t>& ms) {
  const std::uint64_t ts = derive_seed(c.seed, trial);
  const IndexSet s = make_support_2d(c, ctx.fh.wavelet, derive_seed(ts, kSupportStream));
  const SignalInstance sig = make_signal(c.n, s, c.sign_model, MagnitudeLaw::constant, derive_seed(ts, kSignalStream));
  const std::vector<std::size_t> s_row = anisotropic_row_sparsities(s, ctx.fh.wavelet);
  const IndexSet saturated =
      c.saturate_levels ? saturate_low_frequencies(ctx.fh.frequency, *c.saturate_levels) : IndexSet{};

  CoherenceNumerators num;
  if (c.condition_report) {
    num.theta = theta_numerators(*ctx.dict, s);
    num.lambda = lambda_numerators(*ctx.dict, s);
    num.gamma = &ctx.gamma_num;
  }

  TrialOutcome out;
  for (std::size_t q = 0; q < ctx.modes.size(); ++q) {
    const ModeSpec& mode = ctx.modes[q];
    ProbabilityDistribution pi;
    if (mode.name == "uniform") {
      pi = ProbabilityDistribution::uniform(ctx.side);
    } else if (mode.name == "pi_lines_2d") {
      DesignInputs in;
      in.frequency = &ctx.fh.frequency;
      in.level_sparsities = s_row;
      in.exponent = mode.exponent;
      pi = design_pi(DesignMode::pi_lines_2d, in);
      if (!band_constant(pi, ctx.fh.frequency)) throw Error("line design is not constant on a frequency band");
    } else if (mode.name == "pi_theta_block" || mode.name == "pi_lambda_block" || mode.name == "pi_inf") {
      DesignInputs in;
      in.dictionary = ctx.dict.get();
      in.support = s;
      pi = design_pi(design_mode_from_string(mode.name), in);
    } else {
      throw ConfigError("pi mode '" + mode.name + "' is not available for line sampling");
    }
    for (std::size_t m : ms) {
      SamplingPlan plan{ctx.dict, pi, m, saturated, derive_seed(ts, kModeStreamBase + q)};
      if (m <= plan.m0() && !(plan.m0() == ctx.side && m == ctx.side)) throw ConfigError("m must exceed the number of saturated lines");
      const SensingMatrix sm = draw_sensing_matrix(plan);
      ComplexVector y = sm.matrix.apply(sig.coefficients);
      const Real eta = add_noise(y, c.noise_level, c.eta, derive_seed(derive_seed(ts, kNoiseStream), q));
      const SolverResult sol = solve_qbp(sm.matrix, y, eta, c.solver);

      TrialRecord r;
      r.trial = trial;
      r.mode = mode.label;
      r.m = m;
      r.psnr = psnr(sig.coefficients, sol.x_hat);
      r.l2_error = (sol.x_hat - sig.coefficients).norm();
      r.recovered = exactly_recovered(sig.coefficients, sol.x_hat);
      r.iterations = sol.iterations;
      r.converged = sol.converged;
      if (c.condition_report)
        fill_coherence(r, num, s, pi, c.n, c.epsilon, m);
      else
        set_nan_coherence(r);
      ++out.solves;
      if (!sol.converged) ++out.failures;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

template <class TrialFn>
ExperimentResult collect(const ExperimentConfig& c, TrialFn&& fn) {
  std::vector<TrialOutcome> outcomes(c.trials);
  parallel_for(c.trials, c.threads, [&](std::size_t t) { outcomes[t] = fn(t); });
  ExperimentResult res;
  res.config = c;
  for (auto& o : outcomes) {
    res.solves += o.solves;
    res.solver_failures += o.failures;
    for (auto& r : o.records) res.records.push_back(std::move(r));
  }
  return res;
}

std::vector<std::string> mode_order(const std::vector<TrialRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records)
    if (std::find(out.begin(), out.end(), r.mode) == out.end()) out.push_back(r.mode);
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::size_t require_m(const ExperimentConfig& c) {
  if (c.m == 0) throw ConfigError("m must be >= 1");
  return c.m;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << content;
  if (!f) throw Error("failed writing " + p.string());
}

}  // namespace

bool operator==(const TrialRecord& a, const TrialRecord& b) {
  return a.trial == b.trial && a.mode == b.mode && a.m == b.m && same(a.psnr, b.psnr) && same(a.l2_error, b.l2_error) &&
         a.recovered == b.recovered && a.iterations == b.iterations && a.converged == b.converged &&
         same(a.theta, b.theta) && same(a.lambda, b.lambda) && same(a.gamma, b.gamma) &&
         same(a.margins.theta_noiseless, b.margins.theta_noiseless) &&
         same(a.margins.theta_noisy, b.margins.theta_noisy) && same(a.margins.oracle, b.margins.oracle) &&
         same(a.margins.lambda_gamma, b.margins.lambda_gamma) && same(a.margins.lambda_m, b.margins.lambda_m);
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::coherence_report: return "coherence_report";
    case ExperimentKind::strategy_compare_1d: return "strategy_compare_1d";
    case ExperimentKind::lines_2d: return "lines_2d";
    case ExperimentKind::adapt_legendre: return "adapt_legendre";
    case ExperimentKind::phase_curve: return "phase_curve";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::coherence_report, ExperimentKind::strategy_compare_1d, ExperimentKind::lines_2d,
                 ExperimentKind::adapt_legendre, ExperimentKind::phase_curve})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"experiment", "n", "sparsity", "m", "m_grid", "epsilon", "eta", "noise_level", "trials", "seed",
              "pi_modes", "exponents", "setting", "saturate_levels", "sign_model", "magnitude_law",
              "condition_report", "solver", "adapt", "threads", "output"},
             "");
  ExperimentConfig c;
  if (!j.contains("experiment")) throw ConfigError("config key 'experiment' is required");
  c.kind = experiment_kind_from_string(get_or<std::string>(j, "experiment", ""));
  c.n = get_or<std::size_t>(j, "n", c.n);
  c.m = get_or<std::size_t>(j, "m", c.m);
  c.m_grid = get_or<std::vector<std::size_t>>(j, "m_grid", {});
  c.epsilon = get_or<double>(j, "epsilon", c.epsilon);
  c.eta = get_or<double>(j, "eta", c.eta);
  c.noise_level = get_or<double>(j, "noise_level", c.noise_level);
  c.trials = get_or<std::size_t>(j, "trials", c.trials);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.pi_modes = get_or<std::vector<std::string>>(j, "pi_modes", {});
  c.exponents = get_or<std::vector<double>>(j, "exponents", c.exponents);
  c.setting = get_or<std::string>(j, "setting", c.setting);
  if (j.contains("saturate_levels") && !j.at("saturate_levels").is_null())
    c.saturate_levels = get_or<std::size_t>(j, "saturate_levels", 0);
  c.sign_model = sign_model_from_string(get_or<std::string>(j, "sign_model", to_string(c.sign_model)));
  c.magnitude_law = magnitude_law_from_string(get_or<std::string>(j, "magnitude_law", to_string(c.magnitude_law)));
  c.condition_report = get_or<bool>(j, "condition_report", c.condition_report);
  c.threads = get_or<std::size_t>(j, "threads", c.threads);
  c.output = get_or<std::string>(j, "output", c.output);

  if (j.contains("sparsity")) {
    const json& sp = j.at("sparsity");
    if (!sp.is_object()) throw ConfigError("config key 'sparsity' must be an object");
    check_keys(sp, {"s", "levels", "band_percentages", "levels_2d"}, "sparsity.");
    if (sp.contains("s")) c.sparsity.s = get_or<std::size_t>(sp, "s", 0);
    if (sp.contains("levels")) c.sparsity.levels = get_or<std::vector<std::size_t>>(sp, "levels", {});
    if (sp.contains("band_percentages"))
      c.sparsity.band_percentages = get_or<std::vector<double>>(sp, "band_percentages", {});
    if (sp.contains("levels_2d"))
      c.sparsity.levels_2d = get_or<std::vector<std::vector<std::size_t>>>(sp, "levels_2d", {});
    const int given = int(bool(c.sparsity.s)) + int(bool(c.sparsity.levels)) + int(bool(c.sparsity.band_percentages)) +
                      int(bool(c.sparsity.levels_2d));
    if (given > 1) throw ConfigError("sparsity: give exactly one of s, levels, band_percentages, levels_2d");
    if (c.sparsity.band_percentages)
      for (double p : *c.sparsity.band_percentages)
        if (!(p >= 0.0 && p <= 100.0)) throw ConfigError("sparsity.band_percentages must lie in [0, 100]");
  }
  if (j.contains("solver")) {
    const json& so = j.at("solver");
    check_keys(so, {"max_iters", "kkt_tol", "step_ratio", "adaptive_steps", "restarts", "polish", "check_every"},
               "solver.");
    c.solver.max_iters = get_or<std::size_t>(so, "max_iters", c.solver.max_iters);
    c.solver.kkt_tol = get_or<double>(so, "kkt_tol", c.solver.kkt_tol);
    c.solver.step_ratio = get_or<double>(so, "step_ratio", c.solver.step_ratio);
    c.solver.adaptive_steps = get_or<bool>(so, "adaptive_steps", c.solver.adaptive_steps);
    c.solver.restarts = get_or<bool>(so, "restarts", c.solver.restarts);
    c.solver.polish = get_or<bool>(so, "polish", c.solver.polish);
    c.solver.check_every = get_or<std::size_t>(so, "check_every", c.solver.check_every);
  }
  if (j.contains("adapt")) {
    const json& ad = j.at("adapt");
    check_keys(ad, {"s", "m1", "K", "grid", "grid_points", "strategies"}, "adapt.");
    c.adapt.s = get_or<std::size_t>(ad, "s", c.adapt.s);
    c.adapt.m1 = get_or<std::size_t>(ad, "m1", c.adapt.m1);
    c.adapt.K = get_or<std::size_t>(ad, "K", c.adapt.K);
    c.adapt.grid = get_or<std::string>(ad, "grid", c.adapt.grid);
    c.adapt.grid_points = get_or<std::size_t>(ad, "grid_points", c.adapt.grid_points);
    c.adapt.strategies = get_or<std::vector<std::string>>(ad, "strategies", c.adapt.strategies);
  }

  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.n < 1) throw ConfigError("n must be >= 1");
  if (!(c.eta >= 0.0)) throw ConfigError("eta must be >= 0");
  if (!(c.noise_level >= 0.0)) throw ConfigError("noise_level must be >= 0");
  if (!(c.solver.kkt_tol > 0.0)) throw ConfigError("solver.kkt_tol must be > 0");
  if (!(c.solver.step_ratio > 0.0 && c.solver.step_ratio < 1.0)) throw ConfigError("solver.step_ratio must lie in (0, 1)");
  for (double w : c.exponents)
    if (!(w > 0.0)) throw ConfigError("exponents must be > 0");
  for (std::size_t m : c.m_grid)
    if (m == 0) throw ConfigError("m_grid entries must be >= 1");
  if (c.kind == ExperimentKind::phase_curve && c.m_grid.empty()) throw ConfigError("phase_curve needs a nonempty m_grid");
  if (c.setting != "isolated_1d" && c.setting != "lines_2d") throw ConfigError("setting must be isolated_1d or lines_2d");
  if (c.adapt.grid != "gauss" && c.adapt.grid != "uniform") throw ConfigError("adapt.grid must be gauss or uniform");
  for (const auto& s : c.adapt.strategies) {
    if (s == "adapt_i" || s == "adapt_ii") continue;
    baseline_mode_from_string(s);
  }
  for (const auto& name : c.pi_modes)
    if (name != "uniform") design_mode_from_string(name);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json sp = json::object();
  if (c.sparsity.s) sp["s"] = *c.sparsity.s;
  if (c.sparsity.levels) sp["levels"] = *c.sparsity.levels;
  if (c.sparsity.band_percentages) sp["band_percentages"] = *c.sparsity.band_percentages;
  if (c.sparsity.levels_2d) sp["levels_2d"] = *c.sparsity.levels_2d;
  return json{{"experiment", to_string(c.kind)},
              {"n", c.n},
              {"sparsity", sp},
              {"m", c.m},
              {"m_grid", c.m_grid},
              {"epsilon", c.epsilon},
              {"eta", c.eta},
              {"noise_level", c.noise_level},
              {"trials", c.trials},
              {"seed", c.seed},
              {"pi_modes", c.pi_modes},
              {"exponents", c.exponents},
              {"setting", c.setting},
              {"saturate_levels", c.saturate_levels ? json(*c.saturate_levels) : json(nullptr)},
              {"sign_model", to_string(c.sign_model)},
              {"magnitude_law", to_string(c.magnitude_law)},
              {"condition_report", c.condition_report},
              {"solver",
               {{"max_iters", c.solver.max_iters},
                {"kkt_tol", c.solver.kkt_tol},
                {"step_ratio", c.solver.step_ratio},
                {"adaptive_steps", c.solver.adaptive_steps},
                {"restarts", c.solver.restarts},
                {"polish", c.solver.polish},
                {"check_every", c.solver.check_every}}},
              {"adapt",
               {{"s", c.adapt.s},
                {"m1", c.adapt.m1},
                {"K", c.adapt.K},
                {"grid", c.adapt.grid},
                {"grid_points", c.adapt.grid_points},
                {"strategies", c.adapt.strategies}}},
              {"threads", c.threads},
              {"output", c.output}};
}

double psnr(const ComplexVector& x, const ComplexVector& x_hat) {
  const double err2 = (x - x_hat).squaredNorm();
  if (err2 == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  return 10.0 * std::log10(static_cast<double>(x.size()) * peak * peak / err2);
}

bool exactly_recovered(const ComplexVector& x, const ComplexVector& x_hat) {
  const double err = (x - x_hat).norm();
  const double xn = x.norm();
  return xn == 0.0 ? err == 0.0 : err < 1e-4 * xn;
}

ConditionMargins margins_of(const ConditionCheck& check) {
  return {check.theta_noiseless.margin, check.theta_noisy.margin, check.oracle.margin, check.lambda_gamma.margin,
          check.lambda_m.margin};
}

std::vector<IndexSet> macro_bands(const SubbandPartition& wavelet, std::size_t bands) {
  const std::size_t levels = wavelet.num_levels();
  if (bands < 1 || bands > levels) throw ConfigError("macro_bands: need 1 <= bands <= number of levels");
  std::vector<IndexSet> out;
  IndexSet coarse;
  for (std::size_t j = 0; j + bands <= levels; ++j) coarse = coarse.unite(wavelet.level(j));
  out.push_back(std::move(coarse));
  for (std::size_t j = levels - bands + 1; j < levels; ++j) out.push_back(wavelet.level(j));
  return out;
}

IndexSet support_from_profile(const SubbandPartition& wavelet, const std::vector<double>& percentages,
                              std::uint64_t seed) {
  const auto bands = macro_bands(wavelet, percentages.size());
  CounterRng rng(seed);
  std::vector<std::size_t> ids;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto count = static_cast<std::size_t>(std::llround(percentages[b] / 100.0 * static_cast<double>(bands[b].size())));
    for (std::size_t pos : sample_without_replacement(rng, bands[b].size(), std::min(count, bands[b].size())))
      ids.push_back(bands[b][pos]);
  }
  return IndexSet(std::move(ids));
}

ExperimentResult run_coherence_report(const ExperimentConfig& c) {
  const std::size_t m = require_m(c);
  Context1D ctx = make_context_1d(c, {"pi_inf", "pi_theta_iso", "pi_lambda_iso", "pi_lambda_tilde"});
  const std::uint64_t ts = derive_seed(c.seed, 0);
  const IndexSet s = make_support_1d(c, ctx.fh.wavelet, derive_seed(ts, kSupportStream));
  const LevelSparsity levels = measure_level_sparsity(ctx.fh.wavelet, s);

  ExperimentResult res;
  res.config = c;
  res.details = json{{"support", s.ids()}, {"level_sparsity", levels.counts}, {"modes", json::array()}};
  for (const auto& mode : ctx.modes) {
    const ProbabilityDistribution pi = design_1d(mode, ctx, s, levels);
    TrialRecord r;
    r.mode = mode.label;
    r.m = m;
    r.psnr = kNaN;
    r.l2_error = kNaN;
    json entry{{"mode", mode.label}};
    try {
      CoherenceReport rep = coherence_iso(ctx.fh.a0, s, pi);
      if (s.size() < c.n) rep.lambda_enlarged = lambda_enlarged_iso(ctx.fh.a0, s, pi);
      const ConditionCheck check = recovery_condition_report(rep, c.n, c.epsilon, m);
      r.theta = rep.theta;
      r.lambda = rep.lambda;
      r.gamma = rep.gamma;
      r.margins = margins_of(check);
      entry["coherence"] = to_json(rep);
      entry["conditions"] = to_json(check);
    } catch (const InfiniteCoherenceError& e) {
      set_nan_coherence(r);
      entry["error"] = e.what();
    }
    res.details["modes"].push_back(std::move(entry));
    res.records.push_back(std::move(r));
  }
  return res;
}

ExperimentResult run_strategy_compare_1d(const ExperimentConfig& c) {
  const std::size_t m = require_m(c);
  const Context1D ctx = make_context_1d(c, {"pi_inf", "pi_fh_theta", "pi_fh_lambda"});
  return collect(c, [&](std::size_t t) { return run_trial_1d(c, ctx, t, {m}); });
}

ExperimentResult run_lines_2d(const ExperimentConfig& c) {
  const std::size_t m = require_m(c);
  const Context2D ctx = make_context_2d(c);
  return collect(c, [&](std::size_t t) { return run_trial_2d(c, ctx, t, {m}); });
}

ExperimentResult run_phase_curve(const ExperimentConfig& c) {
  if (c.m_grid.empty()) throw ConfigError("phase_curve needs a nonempty m_grid");
  ExperimentResult res;
  if (c.setting == "lines_2d") {
    const Context2D ctx = make_context_2d(c);
    res = collect(c, [&](std::size_t t) { return run_trial_2d(c, ctx, t, c.m_grid); });
  } else {
    const Context1D ctx = make_context_1d(c, {"pi_inf", "pi_fh_theta", "pi_fh_lambda"});
    res = collect(c, [&](std::size_t t) { return run_trial_1d(c, ctx, t, c.m_grid); });
  }
  for (const auto& mode : mode_order(res.records)) {
    for (std::size_t m : c.m_grid) {
      PhasePoint p;
      p.mode = mode;
      p.m = m;
      ConditionMargins sum{};
      for (const auto& r : res.records) {
        if (r.mode != mode || r.m != m) continue;
        ++p.trials;
        if (r.recovered) ++p.successes;
        sum.theta_noiseless += r.margins.theta_noiseless;
        sum.theta_noisy += r.margins.theta_noisy;
        sum.oracle += r.margins.oracle;
        sum.lambda_gamma += r.margins.lambda_gamma;
        sum.lambda_m += r.margins.lambda_m;
      }
      const double k = static_cast<double>(std::max<std::size_t>(p.trials, 1));
      p.success_rate = static_cast<double>(p.successes) / k;
      p.mean_margins = {sum.theta_noiseless / k, sum.theta_noisy / k, sum.oracle / k, sum.lambda_gamma / k,
                        sum.lambda_m / k};
      res.phase.push_back(p);
    }
  }
  return res;
}

ExperimentResult run_adapt_experiment(const ExperimentConfig& c) {
  const AdaptConfig& ad = c.adapt;
  const std::size_t n = c.n;
  if (ad.s > n) throw ConfigError("adapt.s exceeds n");
  SamplingGrid grid = ad.grid == "uniform" ? SamplingGrid::uniform(ad.grid_points) : SamplingGrid::gauss();
  if (ad.grid == "uniform" && ad.grid_points == 0) throw ConfigError("adapt.grid_points must be >= 1 for a uniform grid");
  const std::size_t m_total = ad.K * ad.m1;
  if (m_total == 0) throw ConfigError("adapt.K * adapt.m1 must be >= 1");

  std::vector<TrialOutcome> outcomes(c.trials);
  std::vector<std::vector<TraceRow>> traces(c.trials);
  parallel_for(c.trials, c.threads, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(c.seed, t);
    const IndexSet s = random_support(n, ad.s, derive_seed(ts, kSupportStream));
    CounterRng crng(derive_seed(ts, kSignalStream));
    ComplexVector x = ComplexVector::Zero(Eigen::Index(n));
    for (std::size_t i : s) x(Eigen::Index(i)) = crng.normal();

    for (std::size_t q = 0; q < ad.strategies.size(); ++q) {
      const std::string& name = ad.strategies[q];
      const std::uint64_t ms = derive_seed(ts, kModeStreamBase + q);
      TrialRecord r;
      r.trial = t;
      r.mode = name;
      r.m = m_total;
      set_nan_coherence(r);
      ComplexVector x_hat;
      if (name == "adapt_i" || name == "adapt_ii") {
        AdaptOptions o;
        o.variant = adapt_variant_from_string(name);
        o.s = ad.s;
        o.n = n;
        o.K = ad.K;
        o.m1 = ad.m1;
        o.eta = c.eta;
        o.seed = ms;
        o.grid = grid;
        o.solver = c.solver;
        const AdaptResult ar = run_adapt(x, o);
        x_hat = ar.estimate;
        r.converged = true;
        for (const auto& sol : ar.solves) {
          r.iterations += sol.iterations;
          r.converged = r.converged && sol.converged;
        }
        for (std::size_t k = 0; k < ar.trace.dist_to_cheb.size(); ++k)
          traces[t].push_back({t, name, k + 1, ar.trace.dist_to_cheb[k], ar.trace.l2_error[k]});
      } else {
        const SampledSystem sys = nonadaptive_baselines(baseline_mode_from_string(name), n, m_total, ms);
        const ComplexVector y = sys.a.apply(x);
        const SolverResult sol = solve_qbp(sys.a, y, c.eta, c.solver);
        x_hat = sol.x_hat;
        r.iterations = sol.iterations;
        r.converged = sol.converged;
      }
      r.psnr = psnr(x, x_hat);
      r.l2_error = (x_hat - x).norm();
      r.recovered = exactly_recovered(x, x_hat);
      ++outcomes[t].solves;
      if (!r.converged) ++outcomes[t].failures;
      outcomes[t].records.push_back(std::move(r));
    }
  });

  ExperimentResult res;
  res.config = c;
  for (std::size_t t = 0; t < c.trials; ++t) {
    res.solves += outcomes[t].solves;
    res.solver_failures += outcomes[t].failures;
    for (auto& r : outcomes[t].records) res.records.push_back(std::move(r));
    for (auto& row : traces[t]) res.traces.push_back(std::move(row));
  }
  return res;
}

ExperimentResult run_design(const ExperimentConfig& c) {
  const std::size_t m = c.m;
  Context1D ctx = make_context_1d(c, {"uniform", "pi_inf", "pi_fh_theta", "pi_fh_lambda"});
  const std::uint64_t ts = derive_seed(c.seed, 0);
  const IndexSet s = make_support_1d(c, ctx.fh.wavelet, derive_seed(ts, kSupportStream));
  const LevelSparsity levels = measure_level_sparsity(ctx.fh.wavelet, s);
  CoherenceNumerators num;
  num.theta = theta_numerators_iso(ctx.fh.a0, s);
  num.lambda = lambda_numerators_iso(ctx.fh.a0, s);
  num.gamma = &ctx.gamma_num;

  ExperimentResult res;
  res.config = c;
  res.details = json{{"support", s.ids()}, {"level_sparsity", levels.counts}, {"designs", json::array()}};
  for (const auto& mode : ctx.modes) {
    const ProbabilityDistribution pi = design_1d(mode, ctx, s, levels);
    TrialRecord r;
    r.mode = mode.label;
    r.m = m;
    r.psnr = r.l2_error = kNaN;
    if (m > 0)
      fill_coherence(r, num, s, pi, c.n, c.epsilon, m);
    else
      set_nan_coherence(r);
    res.details["designs"].push_back(json{{"mode", mode.label}, {"pi", to_json(pi)}});
    res.records.push_back(std::move(r));
  }
  return res;
}

ExperimentResult run_recover(const ExperimentConfig& c) {
  const std::size_t m = require_m(c);
  const Context1D ctx = make_context_1d(c, {"pi_fh_lambda"});
  const std::uint64_t ts = derive_seed(c.seed, 0);
  const IndexSet s = make_support_1d(c, ctx.fh.wavelet, derive_seed(ts, kSupportStream));
  const SignalInstance sig =
      make_signal(c.n, s, c.sign_model, c.magnitude_law, derive_seed(ts, kSignalStream), &ctx.fh.wavelet);
  const LevelSparsity levels = measure_level_sparsity(ctx.fh.wavelet, s);
  const IndexSet saturated =
      c.saturate_levels ? saturate_low_frequencies(ctx.fh.frequency, *c.saturate_levels) : IndexSet{};

  ExperimentResult res;
  res.config = c;
  res.details = json{{"signal", to_json(sig)}, {"instances", json::array()}};
  for (std::size_t q = 0; q < ctx.modes.size(); ++q) {
    const ModeSpec& mode = ctx.modes[q];
    const ProbabilityDistribution pi = design_1d(mode, ctx, s, levels);
    CounterRng rng(derive_seed(ts, kModeStreamBase + q));
    const LinearMap a = sample_rows_1d(c.n, pi, m, saturated, rng);
    ComplexVector y = a.apply(sig.coefficients);
    const Real eta = add_noise(y, c.noise_level, c.eta, derive_seed(derive_seed(ts, kNoiseStream), q));
    const SolverResult sol = solve_qbp(a, y, eta, c.solver);
    TrialRecord r;
    r.mode = mode.label;
    r.m = m;
    r.psnr = psnr(sig.coefficients, sol.x_hat);
    r.l2_error = (sol.x_hat - sig.coefficients).norm();
    r.recovered = exactly_recovered(sig.coefficients, sol.x_hat);
    r.iterations = sol.iterations;
    r.converged = sol.converged;
    set_nan_coherence(r);
    ++res.solves;
    if (!sol.converged) ++res.solver_failures;
    res.details["instances"].push_back(
        json{{"mode", mode.label}, {"eta", eta}, {"y", to_json(y)}, {"result", to_json(sol)}});
    res.records.push_back(std::move(r));
  }
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::coherence_report: return run_coherence_report(c);
    case ExperimentKind::strategy_compare_1d: return run_strategy_compare_1d(c);
    case ExperimentKind::lines_2d: return run_lines_2d(c);
    case ExperimentKind::adapt_legendre: return run_adapt_experiment(c);
    case ExperimentKind::phase_curve: return run_phase_curve(c);
  }
  throw ConfigError("unknown experiment kind");
}

double median_psnr(const std::vector<TrialRecord>& records, const std::string& mode) {
  std::vector<double> v;
  for (const auto& r : records)
    if (r.mode == mode) v.push_back(r.psnr);
  return median_of(std::move(v));
}

double median_l2_error(const std::vector<TrialRecord>& records, const std::string& mode) {
  std::vector<double> v;
  for (const auto& r : records)
    if (r.mode == mode) v.push_back(r.l2_error);
  return median_of(std::move(v));
}

json emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::string> files;
  files["records.csv"] = records_to_csv(result.records);
  if (!result.phase.empty()) files["phase.csv"] = phase_to_csv(result.phase);
  if (!result.traces.empty()) files["trace.csv"] = traces_to_csv(result.traces);
  if (!result.details.is_null()) files["details.json"] = result.details.dump(2) + "\n";

  const json echo = config_to_json(result.config);
  const std::string canonical = echo.dump();
  json summary = json::object();
  for (const auto& mode : mode_order(result.records)) {
    std::size_t count = 0, ok = 0;
    for (const auto& r : result.records)
      if (r.mode == mode) {
        ++count;
        if (r.recovered) ++ok;
      }
    summary[mode] = {{"records", count},
                     {"median_psnr", number_or_string(median_psnr(result.records, mode))},
                     {"median_l2_error", number_or_string(median_l2_error(result.records, mode))},
                     {"recovery_rate", static_cast<double>(ok) / static_cast<double>(count)}};
  }
  json file_hashes = json::object();
  for (const auto& [name, content] : files) file_hashes[name] = git_blob_sha1(content);

  json manifest{{"config", echo},
                {"seed", result.config.seed},
                {"config_hash", git_blob_sha1(canonical)},
                {"csv_version", kCsvVersion},
                {"csv_columns", record_columns()},
                {"psnr_definition", "10*log10(n*max_i|x_i|^2 / ||x - x_hat||_2^2), +inf for zero error"},
                {"recovery_threshold", "||x - x_hat||_2 < 1e-4 * ||x||_2"},
                {"solves", result.solves},
                {"solver_failures", result.solver_failures},
                {"files", file_hashes},
                {"summary", summary}};
  for (const auto& [name, content] : files) write_file(dir / name, content);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace vds
