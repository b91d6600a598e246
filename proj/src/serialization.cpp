#include "vds/serialization.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/sha.h>

namespace vds {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t parse_count(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("CSV: bad integer '" + s + "'");
  return v;
}

bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ConfigError("CSV: bad flag '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("CSV: bad number '" + s + "'");
  return v;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::ostringstream os;
  for (unsigned char b : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
  return os.str();
}

nlohmann::json to_json(const ProbabilityDistribution& pi) { return pi.weights(); }

ProbabilityDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("distribution: expected a JSON array");
  return ProbabilityDistribution(j.get<std::vector<Real>>());
}

nlohmann::json to_json(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ComplexVector complex_vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("complex vector: expected a JSON array");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_array() || e.size() != 2) throw ConfigError("complex vector: entries must be [re, im]");
    v(Eigen::Index(i)) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  return v;
}

nlohmann::json to_json(const SignalInstance& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (std::size_t i : s.support) {
    const Complex c = s.coefficients(Eigen::Index(i));
    coeffs.push_back({c.real(), c.imag()});
  }
  return {{"n", s.n},
          {"support", s.support.ids()},
          {"coefficients", coeffs},
          {"sign_model", to_string(s.sign_model)},
          {"magnitudes", s.magnitudes}};
}

SignalInstance signal_from_json(const nlohmann::json& j) {
  try {
    SignalInstance s;
    s.n = j.at("n").get<std::size_t>();
    s.support = IndexSet(j.at("support").get<std::vector<std::size_t>>());
    if (!s.support.empty() && s.support.max_index() >= s.n) throw ConfigError("signal: support outside {0..n-1}");
    const ComplexVector on_support = complex_vector_from_json(j.at("coefficients"));
    if (static_cast<std::size_t>(on_support.size()) != s.support.size())
      throw ConfigError("signal: one coefficient per support element");
    s.coefficients = embed(on_support, s.support, s.n);
    s.sign_model = sign_model_from_string(j.at("sign_model").get<std::string>());
    s.magnitudes = j.at("magnitudes").get<std::vector<Real>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("signal: ") + e.what());
  }
}

nlohmann::json to_json(const SolverResult& r) {
  return {{"x_hat", to_json(r.x_hat)},
          {"iterations", r.iterations},
          {"primal_residual", r.primal_residual},
          {"dual_residual", r.dual_residual},
          {"feasibility_gap", r.feasibility_gap},
          {"converged", r.converged},
          {"polished", r.polished}};
}

nlohmann::json to_json(const CoherenceReport& r) {
  nlohmann::json j{{"theta", r.theta},
                   {"lambda", r.lambda},
                   {"gamma", r.gamma},
                   {"support", r.support.ids()},
                   {"pi", to_json(r.pi)}};
  if (r.lambda_enlarged) j["lambda_enlarged"] = *r.lambda_enlarged;
  return j;
}

nlohmann::json to_json(const ConditionCheck& c) {
  auto cond = [](const Condition& x) {
    return nlohmann::json{{"satisfied", x.satisfied}, {"margin", x.margin}, {"required", x.required}};
  };
  nlohmann::json j{{"theta_noiseless", cond(c.theta_noiseless)},
                   {"theta_noisy", cond(c.theta_noisy)},
                   {"oracle", cond(c.oracle)},
                   {"lambda_gamma", cond(c.lambda_gamma)},
                   {"lambda_m", cond(c.lambda_m)},
                   {"constants",
                    {{"theta_noiseless", c.constants.theta_noiseless},
                     {"theta_noisy", c.constants.theta_noisy},
                     {"oracle", c.constants.oracle},
                     {"lambda_gamma", c.constants.lambda_gamma},
                     {"lambda_m", c.constants.lambda_m},
                     {"enlarged", c.constants.enlarged}}}};
  if (c.enlarged) j["enlarged"] = cond(*c.enlarged);
  return j;
}

std::string drawn_ids_csv(const std::vector<std::vector<std::size_t>>& draws_per_trial) {
  std::string out = "trial,draw_index,block_id\n";
  for (std::size_t t = 0; t < draws_per_trial.size(); ++t)
    for (std::size_t l = 0; l < draws_per_trial[t].size(); ++l)
      out += std::to_string(t) + ',' + std::to_string(l) + ',' + std::to_string(draws_per_trial[t][l]) + '\n';
  return out;
}

std::string trace_csv(const MeasureTrace& trace) {
  std::string out = "k,dist_to_cheb,l2_error\n";
  for (std::size_t k = 0; k < trace.dist_to_cheb.size(); ++k)
    out += std::to_string(k + 1) + ',' + format_double(trace.dist_to_cheb[k]) + ',' + format_double(trace.l2_error[k]) +
           '\n';
  return out;
}

nlohmann::json measures_to_json(const MeasureTrace& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& pi : trace.measures) out.push_back(to_json(pi));
  return out;
}

std::vector<std::string> record_columns() {
  return {"trial",  "mode",  "m",     "psnr",           "l2_error",           "recovered",     "iterations",
          "converged", "theta", "lambda", "gamma",   "margin_theta_noiseless", "margin_theta_noisy",
          "margin_oracle", "margin_lambda_gamma", "margin_lambda_m"};
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::string out;
  const auto cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : records) {
    if (r.mode.find_first_of(",\n\"") != std::string::npos) throw ArgumentError("records_to_csv: mode label needs quoting");
    out += std::to_string(r.trial) + ',' + r.mode + ',' + std::to_string(r.m) + ',' + format_double(r.psnr) + ',' +
           format_double(r.l2_error) + ',' + (r.recovered ? "1" : "0") + ',' + std::to_string(r.iterations) + ',' +
           (r.converged ? "1" : "0") + ',' + format_double(r.theta) + ',' + format_double(r.lambda) + ',' +
           format_double(r.gamma) + ',' + format_double(r.margins.theta_noiseless) + ',' +
           format_double(r.margins.theta_noisy) + ',' + format_double(r.margins.oracle) + ',' +
           format_double(r.margins.lambda_gamma) + ',' + format_double(r.margins.lambda_m) + '\n';
  }
  return out;
}

std::vector<TrialRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV: missing header");
  const auto cols = record_columns();
  if (split(line, ',') != cols) throw ConfigError("CSV: unexpected header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != cols.size()) throw ConfigError("CSV: wrong field count");
    TrialRecord r;
    r.trial = parse_count(f[0]);
    r.mode = f[1];
    r.m = parse_count(f[2]);
    r.psnr = parse_double(f[3]);
    r.l2_error = parse_double(f[4]);
    r.recovered = parse_flag(f[5]);
    r.iterations = parse_count(f[6]);
    r.converged = parse_flag(f[7]);
    r.theta = parse_double(f[8]);
    r.lambda = parse_double(f[9]);
    r.gamma = parse_double(f[10]);
    r.margins.theta_noiseless = parse_double(f[11]);
    r.margins.theta_noisy = parse_double(f[12]);
    r.margins.oracle = parse_double(f[13]);
    r.margins.lambda_gamma = parse_double(f[14]);
    r.margins.lambda_m = parse_double(f[15]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string phase_to_csv(const std::vector<PhasePoint>& points) {
  std::string out =
      "mode,m,trials,successes,success_rate,mean_margin_theta_noiseless,mean_margin_theta_noisy,"
      "mean_margin_oracle,mean_margin_lambda_gamma,mean_margin_lambda_m\n";
  for (const auto& p : points)
    out += p.mode + ',' + std::to_string(p.m) + ',' + std::to_string(p.trials) + ',' + std::to_string(p.successes) + ',' +
           format_double(p.success_rate) + ',' + format_double(p.mean_margins.theta_noiseless) + ',' +
           format_double(p.mean_margins.theta_noisy) + ',' + format_double(p.mean_margins.oracle) + ',' +
           format_double(p.mean_margins.lambda_gamma) + ',' + format_double(p.mean_margins.lambda_m) + '\n';
  return out;
}

std::string traces_to_csv(const std::vector<TraceRow>& rows) {
  std::string out = "trial,variant,k,dist_to_cheb,l2_error\n";
  for (const auto& r : rows)
    out += std::to_string(r.trial) + ',' + r.variant + ',' + std::to_string(r.k) + ',' + format_double(r.dist_to_cheb) +
           ',' + format_double(r.l2_error) + '\n';
  return out;
}

}  // namespace vds
