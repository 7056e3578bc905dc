#include "sace/simlab.hpp"

#include "sace/csv.hpp"
#include "sace/errors.hpp"
#include "sace/parallel.hpp"
#include "sace/rng.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace sace {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value, std::size_t line) {
  const auto v = csv::parse_number(value);
  if (!v) throw ParseError(line, "key '" + key + "' needs a number, got '" + value + "'");
  return *v;
}

CoefficientVector make_beta(const ScenarioConfig& cfg, std::mt19937_64& gen) {
  if (cfg.q > cfg.p) throw InvalidArgument("q exceeds p");
  Vector beta = Vector::Zero(cfg.p);
  std::uniform_real_distribution<double> unif(0.5, 1.0);
  for (Index j = 0; j < cfg.q; ++j) {
    beta[j] = cfg.beta_mode == BetaMode::Const3 ? 3.0 : unif(gen);
  }
  return CoefficientVector(std::move(beta));
}

Dataset attach_response(Matrix X, const CoefficientVector& beta, double sigma,
                        std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y = X * beta.values();
  for (Index i = 0; i < y.size(); ++i) y[i] += sigma * normal(gen);
  return Dataset(std::move(X), std::move(y));
}

void accumulate(MetricRow& sum, MetricRow& sq, const MetricRow& m) {
  sum.l2_error += m.l2_error;
  sum.tpr += m.tpr;
  sum.tnr += m.tnr;
  sq.l2_error += m.l2_error * m.l2_error;
  sq.tpr += m.tpr * m.tpr;
  sq.tnr += m.tnr * m.tnr;
}

void finalize(MetricRow& mean, MetricRow& se, const MetricRow& sum, const MetricRow& sq, int n) {
  if (n == 0) return;
  const double nd = n;
  auto stat = [&](double s, double s2, double& m, double& e) {
    m = s / nd;
    const double var = n > 1 ? std::max(0.0, (s2 - nd * m * m) / (nd - 1.0)) : 0.0;
    e = std::sqrt(var / nd);
  };
  stat(sum.l2_error, sq.l2_error, mean.l2_error, se.l2_error);
  stat(sum.tpr, sq.tpr, mean.tpr, se.tpr);
  stat(sum.tnr, sq.tnr, mean.tnr, se.tnr);
}

}  // namespace

ScenarioConfig scenario_case(Example example, int case_number) {
  if (case_number < 1 || case_number > 4) throw InvalidArgument("case must be 1, 2, 3 or 4");
  ScenarioConfig cfg;
  cfg.example = example;
  cfg.noise_sigma = case_number <= 2 ? 0.4 : 2.0;
  const bool second = case_number % 2 == 0;
  if (example == Example::Ex1) {
    cfg.tail = second ? TailCovariance::AR05 : TailCovariance::Identity;
    cfg.beta_mode = BetaMode::Const3;
  } else {
    cfg.beta_mode = second ? BetaMode::Unif05_1 : BetaMode::Const3;
  }
  return cfg;
}

ScenarioConfig parse_scenario_config(const std::string& text, ScenarioConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  ScenarioConfig cfg = base;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "example") {
      const auto v = static_cast<int>(to_double(key, value, line_no));
      if (v != 1 && v != 2) throw ParseError(line_no, "example must be 1 or 2");
      cfg.example = v == 1 ? Example::Ex1 : Example::Ex2;
    } else if (key == "case") {
      const auto c = static_cast<int>(to_double(key, value, line_no));
      const auto preset = scenario_case(cfg.example, c);
      cfg.noise_sigma = preset.noise_sigma;
      cfg.tail = preset.tail;
      cfg.beta_mode = preset.beta_mode;
    } else if (key == "n") {
      cfg.n = static_cast<Index>(to_double(key, value, line_no));
    } else if (key == "p") {
      cfg.p = static_cast<Index>(to_double(key, value, line_no));
    } else if (key == "q") {
      cfg.q = static_cast<Index>(to_double(key, value, line_no));
    } else if (key == "tail") {
      if (value == "identity") cfg.tail = TailCovariance::Identity;
      else if (value == "ar0.5") cfg.tail = TailCovariance::AR05;
      else throw ParseError(line_no, "tail must be identity or ar0.5");
    } else if (key == "group_noise_sd") {
      cfg.group_noise_sd = to_double(key, value, line_no);
    } else if (key == "equicorrelation") {
      cfg.equicorrelation = to_double(key, value, line_no);
    } else if (key == "beta") {
      if (value == "const3") cfg.beta_mode = BetaMode::Const3;
      else if (value == "unif0.5-1") cfg.beta_mode = BetaMode::Unif05_1;
      else throw ParseError(line_no, "beta must be const3 or unif0.5-1");
    } else if (key == "sigma") {
      cfg.noise_sigma = to_double(key, value, line_no);
    } else if (key == "reps") {
      cfg.reps = static_cast<int>(to_double(key, value, line_no));
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "n_lambda") {
      cfg.n_lambda = static_cast<int>(to_double(key, value, line_no));
    } else if (key == "lambda_min_ratio") {
      cfg.lambda_min_ratio = to_double(key, value, line_no);
    } else if (key == "folds") {
      cfg.folds = static_cast<int>(to_double(key, value, line_no));
    } else if (key == "small_fraction") {
      cfg.small_fraction = to_double(key, value, line_no);
    } else {
      throw ParseError(line_no, "unknown key '" + key + "'");
    }
  }
  if (cfg.n < 2 || cfg.p < 1 || cfg.q < 0 || cfg.q > cfg.p || cfg.reps < 1) {
    throw InvalidArgument("scenario config has invalid dimensions or reps");
  }
  if (cfg.example == Example::Ex1 && cfg.p < 15) {
    throw InvalidArgument("Example 1 needs p >= 15 for its three correlated groups");
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str(), std::move(base));
}

std::string to_key_value(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "example=" << (cfg.example == Example::Ex1 ? 1 : 2) << '\n'
      << "n=" << cfg.n << '\n'
      << "p=" << cfg.p << '\n'
      << "q=" << cfg.q << '\n'
      << "tail=" << (cfg.tail == TailCovariance::Identity ? "identity" : "ar0.5") << '\n'
      << "group_noise_sd=" << csv::format(cfg.group_noise_sd) << '\n'
      << "equicorrelation=" << csv::format(cfg.equicorrelation) << '\n'
      << "beta=" << (cfg.beta_mode == BetaMode::Const3 ? "const3" : "unif0.5-1") << '\n'
      << "sigma=" << csv::format(cfg.noise_sigma) << '\n'
      << "reps=" << cfg.reps << '\n'
      << "seed=" << cfg.seed << '\n'
      << "n_lambda=" << cfg.n_lambda << '\n'
      << "lambda_min_ratio=" << csv::format(cfg.lambda_min_ratio) << '\n'
      << "folds=" << cfg.folds << '\n'
      << "small_fraction=" << csv::format(cfg.small_fraction) << '\n';
  return out.str();
}

SimulatedData gen_example1(const ScenarioConfig& cfg, std::uint64_t rep_seed) {
  if (cfg.p < 15) throw InvalidArgument("Example 1 needs p >= 15");
  std::mt19937_64 gen(derive_seed(rep_seed, "design"));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = cfg.n;
  const Index p = cfg.p;

  Matrix X(n, p);
  for (Index g = 0; g < 3; ++g) {
    Vector z(n);
    for (Index i = 0; i < n; ++i) z[i] = normal(gen);
    for (Index c = 0; c < 5; ++c) {
      for (Index i = 0; i < n; ++i) X(i, g * 5 + c) = z[i] + cfg.group_noise_sd * normal(gen);
    }
  }
  const double rho = 0.5;
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 15; j < p; ++j) {
      const double e = normal(gen);
      X(i, j) = (cfg.tail == TailCovariance::AR05 && j > 15) ? rho * X(i, j - 1) + innovation * e
                                                             : e;
    }
  }

  std::mt19937_64 response_gen(derive_seed(rep_seed, "response"));
  auto beta = make_beta(cfg, response_gen);
  auto data = attach_response(std::move(X), beta, cfg.noise_sigma, response_gen);
  return {std::move(data), std::move(beta)};
}

SimulatedData gen_example2(const ScenarioConfig& cfg, std::uint64_t rep_seed) {
  if (!(cfg.equicorrelation >= 0.0 && cfg.equicorrelation < 1.0)) {
    throw InvalidArgument("equicorrelation must lie in [0, 1)");
  }
  std::mt19937_64 gen(derive_seed(rep_seed, "design"));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shared = std::sqrt(cfg.equicorrelation);
  const double own = std::sqrt(1.0 - cfg.equicorrelation);
  Matrix X(cfg.n, cfg.p);
  for (Index i = 0; i < cfg.n; ++i) {
    const double w = normal(gen);
    for (Index j = 0; j < cfg.p; ++j) X(i, j) = shared * w + own * normal(gen);
  }
  std::mt19937_64 response_gen(derive_seed(rep_seed, "response"));
  auto beta = make_beta(cfg, response_gen);
  auto data = attach_response(std::move(X), beta, cfg.noise_sigma, response_gen);
  return {std::move(data), std::move(beta)};
}

SimulatedData generate(const ScenarioConfig& cfg, std::uint64_t rep_seed) {
  return cfg.example == Example::Ex1 ? gen_example1(cfg, rep_seed) : gen_example2(cfg, rep_seed);
}

MetricRow compute_metrics(const CoefficientVector& beta_hat, const CoefficientVector& beta_true) {
  if (beta_hat.size() != beta_true.size()) throw DimensionMismatch("length mismatch");
  MetricRow row;
  row.l2_error = (beta_hat.values() - beta_true.values()).norm();
  Index positives = 0;
  Index negatives = 0;
  Index tp = 0;
  Index tn = 0;
  for (Index j = 0; j < beta_true.size(); ++j) {
    const bool truth = beta_true[j] != 0.0;
    const bool est = beta_hat[j] != 0.0;
    if (truth) {
      ++positives;
      if (est) ++tp;
    } else {
      ++negatives;
      if (!est) ++tn;
    }
  }
  row.tpr = positives > 0 ? static_cast<double>(tp) / static_cast<double>(positives) : 1.0;
  row.tnr = negatives > 0 ? static_cast<double>(tn) / static_cast<double>(negatives) : 1.0;
  return row;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::vector<Method>& methods,
                            bool with_threshold, const RunOptions& opts) {
  if (methods.empty()) throw InvalidArgument("no methods requested");
  ScenarioResult result;
  result.config = cfg;
  const auto reps = static_cast<std::size_t>(cfg.reps);
  result.fits.assign(reps, std::vector<ReplicationFit>(methods.size()));
  result.truths.resize(reps);

  parallel_for(reps, opts.jobs, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, "rep", r);
    const auto sim = generate(cfg, rep_seed);
    result.truths[r] = sim.beta;
    const auto std_data = standardize(sim.data);
    const auto grid = make_grid(std_data.data, cfg.n_lambda, cfg.lambda_min_ratio);
    CvOptions cv_opts;
    cv_opts.folds = cfg.folds;
    cv_opts.solver = opts.solver;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      auto& out = result.fits[r][m];
      out.method = methods[m];
      try {
        const auto cv =
            cross_validate(std_data.data, methods[m], grid, derive_seed(rep_seed, "cv"), cv_opts);
        out.params = cv.best.params;
        const auto fit = fit_on_path(std_data.data, methods[m], grid, cv.best.params, opts.solver);
        out.beta = std_data.record.to_raw(fit.beta);
        out.beta_thresholded =
            with_threshold ? apply_threshold(out.beta, cfg.p, cfg.small_fraction).first : out.beta;
      } catch (const Error&) {
        out.failed = true;
        out.beta = CoefficientVector::zeros(cfg.p);
        out.beta_thresholded = out.beta;
      }
    }
  });

  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s;
    s.method = methods[m];
    MetricRow sum, sq, tsum, tsq;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& f = result.fits[r][m];
      if (f.failed) {
        ++s.failures;
        continue;
      }
      ++s.completed;
      accumulate(sum, sq, compute_metrics(f.beta, result.truths[r]));
      accumulate(tsum, tsq, compute_metrics(f.beta_thresholded, result.truths[r]));
    }
    finalize(s.mean, s.std_err, sum, sq, s.completed);
    finalize(s.mean_thresholded, s.std_err_thresholded, tsum, tsq, s.completed);
    const std::string name(to_string(methods[m]));
    s.mean.method = s.std_err.method = name;
    s.mean_thresholded.method = s.std_err_thresholded.method = name;
    s.mean_thresholded.thresholded = s.std_err_thresholded.thresholded = true;
    result.summaries.push_back(s);
  }
  return result;
}

std::vector<ProfileRecord> export_estimate_profile(
    const std::vector<std::pair<std::string, CoefficientVector>>& fits,
    const CoefficientVector& beta_true) {
  std::vector<ProfileRecord> rows;
  rows.reserve(static_cast<std::size_t>(beta_true.size()) * (fits.size() + 1));
  for (const auto& [name, beta] : fits) {
    if (beta.size() != beta_true.size()) throw DimensionMismatch("profile length mismatch");
    for (Index j = 0; j < beta.size(); ++j) rows.push_back({name, j, beta[j], beta_true[j]});
  }
  for (Index j = 0; j < beta_true.size(); ++j) {
    rows.push_back({"truth", j, beta_true[j], beta_true[j]});
  }
  return rows;
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<ProfileRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "method,index,estimate,truth\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.index << ',' << csv::format_exact(r.estimate) << ','
        << csv::format_exact(r.truth) << '\n';
  }
}

std::vector<ProfileRecord> read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<ProfileRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
    const auto idx = csv::parse_number(f[1]);
    const auto est = csv::parse_number(f[2]);
    const auto truth = csv::parse_number(f[3]);
    if (!idx || !est || !truth) throw ParseError(line_no, "malformed number");
    rows.push_back({f[0], static_cast<Index>(*idx), *est, *truth});
  }
  return rows;
}

void write_scenario_table(const std::filesystem::path& path, const ScenarioResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "method,l2_error,l2_error_se,tpr,tnr,l2_error_thresh,tpr_thresh,tnr_thresh,completed,"
         "failures\n";
  for (const auto& s : result.summaries) {
    out << to_string(s.method) << ',' << csv::format(s.mean.l2_error) << ','
        << csv::format(s.std_err.l2_error) << ',' << csv::format(s.mean.tpr) << ','
        << csv::format(s.mean.tnr) << ',' << csv::format(s.mean_thresholded.l2_error) << ','
        << csv::format(s.mean_thresholded.tpr) << ',' << csv::format(s.mean_thresholded.tnr)
        << ',' << s.completed << ',' << s.failures << '\n';
  }
}

}  // namespace sace
