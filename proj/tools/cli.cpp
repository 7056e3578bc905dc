#include "cli.hpp"

#include "sace/csv.hpp"
#include "sace/model.hpp"
#include "sace/rng.hpp"
#include "sace/simlab.hpp"
#include "sace/solvers.hpp"
#include "sace/tracker.hpp"
#include "sace/tuning.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sace::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Input problems detected by the CLI itself rather than the library.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  for (const auto& name : split_list(text)) out.push_back(parse_method(name));
  if (out.empty()) throw UsageError("no methods given");
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    const auto v = csv::parse_number(item);
    if (!v) throw UsageError("bad number '" + item + "' in --" + what);
    out.push_back(*v);
  }
  return out;
}

double number(double v) { return std::strtod(csv::format(v).c_str(), nullptr); }

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

// Applies key=value lines from a config file to every option the command line
// left unset. Unknown keys are input errors.
void apply_config(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto fields = csv::split(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw ParseError(line_no, "unknown config key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") opt->add_result("true");
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

// Every option of `cmd` with its resolved value, in declaration order.
Json resolved_options(const CLI::App& cmd) {
  Json j = Json::object();
  for (const CLI::Option* opt : cmd.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "jobs" || name == "out") continue;
    if (opt->get_type_size() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      j[name] = opt->as<std::string>();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

// --jobs and --out are left out: neither changes any output byte, so runs that
// differ only in them produce identical directories.
Json manifest(const CLI::App& cmd, std::uint64_t seed, const std::string& config) {
  Json j;
  j["tool"] = "sace";
  j["version"] = kVersion;
  j["subcommand"] = cmd.get_name();
  j["seed"] = seed;
  j["options"] = resolved_options(cmd);
  j["config_file"] = config;
  return j;
}

Json kkt_json(const FitResult& fit, const StandardizationRecord& record) {
  Json j;
  j["method"] = std::string(to_string(fit.method));
  j["scale"] = "standardized";
  j["lambda"] = number(fit.spec.lambda);
  j["d"] = number(fit.spec.d);
  if (fit.method == Method::MCP || fit.method == Method::GSACE) j["gamma"] = number(fit.spec.gamma);
  if (fit.method == Method::ElasticNet) j["ridge_weight"] = number(fit.spec.ridge_weight);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["objective"] = number(fit.objective);
  j["max_violation"] = number(fit.kkt.max_violation);
  j["eq_tol"] = number(fit.kkt.eq_tol);
  Json xi = Json::array();
  Json tau = Json::array();
  for (const Index k : fit.kkt.equicorrelation_set) {
    xi.push_back(k);
    tau.push_back(static_cast<int>(fit.kkt.tau[k]));
  }
  j["xi"] = std::move(xi);
  j["tau"] = std::move(tau);
  j["intercept"] = number(record.intercept(record.to_raw(fit.beta)));
  return j;
}

void write_coefficients(const fs::path& path, const CoefficientVector& raw) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "index,value,selected\n";
  for (Index j = 0; j < raw.size(); ++j) {
    out << j << ',' << csv::format(raw[j]) << ',' << (raw[j] != 0.0 ? 1 : 0) << '\n';
  }
}

void write_fit_outputs(const fs::path& dir, const FitResult& fit, const StandardizationRecord& rec) {
  write_coefficients(dir / "coefficients.csv", rec.to_raw(fit.beta));
  write_json(dir / "kkt.json", kkt_json(fit, rec));
}

// Shared flags. Defaults live here so --help prints them.
struct Common {
  std::string input;
  std::string method = "sace";
  std::string lambda = "max";
  double d = 0.5;
  double gamma = 3.0;
  double lambda2 = 0.5;
  std::uint64_t seed = 20240101;
  int jobs = 1;
  std::string out = "out";
  std::string config;
};

enum Flags : unsigned {
  kInput = 1u,
  kMethod = 2u,
  kLambda = 4u,
  kHyper = 8u,
};

void add_common(CLI::App* cmd, Common& c, unsigned flags) {
  cmd->add_option("--config", c.config, "key=value file; command-line flags take precedence");
  if (flags & kInput) {
    cmd->add_option("--input", c.input, "input CSV");
  }
  if (flags & kMethod) {
    cmd->add_option("--method", c.method, "lasso | en | mcp | sace | gsace")->capture_default_str();
  }
  if (flags & kLambda) {
    cmd->add_option("--lambda", c.lambda, "penalty level on the standardized scale, or 'max'")
        ->capture_default_str();
  }
  if (flags & kHyper) {
    cmd->add_option("--d", c.d, "reversed-penalty weight in [0, 1]")->capture_default_str();
    cmd->add_option("--gamma", c.gamma, "MCP concavity")->capture_default_str();
    cmd->add_option("--lambda2", c.lambda2, "Elastic Net ridge weight")->capture_default_str();
  }
  cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "worker threads; outputs do not depend on it")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

StandardizedData load_standardized(const std::string& input) {
  if (input.empty()) throw UsageError("--input is required");
  return standardize(load_dataset_csv(input));
}

int cmd_fit(CLI::App& cmd, const Common& c, std::ostream& out) {
  const auto std_data = load_standardized(c.input);
  Hyperparameters h;
  h.d = c.d;
  h.gamma = c.gamma;
  h.lambda2 = c.lambda2;
  if (c.lambda == "max") {
    h.lambda = lambda_max(std_data.data);
  } else {
    const auto v = csv::parse_number(c.lambda);
    if (!v || *v < 0.0) throw UsageError("--lambda must be a non-negative number or 'max'");
    h.lambda = *v;
  }
  const Method method = parse_method(c.method);
  const fs::path dir = prepare_out(c.out);
  write_json(dir / "manifest.json", manifest(cmd, c.seed, c.config));
  try {
    const auto fit = fit_method(std_data.data, method, h);
    write_fit_outputs(dir, fit, std_data.record);
    out << to_string(method) << ": " << fit.beta.nonzeros() << " nonzero, " << fit.iterations
        << " sweeps, max KKT violation " << csv::format(fit.kkt.max_violation) << '\n';
  } catch (const NoConvergence& e) {
    write_fit_outputs(dir, e.best(), std_data.record);
    throw;
  }
  return kExitOk;
}

struct CvFlags {
  int folds = 10;
  int n_lambda = 50;
  double lambda_min_ratio = 0.01;
  std::string ds;
  std::string gammas;
};

int cmd_cv(CLI::App& cmd, const Common& c, const CvFlags& f, std::ostream& out) {
  const auto std_data = load_standardized(c.input);
  const Method method = parse_method(c.method);
  auto grid = make_grid(std_data.data, f.n_lambda, f.lambda_min_ratio,
                        f.ds.empty() ? std::vector<double>{} : parse_doubles(f.ds, "ds"),
                        f.gammas.empty() ? std::vector<double>{} : parse_doubles(f.gammas, "gammas"));
  grid.lambda2s = {c.lambda2};
  const fs::path dir = prepare_out(c.out);
  write_json(dir / "manifest.json", manifest(cmd, c.seed, c.config));

  CvOptions opts;
  opts.folds = f.folds;
  opts.jobs = c.jobs;
  const auto cv = cross_validate(std_data.data, method, grid, derive_seed(c.seed, "cv"), opts);
  {
    std::ofstream table(dir / "cv_table.csv");
    if (!table) throw IoError("cannot write cv_table.csv");
    table << "lambda,d,gamma,lambda2,mean_error,std_error,failures\n";
    for (const auto& cell : cv.table) {
      table << csv::format(cell.params.lambda) << ',' << csv::format(cell.params.d) << ','
            << csv::format(cell.params.gamma) << ',' << csv::format(cell.params.lambda2) << ','
            << csv::format(cell.mean_error) << ',' << csv::format(cell.std_error) << ','
            << cell.failures << '\n';
    }
  }
  Json best;
  best["method"] = std::string(to_string(method));
  best["folds"] = cv.folds;
  best["lambda"] = number(cv.best.params.lambda);
  best["d"] = number(cv.best.params.d);
  best["gamma"] = number(cv.best.params.gamma);
  best["lambda2"] = number(cv.best.params.lambda2);
  best["mean_error"] = number(cv.best.mean_error);
  best["std_error"] = number(cv.best.std_error);
  write_json(dir / "best.json", best);

  try {
    const auto fit = fit_on_path(std_data.data, method, grid, cv.best.params);
    write_fit_outputs(dir, fit, std_data.record);
  } catch (const NoConvergence& e) {
    write_fit_outputs(dir, e.best(), std_data.record);
    throw;
  }
  out << to_string(method) << ": best lambda " << csv::format(cv.best.params.lambda) << ", d "
      << csv::format(cv.best.params.d) << ", cv error " << csv::format(cv.best.mean_error) << '\n';
  return kExitOk;
}

struct SimFlags {
  int example = 1;
  int case_number = 1;
  std::string methods;
  bool no_threshold = false;
  // Overrides of the case preset, applied only when given.
  Index n = 0;
  Index p = 0;
  Index q = 0;
  std::string tail;
  double group_noise_sd = 0.0;
  double equicorrelation = 0.0;
  std::string beta;
  double sigma = 0.0;
  int reps = 100;
  int n_lambda = 50;
  double lambda_min_ratio = 0.01;
  int folds = 10;
  double small_fraction = 0.75;
};

std::string default_methods(Example e) {
  return e == Example::Ex1 ? "lasso,en,mcp,sace" : "lasso,en,mcp,gsace";
}

void write_sim_tables(const fs::path& dir, const ScenarioResult& result) {
  const bool ex1 = result.config.example == Example::Ex1;
  const fs::path err_path = dir / (ex1 ? "table1.csv" : "table3.csv");
  const fs::path sel_path = dir / (ex1 ? "table2.csv" : "table4.csv");
  std::ofstream err(err_path);
  std::ofstream sel(sel_path);
  if (!err || !sel) throw IoError("cannot write tables in " + dir.string());
  err << "method,thresholded,l2_error,std_err,completed,failures\n";
  sel << "method,thresholded,tpr,tnr,tpr_std_err,tnr_std_err\n";
  for (const bool thr : {false, true}) {
    for (const auto& s : result.summaries) {
      const auto& m = thr ? s.mean_thresholded : s.mean;
      const auto& se = thr ? s.std_err_thresholded : s.std_err;
      err << to_string(s.method) << ',' << (thr ? 1 : 0) << ',' << csv::format(m.l2_error) << ','
          << csv::format(se.l2_error) << ',' << s.completed << ',' << s.failures << '\n';
      sel << to_string(s.method) << ',' << (thr ? 1 : 0) << ',' << csv::format(m.tpr) << ','
          << csv::format(m.tnr) << ',' << csv::format(se.tpr) << ',' << csv::format(se.tnr)
          << '\n';
    }
  }
}

int cmd_simulate(CLI::App& cmd, const Common& c, const SimFlags& f, std::ostream& out) {
  if (f.example != 1 && f.example != 2) throw UsageError("--example must be 1 or 2");
  const Example example = f.example == 1 ? Example::Ex1 : Example::Ex2;
  ScenarioConfig cfg = scenario_case(example, f.case_number);
  auto given = [&](const char* name) { return cmd.get_option("--" + std::string(name))->count() > 0; };
  std::string overrides;
  auto add = [&](const char* key, const std::string& value) {
    if (given(key)) overrides += std::string(key) + "=" + value + "\n";
  };
  add("n", std::to_string(f.n));
  add("p", std::to_string(f.p));
  add("q", std::to_string(f.q));
  add("tail", f.tail);
  add("group_noise_sd", csv::format_exact(f.group_noise_sd));
  add("equicorrelation", csv::format_exact(f.equicorrelation));
  add("beta", f.beta);
  add("sigma", csv::format_exact(f.sigma));
  add("n_lambda", std::to_string(f.n_lambda));
  add("lambda_min_ratio", csv::format_exact(f.lambda_min_ratio));
  add("folds", std::to_string(f.folds));
  add("small_fraction", csv::format_exact(f.small_fraction));
  cfg = parse_scenario_config(overrides, cfg);
  cfg.reps = f.reps;
  if (cfg.reps < 1) throw UsageError("--reps must be positive");
  // Each (example, case) draws from its own stream of the master seed.
  cfg.seed = derive_seed(c.seed, "simulate", static_cast<std::uint64_t>(f.example * 10 + f.case_number));

  const auto methods = parse_methods(f.methods.empty() ? default_methods(example) : f.methods);
  const fs::path dir = prepare_out(c.out);
  Json m = manifest(cmd, c.seed, c.config);
  m["scenario"] = to_key_value(cfg);
  write_json(dir / "manifest.json", m);

  RunOptions opts;
  opts.jobs = c.jobs;
  const auto result = run_scenario(cfg, methods, !f.no_threshold, opts);
  write_sim_tables(dir, result);

  std::vector<std::pair<std::string, CoefficientVector>> first;
  for (const auto& fit : result.fits.front()) first.emplace_back(to_string(fit.method), fit.beta);
  write_profile_csv(dir / "profiles.csv", export_estimate_profile(first, result.truths.front()));

  Json summary;
  summary["example"] = f.example;
  summary["case"] = f.case_number;
  summary["reps"] = cfg.reps;
  Json rows = Json::array();
  for (const auto& s : result.summaries) {
    rows.push_back({{"method", std::string(to_string(s.method))},
                    {"l2_error", number(s.mean.l2_error)},
                    {"tpr", number(s.mean.tpr)},
                    {"tnr", number(s.mean.tnr)},
                    {"l2_error_thresholded", number(s.mean_thresholded.l2_error)},
                    {"tpr_thresholded", number(s.mean_thresholded.tpr)},
                    {"tnr_thresholded", number(s.mean_thresholded.tnr)},
                    {"completed", s.completed},
                    {"failures", s.failures}});
    out << to_string(s.method) << ": l2 " << csv::format(s.mean.l2_error) << ", tpr "
        << csv::format(s.mean.tpr) << ", tnr " << csv::format(s.mean.tnr) << " (" << s.completed
        << " reps, " << s.failures << " failed)\n";
  }
  summary["methods"] = std::move(rows);
  write_json(dir / "summary.json", summary);
  return kExitOk;
}

struct TrackFlags {
  std::string methods = "sace,lasso,mcp,en";
  Index k = 50;
  Index train = 100;
  Index test = 20;
  Index stride = 20;
  std::string mode = "price";
  bool no_tune = false;
  int folds = 10;
  int max_bisect = 60;
};

int cmd_track(CLI::App& cmd, const Common& c, const TrackFlags& f, std::ostream& out) {
  if (c.input.empty()) throw UsageError("--input is required");
  TrackConfig cfg;
  cfg.k = f.k;
  cfg.train = f.train;
  cfg.test = f.test;
  cfg.stride = f.stride;
  if (f.mode == "price") {
    cfg.mode = ErrorMode::Price;
  } else if (f.mode == "returns") {
    cfg.mode = ErrorMode::Returns;
  } else {
    throw UsageError("--mode must be price or returns");
  }
  cfg.tune = !f.no_tune;
  cfg.d = c.d;
  cfg.gamma = c.gamma;
  cfg.lambda2 = c.lambda2;
  cfg.cv_folds = f.folds;
  cfg.max_bisect = f.max_bisect;
  cfg.seed = derive_seed(c.seed, "track");
  cfg.jobs = c.jobs;
  const auto methods = parse_methods(f.methods);

  const auto panel = load_prices(c.input);
  for (const auto& t : panel.dropped_tickers) {
    out << "warning: dropped ticker " << t << " (missing prices)\n";
  }
  const fs::path dir = prepare_out(c.out);
  Json m = manifest(cmd, c.seed, c.config);
  m["panel"] = {{"periods", panel.periods()},
                {"assets", panel.assets()},
                {"dropped_tickers", panel.dropped_tickers}};
  write_json(dir / "manifest.json", m);

  const auto run = run_tracking(panel, methods, cfg);
  write_windows_csv(dir / "windows.csv", panel, run);
  write_tracking_summary_json(dir / "summary.json", run, cfg);
  write_replication_csv(dir / "replication.csv", panel, run);
  for (const auto& s : run.summary) {
    out << to_string(s.method) << ": mean predicted TE " << csv::format(s.mean_predicted_te)
        << ", mean fitted TE " << csv::format(s.mean_fitted_te) << " over " << s.windows
        << " windows (" << s.inexact << " closest-k, " << s.failures << " failed)\n";
  }
  return kExitOk;
}

struct PanelFlags {
  SyntheticPanelConfig cfg;
};

int cmd_gen_panel(CLI::App& cmd, const Common& c, PanelFlags& f, std::ostream& out) {
  f.cfg.seed = c.seed;
  const auto panel = synthetic_panel(f.cfg);
  const fs::path dir = prepare_out(c.out);
  write_json(dir / "manifest.json", manifest(cmd, c.seed, c.config));
  write_prices(dir / "prices.csv", panel);
  out << "wrote " << panel.periods() << " periods x " << panel.assets() << " assets to "
      << (dir / "prices.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse regression with a reversed adaptive penalty: fitting, tuning, "
               "simulation and index tracking"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common fit_c, cv_c, sim_c, track_c, panel_c;
  sim_c.seed = 20240101;
  track_c.seed = 7;
  panel_c.seed = 20140102;

  auto* fit = app.add_subcommand("fit", "fit one method at fixed hyperparameters");
  add_common(fit, fit_c, kInput | kMethod | kLambda | kHyper);

  auto* cv = app.add_subcommand("cv", "10-fold cross-validation over the grid, then refit");
  add_common(cv, cv_c, kInput | kMethod | kHyper);
  CvFlags cvf;
  cv->add_option("--folds", cvf.folds, "number of folds (capped at n)")->capture_default_str();
  cv->add_option("--n_lambda", cvf.n_lambda, "lambda grid size")->capture_default_str();
  cv->add_option("--lambda_min_ratio", cvf.lambda_min_ratio, "smallest lambda / lambda_max")
      ->capture_default_str();
  cv->add_option("--ds", cvf.ds, "comma-separated d grid (default 0, 0.1, ..., 1)");
  cv->add_option("--gammas", cvf.gammas, "comma-separated gamma grid (default 1.5, 3, 6)");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the two simulation designs");
  add_common(sim, sim_c, 0);
  SimFlags sf;
  sim->add_option("--example", sf.example, "design: 1 (grouped) or 2 (equicorrelated)")
      ->capture_default_str();
  sim->add_option("--case", sf.case_number, "case 1-4 of the design")
      ->capture_default_str()
      ->check(CLI::Range(1, 4));
  sim->add_option("--methods", sf.methods,
                  "comma-separated methods (default lasso,en,mcp,sace or lasso,en,mcp,gsace)");
  sim->add_option("--reps", sf.reps, "replications")->capture_default_str();
  sim->add_flag("--no-threshold", sf.no_threshold, "skip the magnitude threshold");
  sim->add_option("--n", sf.n, "sample size (case preset: 50)");
  sim->add_option("--p", sf.p, "predictors (case preset: 400)");
  sim->add_option("--q", sf.q, "true nonzeros (case preset: 15)");
  sim->add_option("--tail", sf.tail, "identity | ar0.5 (design 1)");
  sim->add_option("--group_noise_sd", sf.group_noise_sd, "within-group noise sd (design 1, preset 0.01)");
  sim->add_option("--equicorrelation", sf.equicorrelation, "pairwise correlation (design 2, preset 0.1)");
  sim->add_option("--beta", sf.beta, "const3 | unif0.5-1");
  sim->add_option("--sigma", sf.sigma, "noise sd (case preset: 0.4 or 2)");
  sim->add_option("--n_lambda", sf.n_lambda, "lambda grid size")->capture_default_str();
  sim->add_option("--lambda_min_ratio", sf.lambda_min_ratio, "smallest lambda / lambda_max")
      ->capture_default_str();
  sim->add_option("--folds", sf.folds, "CV folds")->capture_default_str();
  sim->add_option("--small_fraction", sf.small_fraction, "quantile defining small coefficients")
      ->capture_default_str();

  auto* track = app.add_subcommand("track", "rolling-window sparse index replication");
  add_common(track, track_c, kInput | kHyper);
  TrackFlags tf;
  track->add_option("--methods", tf.methods, "comma-separated methods")->capture_default_str();
  track->add_option("--k", tf.k, "assets to hold")->capture_default_str();
  track->add_option("--train", tf.train, "training rows per window")->capture_default_str();
  track->add_option("--test", tf.test, "forecast rows per window")->capture_default_str();
  track->add_option("--stride", tf.stride, "rows between window starts")->capture_default_str();
  track->add_option("--mode", tf.mode, "tracking errors on price | returns")->capture_default_str();
  track->add_flag("--no-tune", tf.no_tune, "keep --d/--gamma instead of cross-validating them");
  track->add_option("--folds", tf.folds, "CV folds for d/gamma tuning")->capture_default_str();
  track->add_option("--max_bisect", tf.max_bisect, "bisection steps for the exact-k search")
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen-panel", "write a synthetic price panel");
  add_common(gen, panel_c, 0);
  PanelFlags pf;
  gen->add_option("--periods", pf.cfg.periods, "trading days")->capture_default_str();
  gen->add_option("--assets", pf.cfg.assets, "number of stocks")->capture_default_str();
  gen->add_option("--sector_size", pf.cfg.sector_size, "stocks per sector")->capture_default_str();
  gen->add_option("--constituents", pf.cfg.constituents, "stocks carrying index weight")
      ->capture_default_str();
  gen->add_option("--index_noise", pf.cfg.index_noise, "noise on the index level")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::ostringstream help;
      app.exit(e, help, help);
      out << help.str();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  struct Entry {
    CLI::App* cmd;
    Common* common;
  };
  const std::vector<Entry> entries{{fit, &fit_c}, {cv, &cv_c}, {sim, &sim_c}, {track, &track_c},
                                   {gen, &panel_c}};
  try {
    for (const auto& e : entries) {
      if (!e.cmd->parsed()) continue;
      if (!e.common->config.empty()) apply_config(*e.cmd, e.common->config);
      if (e.cmd == fit) return cmd_fit(*fit, fit_c, out);
      if (e.cmd == cv) return cmd_cv(*cv, cv_c, cvf, out);
      if (e.cmd == sim) return cmd_simulate(*sim, sim_c, sf, out);
      if (e.cmd == track) return cmd_track(*track, track_c, tf, out);
      return cmd_gen_panel(*gen, panel_c, pf, out);
    }
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << " (best iterate written)\n";
    return kExitNoConvergence;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace sace::cli
