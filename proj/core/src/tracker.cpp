#include "sace/tracker.hpp"

#include "sace/csv.hpp"
#include "sace/parallel.hpp"
#include "sace/rng.hpp"
#include "sace/tuning.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>

namespace sace {
namespace {

bool valid_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{std::stoi(s.substr(0, 4))},
                                        std::chrono::month{static_cast<unsigned>(std::stoi(s.substr(5, 2)))},
                                        std::chrono::day{static_cast<unsigned>(std::stoi(s.substr(8, 2)))}};
  return ymd.ok();
}

std::string iso(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// Rounds to the 10 significant digits used in every report.
double round10(double v) { return std::strtod(csv::format(v).c_str(), nullptr); }

Vector simple_returns(const Vector& level) {
  Vector r(std::max<Index>(level.size() - 1, 0));
  for (Index t = 1; t < level.size(); ++t) r[t - 1] = level[t] / level[t - 1] - 1.0;
  return r;
}

Vector replication_error(const Vector& actual, const Vector& replicated, ErrorMode mode) {
  if (mode == ErrorMode::Price) return actual - replicated;
  return simple_returns(actual) - simple_returns(replicated);
}

bool tunes_d(Method m) { return m == Method::SACE || m == Method::GSACE; }
bool tunes_gamma(Method m) { return m == Method::MCP || m == Method::GSACE; }

ExactKResult exact_or_closest(const Dataset& data, Method method, Index k, const Hyperparameters& h,
                              const TrackConfig& cfg) {
  try {
    return select_exact_k(data, method, k, h, cfg.max_bisect, cfg.solver);
  } catch (const Unachievable& e) {
    return e.closest();
  }
}

}  // namespace

PricePanel load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw EmptyPanel();
  const auto header = csv::split(line);
  if (header.size() < 3 || header[0] != "date" || header[1] != "index") {
    throw ParseError(1, "header must be date,index,ticker1,...");
  }
  const std::size_t m = header.size() - 2;

  std::vector<std::string> dates;
  std::vector<double> index;
  std::vector<std::vector<double>> cells;  // per row, NaN for blanks
  std::vector<bool> has_blank(m, false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    if (f.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields");
    }
    if (!valid_iso_date(f[0])) throw ParseError(line_no, "bad ISO date '" + f[0] + "'");
    if (!dates.empty() && !(dates.back() < f[0])) throw NonMonotoneDates(line_no, f[0]);
    const auto idx = csv::parse_number(f[1]);
    if (!idx || !std::isfinite(*idx)) throw ParseError(line_no, "index value missing or malformed");
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (f[j + 2].empty()) {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        has_blank[j] = true;
        continue;
      }
      const auto v = csv::parse_number(f[j + 2]);
      if (!v || !std::isfinite(*v)) throw ParseError(line_no, "malformed price '" + f[j + 2] + "'");
      row[j] = *v;
    }
    dates.push_back(f[0]);
    index.push_back(*idx);
    cells.push_back(std::move(row));
  }

  PricePanel panel;
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < m; ++j) {
    if (has_blank[j]) {
      panel.dropped_tickers.push_back(header[j + 2]);
    } else {
      kept.push_back(j);
      panel.tickers.push_back(header[j + 2]);
    }
  }
  if (dates.empty() || kept.empty()) throw EmptyPanel();

  const auto T = static_cast<Index>(dates.size());
  panel.dates = std::move(dates);
  panel.index = Eigen::Map<const Vector>(index.data(), T);
  panel.prices.resize(T, static_cast<Index>(kept.size()));
  for (Index t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < kept.size(); ++c) {
      panel.prices(t, static_cast<Index>(c)) = cells[static_cast<std::size_t>(t)][kept[c]];
    }
  }
  return panel;
}

void write_prices(const std::filesystem::path& path, const PricePanel& panel) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "date,index";
  for (const auto& t : panel.tickers) out << ',' << t;
  out << '\n';
  for (Index t = 0; t < panel.periods(); ++t) {
    out << panel.dates[static_cast<std::size_t>(t)] << ',' << csv::format(panel.index[t]);
    for (Index j = 0; j < panel.assets(); ++j) out << ',' << csv::format(panel.prices(t, j));
    out << '\n';
  }
}

std::vector<WindowSplit> make_windows(Index periods, Index train, Index test, Index stride) {
  if (train < 2 || test < 1 || stride < 1) throw InvalidArgument("invalid window geometry");
  if (periods < train + test) {
    throw TooShort("need at least " + std::to_string(train + test) + " periods, have " +
                   std::to_string(periods));
  }
  std::vector<WindowSplit> out;
  int id = 0;
  for (Index start = 0; start + train + test <= periods; start += stride) {
    out.push_back({id++, start, train, test});
  }
  return out;
}

double tracking_error(const Vector& err) {
  if (err.size() < 2) throw TooFewSamples();
  const double mean = err.mean();
  const double ss = (err.array() - mean).square().sum();
  return std::sqrt(250.0) * std::sqrt(ss / static_cast<double>(err.size() - 1));
}

TrackReport track_window(const PricePanel& panel, const WindowSplit& w, Method method,
                         const TrackConfig& cfg) {
  if (w.end() > panel.periods()) throw TooShort("window extends past the panel");
  TrackReport report;
  report.window = w.id;
  report.method = method;

  const Matrix train_X = panel.prices.middleRows(w.train_begin, w.train_rows);
  const Vector train_y = panel.index.segment(w.train_begin, w.train_rows);
  const Matrix test_X = panel.prices.middleRows(w.test_begin(), w.test_rows);
  const Vector test_y = panel.index.segment(w.test_begin(), w.test_rows);

  const auto std_data = standardize(Dataset(train_X, train_y));
  const Dataset& data = std_data.data;
  const Index k = std::min({cfg.k, data.n(), data.p()});

  Hyperparameters h;
  h.d = cfg.d;
  h.gamma = cfg.gamma;
  h.lambda2 = cfg.lambda2;

  // Each candidate (d, gamma) is held to the cardinality constraint at its own
  // lambda; cross-validation then chooses among those constrained fits.
  std::vector<Hyperparameters> candidates;
  if (cfg.tune && (tunes_d(method) || tunes_gamma(method))) {
    const auto ds = tunes_d(method) ? cfg.ds : std::vector<double>{h.d};
    const auto gammas = tunes_gamma(method) ? cfg.gammas : std::vector<double>{h.gamma};
    for (const double g : gammas) {
      for (const double d : ds) {
        Hyperparameters c = h;
        c.d = d;
        c.gamma = g;
        candidates.push_back(c);
      }
    }
  } else {
    candidates.push_back(h);
  }

  ExactKResult final_fit;
  double best_error = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto fit = exact_or_closest(data, method, k, candidates[i], cfg);
    if (candidates.size() == 1) {
      final_fit = std::move(fit);
      h = candidates[i];
      break;
    }
    Grid grid;
    grid.lambdas = {fit.lambda};
    grid.ds = {candidates[i].d};
    grid.gammas = {candidates[i].gamma};
    grid.lambda2s = {candidates[i].lambda2};
    CvOptions cv_opts;
    cv_opts.folds = cfg.cv_folds;
    cv_opts.solver = cfg.solver;
    const auto cv = cross_validate(
        data, method, grid, derive_seed(cfg.seed, "window", static_cast<std::uint64_t>(w.id)),
        cv_opts);
    // Exact-k fits beat closest-k ones; ties keep the earlier (smaller d) candidate.
    const bool better_class = fit.exact && !final_fit.exact;
    const bool same_class = fit.exact == final_fit.exact;
    if (i == 0 || better_class || (same_class && cv.best.mean_error < best_error)) {
      best_error = cv.best.mean_error;
      final_fit = std::move(fit);
      h = candidates[i];
    }
  }

  report.lambda = final_fit.lambda;
  report.d = h.d;
  report.gamma = h.gamma;
  report.cardinality = final_fit.cardinality;
  report.exact = final_fit.exact;
  for (const Index j : final_fit.fit.beta.support()) {
    report.selected.push_back(panel.tickers[static_cast<std::size_t>(j)]);
  }

  report.fitted = std_data.record.predict_raw(train_X, final_fit.fit.beta);
  report.predicted = std_data.record.predict_raw(test_X, final_fit.fit.beta);
  report.fitted_te = tracking_error(replication_error(train_y, report.fitted, cfg.mode));
  report.predicted_te = tracking_error(replication_error(test_y, report.predicted, cfg.mode));
  return report;
}

TrackingRun run_tracking(const PricePanel& panel, const std::vector<Method>& methods,
                         const TrackConfig& cfg) {
  if (methods.empty()) throw InvalidArgument("no methods requested");
  TrackingRun run;
  run.windows = make_windows(panel.periods(), cfg.train, cfg.test, cfg.stride);
  const std::size_t n_methods = methods.size();
  run.reports.resize(run.windows.size() * n_methods);

  parallel_for(run.reports.size(), cfg.jobs, [&](std::size_t u) {
    const auto& w = run.windows[u / n_methods];
    const Method m = methods[u % n_methods];
    try {
      run.reports[u] = track_window(panel, w, m, cfg);
    } catch (const Error& e) {
      TrackReport failed;
      failed.window = w.id;
      failed.method = m;
      failed.failed = true;
      failed.failure = e.what();
      run.reports[u] = std::move(failed);
    }
  });

  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    MethodTrackSummary s;
    s.method = methods[mi];
    for (std::size_t wi = 0; wi < run.windows.size(); ++wi) {
      const auto& r = run.reports[wi * n_methods + mi];
      if (r.failed) {
        ++s.failures;
        continue;
      }
      ++s.windows;
      if (!r.exact) ++s.inexact;
      s.mean_fitted_te += r.fitted_te;
      s.mean_predicted_te += r.predicted_te;
      s.max_fitted_te = std::max(s.max_fitted_te, r.fitted_te);
      s.max_predicted_te = std::max(s.max_predicted_te, r.predicted_te);
    }
    if (s.windows > 0) {
      s.mean_fitted_te /= s.windows;
      s.mean_predicted_te /= s.windows;
    }
    run.summary.push_back(s);
  }
  return run;
}

void write_windows_csv(const std::filesystem::path& path, const PricePanel& panel,
                       const TrackingRun& run) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "window,method,train_start,test_start,test_end,k,exact,lambda,d,gamma,fitted_te,"
         "predicted_te,status,selected\n";
  for (const auto& r : run.reports) {
    const auto& w = run.windows[static_cast<std::size_t>(r.window)];
    out << r.window << ',' << to_string(r.method) << ','
        << panel.dates[static_cast<std::size_t>(w.train_begin)] << ','
        << panel.dates[static_cast<std::size_t>(w.test_begin())] << ','
        << panel.dates[static_cast<std::size_t>(w.end() - 1)] << ',';
    if (r.failed) {
      out << ",,,,,,,failed,\n";
      continue;
    }
    out << r.cardinality << ',' << (r.exact ? 1 : 0) << ',' << csv::format(r.lambda) << ','
        << (tunes_d(r.method) ? csv::format(r.d) : "") << ','
        << (tunes_gamma(r.method) ? csv::format(r.gamma) : "") << ',' << csv::format(r.fitted_te)
        << ',' << csv::format(r.predicted_te) << ',' << (r.exact ? "ok" : "closest_k") << ',';
    for (std::size_t i = 0; i < r.selected.size(); ++i) {
      if (i) out << ';';
      out << r.selected[i];
    }
    out << '\n';
  }
}

void write_tracking_summary_json(const std::filesystem::path& path, const TrackingRun& run,
                                 const TrackConfig& cfg) {
  nlohmann::ordered_json j;
  j["windows"] = run.windows.size();
  j["k"] = cfg.k;
  j["train"] = cfg.train;
  j["test"] = cfg.test;
  j["stride"] = cfg.stride;
  j["error_mode"] = cfg.mode == ErrorMode::Price ? "price" : "returns";
  auto& methods = j["methods"];
  methods = nlohmann::ordered_json::array();
  for (const auto& s : run.summary) {
    nlohmann::ordered_json m;
    m["method"] = std::string(to_string(s.method));
    m["windows"] = s.windows;
    m["failures"] = s.failures;
    m["closest_k_windows"] = s.inexact;
    m["mean_fitted_te"] = round10(s.mean_fitted_te);
    m["max_fitted_te"] = round10(s.max_fitted_te);
    m["mean_predicted_te"] = round10(s.mean_predicted_te);
    m["max_predicted_te"] = round10(s.max_predicted_te);
    methods.push_back(std::move(m));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_replication_csv(const std::filesystem::path& path, const PricePanel& panel,
                           const TrackingRun& run) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "window,method,phase,date,actual,replicated\n";
  for (const auto& r : run.reports) {
    if (r.failed) continue;
    const auto& w = run.windows[static_cast<std::size_t>(r.window)];
    auto emit = [&](const char* phase, Index begin, const Vector& rep) {
      for (Index t = 0; t < rep.size(); ++t) {
        out << r.window << ',' << to_string(r.method) << ',' << phase << ','
            << panel.dates[static_cast<std::size_t>(begin + t)] << ','
            << csv::format(panel.index[begin + t]) << ',' << csv::format(rep[t]) << '\n';
      }
    };
    emit("fitted", w.train_begin, r.fitted);
    emit("predicted", w.test_begin(), r.predicted);
  }
}

PricePanel synthetic_panel(const SyntheticPanelConfig& cfg) {
  if (cfg.assets < 1 || cfg.periods < 2 || cfg.sector_size < 1 || cfg.constituents > cfg.assets) {
    throw InvalidArgument("invalid synthetic panel configuration");
  }
  std::mt19937_64 gen(derive_seed(cfg.seed, "panel"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> start_price(20.0, 200.0);
  std::uniform_real_distribution<double> weight(0.5, 1.5);

  const Index T = cfg.periods;
  const Index m = cfg.assets;
  const Index sectors = (m + cfg.sector_size - 1) / cfg.sector_size;

  PricePanel panel;
  panel.prices.resize(T, m);
  panel.index.resize(T);
  for (Index j = 0; j < m; ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "S%03ld", static_cast<long>(j));
    panel.tickers.emplace_back(name);
  }

  Vector log_price(m);
  for (Index j = 0; j < m; ++j) log_price[j] = std::log(start_price(gen));
  Vector weights = Vector::Zero(m);
  for (Index j = 0; j < cfg.constituents; ++j) weights[j] = weight(gen);

  std::chrono::sys_days day = std::chrono::year{2014} / std::chrono::January / 2;
  Vector sector_shock(sectors);
  for (Index t = 0; t < T; ++t) {
    while (true) {
      const std::chrono::weekday wd{day};
      if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) break;
      day += std::chrono::days{1};
    }
    panel.dates.push_back(iso(day));
    day += std::chrono::days{1};

    if (t > 0) {
      const double market = normal(gen);
      for (Index s = 0; s < sectors; ++s) sector_shock[s] = normal(gen);
      for (Index j = 0; j < m; ++j) {
        log_price[j] += 0.0002 + cfg.market_vol * market +
                        cfg.sector_vol * sector_shock[j / cfg.sector_size] +
                        cfg.idio_vol * normal(gen);
      }
    }
    for (Index j = 0; j < m; ++j) panel.prices(t, j) = std::exp(log_price[j]);
    panel.index[t] = panel.prices.row(t).dot(weights) + cfg.index_noise * normal(gen);
  }
  return panel;
}

}  // namespace sace
