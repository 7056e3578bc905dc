#include "sace/tuning.hpp"

#include "sace/parallel.hpp"
#include "sace/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace sace {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One fit along a warm-started path; a non-converged fit still seeds the next
// warm start but its error is recorded as a failure.
struct PathStep {
  FitResult fit;
  bool ok = true;
};

template <class Fn>
PathStep guarded(Fn&& fn) {
  try {
    return {fn(), true};
  } catch (const NoConvergence& e) {
    return {e.best(), false};
  }
}

// Outer configurations that share one initial-estimate path.
struct Outer {
  double gamma = 3.0;
  double lambda2 = 0.5;
};

std::vector<Outer> outer_configs(Method method, const Grid& grid) {
  std::vector<Outer> out;
  switch (method) {
    case Method::Lasso:
    case Method::SACE: out.push_back({}); break;
    case Method::ElasticNet:
      for (double l2 : grid.lambda2s) out.push_back({3.0, l2});
      break;
    case Method::MCP:
    case Method::GSACE:
      for (double g : grid.gammas) out.push_back({g, 0.5});
      break;
  }
  return out;
}

bool uses_d(Method m) { return m == Method::SACE || m == Method::GSACE; }

}  // namespace

double lambda_max(const Dataset& data) {
  return (data.X().transpose() * data.y()).cwiseAbs().maxCoeff();
}

std::vector<double> default_d_grid() {
  std::vector<double> ds;
  for (int i = 0; i <= 10; ++i) ds.push_back(i / 10.0);
  return ds;
}

std::vector<double> default_gamma_grid() { return {1.5, 3.0, 6.0}; }

std::vector<double> default_lambda2_grid() { return {0.5, 2.5, 12.5}; }

Grid make_grid(const Dataset& data, int n_lambda, double lambda_min_ratio, std::vector<double> ds,
               std::vector<double> gammas) {
  if (n_lambda < 2) throw InvalidArgument("n_lambda must be at least 2");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    throw InvalidArgument("lambda_min_ratio must lie in (0, 1)");
  }
  Grid grid;
  const double top = lambda_max(data);
  if (!(top > 0.0)) throw InvalidArgument("lambda_max is zero: y is orthogonal to every column");
  grid.lambdas.resize(static_cast<std::size_t>(n_lambda));
  const double log_ratio = std::log(lambda_min_ratio);
  for (int i = 0; i < n_lambda; ++i) {
    grid.lambdas[static_cast<std::size_t>(i)] =
        top * std::exp(log_ratio * i / static_cast<double>(n_lambda - 1));
  }
  grid.lambdas.front() = top;
  grid.lambdas.back() = top * lambda_min_ratio;
  grid.ds = ds.empty() ? default_d_grid() : std::move(ds);
  grid.gammas = gammas.empty() ? default_gamma_grid() : std::move(gammas);
  grid.lambda2s = default_lambda2_grid();
  return grid;
}

std::vector<int> make_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw InvalidArgument("fold count must lie in [2, n]");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 gen(derive_seed(seed, "folds"));
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    fold[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

CvResult cross_validate(const Dataset& data, Method method, const Grid& grid, std::uint64_t seed,
                        const CvOptions& opts) {
  if (grid.lambdas.empty()) throw InvalidArgument("grid has no lambdas");
  const int k = static_cast<int>(std::min<Index>(opts.folds, data.n()));
  const auto fold_of = make_folds(data.n(), k, seed);

  const auto outers = outer_configs(method, grid);
  if (outers.empty()) throw InvalidArgument("grid lacks the gamma / lambda2 values this method needs");
  const std::vector<double> ds = uses_d(method) ? grid.ds : std::vector<double>{0.0};
  if (ds.empty()) throw InvalidArgument("grid has no d values");
  const std::size_t n_lambda = grid.lambdas.size();
  const std::size_t per_outer = ds.size() * n_lambda;
  const std::size_t n_cells = outers.size() * per_outer;

  auto cell_index = [&](std::size_t o, std::size_t di, std::size_t li) {
    return o * per_outer + di * n_lambda + li;
  };

  std::vector<CvCell> cells(n_cells);
  for (std::size_t o = 0; o < outers.size(); ++o) {
    for (std::size_t di = 0; di < ds.size(); ++di) {
      for (std::size_t li = 0; li < n_lambda; ++li) {
        auto& p = cells[cell_index(o, di, li)].params;
        p.lambda = grid.lambdas[li];
        p.d = ds[di];
        p.gamma = outers[o].gamma;
        p.lambda2 = outers[o].lambda2;
      }
    }
  }

  // errors[fold * n_cells + cell], NaN for failed fits.
  std::vector<double> errors(static_cast<std::size_t>(k) * n_cells, kNaN);

  std::vector<Dataset> train;
  std::vector<Dataset> test;
  train.reserve(static_cast<std::size_t>(k));
  test.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::vector<Index> tr;
    std::vector<Index> te;
    for (Index i = 0; i < data.n(); ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
    }
    train.push_back(data.select_rows(tr));
    // A single held-out row still needs n >= 2 for Dataset; keep raw copies instead.
    Matrix Xt(static_cast<Index>(te.size()), data.p());
    Vector yt(static_cast<Index>(te.size()));
    for (std::size_t r = 0; r < te.size(); ++r) {
      Xt.row(static_cast<Index>(r)) = data.X().row(te[r]);
      yt[static_cast<Index>(r)] = data.y()[te[r]];
    }
    // Pad to two rows with a duplicate when leave-one-out; the error uses the real rows only.
    if (te.size() == 1) {
      Xt.conservativeResize(2, Eigen::NoChange);
      yt.conservativeResize(2);
      Xt.row(1) = Xt.row(0);
      yt[1] = yt[0];
    }
    test.emplace_back(std::move(Xt), std::move(yt));
  }

  auto heldout_error = [&](int f, const FitResult& fit, std::size_t rows) {
    const Dataset& t = test[static_cast<std::size_t>(f)];
    const Vector r = t.y().head(static_cast<Index>(rows)) -
                     t.X().topRows(static_cast<Index>(rows)) * fit.beta.values();
    return r.squaredNorm() / static_cast<double>(rows);
  };
  std::vector<std::size_t> test_rows(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < data.n(); ++i) ++test_rows[static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)])];

  const std::size_t units = static_cast<std::size_t>(k) * outers.size();
  parallel_for(units, opts.jobs, [&](std::size_t u) {
    const int f = static_cast<int>(u / outers.size());
    const std::size_t o = u % outers.size();
    const Dataset& tr = train[static_cast<std::size_t>(f)];
    const auto& outer = outers[o];
    const std::size_t rows = test_rows[static_cast<std::size_t>(f)];
    double* err = errors.data() + static_cast<std::size_t>(f) * n_cells;

    auto record = [&](std::size_t di, std::size_t li, const PathStep& step) {
      const std::size_t c = cell_index(o, di, li);
      if (opts.observer) opts.observer(f, cells[c].params, step.fit);
      if (step.ok) err[c] = heldout_error(f, step.fit, rows);
    };

    if (!uses_d(method)) {
      CoefficientVector warm;
      for (std::size_t li = 0; li < n_lambda; ++li) {
        Hyperparameters h = cells[cell_index(o, 0, li)].params;
        const auto step = guarded([&] {
          return fit_method(tr, method, h, nullptr, li == 0 ? nullptr : &warm, opts.solver);
        });
        warm = step.fit.beta;
        record(0, li, step);
      }
      return;
    }

    // Initial-estimate path at the same lambda (and gamma), shared by every d.
    std::vector<InitialEstimate> inits(n_lambda);
    std::vector<bool> init_ok(n_lambda, true);
    {
      CoefficientVector warm;
      for (std::size_t li = 0; li < n_lambda; ++li) {
        const double lam = grid.lambdas[li];
        const auto step = guarded([&] {
          return method == Method::SACE
                     ? fit_lasso(tr, lam, li == 0 ? nullptr : &warm, opts.solver)
                     : fit_mcp(tr, lam, outer.gamma, li == 0 ? nullptr : &warm, opts.solver);
        });
        warm = step.fit.beta;
        inits[li] = InitialEstimate::user_supplied(step.fit.beta);
        inits[li].source =
            method == Method::SACE ? InitSource::LassoSameLambda : InitSource::McpSameSettings;
        init_ok[li] = step.ok;
      }
    }
    for (std::size_t di = 0; di < ds.size(); ++di) {
      CoefficientVector warm;
      for (std::size_t li = 0; li < n_lambda; ++li) {
        const Hyperparameters h = cells[cell_index(o, di, li)].params;
        auto step = guarded([&] {
          return fit_method(tr, method, h, &inits[li], li == 0 ? nullptr : &warm, opts.solver);
        });
        step.ok = step.ok && init_ok[li];
        warm = step.fit.beta;
        record(di, li, step);
      }
    }
  });

  for (std::size_t c = 0; c < n_cells; ++c) {
    double sum = 0.0;
    int good = 0;
    for (int f = 0; f < k; ++f) {
      const double e = errors[static_cast<std::size_t>(f) * n_cells + c];
      if (std::isnan(e)) {
        ++cells[c].failures;
      } else {
        sum += e;
        ++good;
      }
    }
    if (good == 0) {
      cells[c].mean_error = std::numeric_limits<double>::infinity();
      cells[c].std_error = 0.0;
      continue;
    }
    const double mean = sum / good;
    double ss = 0.0;
    for (int f = 0; f < k; ++f) {
      const double e = errors[static_cast<std::size_t>(f) * n_cells + c];
      if (!std::isnan(e)) ss += (e - mean) * (e - mean);
    }
    cells[c].mean_error = mean;
    cells[c].std_error = good > 1 ? std::sqrt(ss / (good - 1)) : 0.0;
  }

  CvResult result;
  result.method = method;
  result.folds = k;
  result.seed = seed;
  std::size_t best = 0;
  for (std::size_t c = 1; c < n_cells; ++c) {
    const auto& a = cells[c];
    const auto& b = cells[best];
    const double scale = std::max(1.0, std::abs(b.mean_error));
    if (a.mean_error < b.mean_error - 1e-12 * scale) {
      best = c;
    } else if (std::abs(a.mean_error - b.mean_error) <= 1e-12 * scale) {
      if (a.params.lambda > b.params.lambda ||
          (a.params.lambda == b.params.lambda && a.params.d < b.params.d)) {
        best = c;
      }
    }
  }
  result.best = cells[best];
  result.table = std::move(cells);
  return result;
}

std::pair<CoefficientVector, ThresholdRule> apply_threshold(const CoefficientVector& beta, Index p,
                                                            double small_fraction) {
  if (!(small_fraction > 0.0 && small_fraction < 1.0)) {
    throw InvalidArgument("small_fraction must lie in (0, 1)");
  }
  if (p < 1) throw InvalidArgument("p must be positive");
  ThresholdRule rule;
  rule.small_fraction = small_fraction;
  const Index m = beta.size();
  if (m == 0) return {beta, rule};

  std::vector<double> mags(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) mags[static_cast<std::size_t>(j)] = std::abs(beta[j]);
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  // Empirical (type 1) quantile.
  const auto rank = static_cast<std::size_t>(
      std::max<double>(1.0, std::ceil(small_fraction * static_cast<double>(m))));
  const double q = sorted[rank - 1];

  double sum = 0.0;
  Index count = 0;
  for (Index j = 0; j < m; ++j) {
    if (mags[static_cast<std::size_t>(j)] <= q) {
      sum += beta[j];
      ++count;
    }
  }
  if (count >= 2) {
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (mags[static_cast<std::size_t>(j)] <= q) ss += (beta[j] - mean) * (beta[j] - mean);
    }
    rule.sigma_hat = std::sqrt(ss / static_cast<double>(count - 1));
  }
  rule.cutoff = rule.sigma_hat * std::sqrt(2.0 * std::log(static_cast<double>(p)));

  Vector out = beta.values();
  for (Index j = 0; j < m; ++j) {
    if (std::abs(out[j]) <= rule.cutoff) out[j] = 0.0;
  }
  return {CoefficientVector(std::move(out)), rule};
}

FitResult fit_on_path(const Dataset& data, Method method, const Grid& grid,
                      const Hyperparameters& h, const SolverOptions& opts) {
  std::vector<double> path;
  for (const double lam : grid.lambdas) {
    if (lam > h.lambda) path.push_back(lam);
  }
  path.push_back(h.lambda);

  CoefficientVector warm;
  CoefficientVector init_warm;
  const bool needs_init = method == Method::SACE || method == Method::GSACE;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const bool last = i + 1 == path.size();
    Hyperparameters hh = h;
    hh.lambda = path[i];
    auto run = [&]() -> FitResult {
      if (!needs_init) return fit_method(data, method, hh, nullptr, i == 0 ? nullptr : &warm, opts);
      const auto init_step = guarded([&] {
        return method == Method::SACE
                   ? fit_lasso(data, hh.lambda, i == 0 ? nullptr : &init_warm, opts)
                   : fit_mcp(data, hh.lambda, h.gamma, i == 0 ? nullptr : &init_warm, opts);
      });
      if (last && !init_step.ok) throw NoConvergence(init_step.fit);
      init_warm = init_step.fit.beta;
      auto init = InitialEstimate::user_supplied(init_step.fit.beta);
      init.source = method == Method::SACE ? InitSource::LassoSameLambda : InitSource::McpSameSettings;
      return fit_method(data, method, hh, &init, i == 0 ? nullptr : &warm, opts);
    };
    if (last) return run();
    warm = guarded(run).fit.beta;
  }
  throw InvalidArgument("empty lambda path");
}

ExactKResult select_exact_k(const Dataset& data, Method method, Index k, const Hyperparameters& h,
                            int max_bisect, const SolverOptions& opts) {
  if (k < 0 || k > std::min(data.n(), data.p())) {
    throw InvalidArgument("k must lie in [0, min(n, p)]");
  }

  // Warm starts for the fit and its initial estimate follow the most recent lambda.
  CoefficientVector warm;
  CoefficientVector init_warm;
  bool have_warm = false;
  auto fit_at = [&](double lambda) {
    Hyperparameters hh = h;
    hh.lambda = lambda;
    auto run = [&]() -> FitResult {
      if (method == Method::SACE || method == Method::GSACE) {
        const auto init_step = guarded([&] {
          return method == Method::SACE
                     ? fit_lasso(data, lambda, have_warm ? &init_warm : nullptr, opts)
                     : fit_mcp(data, lambda, h.gamma, have_warm ? &init_warm : nullptr, opts);
        });
        init_warm = init_step.fit.beta;
        auto init = InitialEstimate::user_supplied(init_step.fit.beta);
        return fit_method(data, method, hh, &init, have_warm ? &warm : nullptr, opts);
      }
      return fit_method(data, method, hh, nullptr, have_warm ? &warm : nullptr, opts);
    };
    auto step = guarded(run);
    warm = step.fit.beta;
    have_warm = true;
    ExactKResult r;
    r.lambda = lambda;
    r.cardinality = step.fit.beta.nonzeros();
    r.exact = r.cardinality == k;
    r.fit = std::move(step.fit);
    return r;
  };

  ExactKResult closest;
  Index closest_gap = std::numeric_limits<Index>::max();
  auto consider = [&](const ExactKResult& r) {
    const Index gap = std::abs(r.cardinality - k);
    if (gap < closest_gap) {
      closest_gap = gap;
      closest = r;
    }
  };

  double hi = lambda_max(data);
  auto top = fit_at(hi);
  if (top.cardinality == k) return top;
  consider(top);

  double lo = hi * 1e-2;
  auto bottom = fit_at(lo);
  consider(bottom);
  while (bottom.cardinality < k && lo > hi * 1e-8) {
    lo *= 1e-1;
    bottom = fit_at(lo);
    consider(bottom);
  }
  if (bottom.cardinality == k) return bottom;
  if (bottom.cardinality < k) throw Unachievable(k, closest);

  for (int it = 0; it < max_bisect; ++it) {
    const double mid = std::sqrt(lo * hi);
    auto r = fit_at(mid);
    if (r.cardinality == k) return r;
    consider(r);
    if (r.cardinality > k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw Unachievable(k, closest);
}

}  // namespace sace
