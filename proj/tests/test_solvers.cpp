#include "sace/solvers.hpp"
#include "sace/tuning.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace sace {
namespace {

using testing::brute_force_sace;
using testing::gaussian_matrix;
using testing::max_abs_diff;
using testing::random_problem;

void expect_kkt_structure(const FitResult& fit) {
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.kkt.max_violation, 1e-6);
  EXPECT_TRUE(fit.beta.support().is_subset_of(fit.kkt.equicorrelation_set));
  for (Index j = 0; j < fit.beta.size(); ++j) {
    if (!fit.kkt.equicorrelation_set.contains(j)) {
      EXPECT_LE(std::abs(fit.kkt.correlations[j]), fit.spec.lambda + 1e-6);
    }
  }
}

TEST(ParseMethod, Spellings) {
  EXPECT_EQ(parse_method("lasso"), Method::Lasso);
  EXPECT_EQ(parse_method("EN"), Method::ElasticNet);
  EXPECT_EQ(parse_method("Mcp"), Method::MCP);
  EXPECT_EQ(parse_method("sace"), Method::SACE);
  EXPECT_EQ(parse_method("GSACE"), Method::GSACE);
  EXPECT_THROW(parse_method("ridge"), InvalidArgument);
  for (const auto m : {Method::Lasso, Method::ElasticNet, Method::MCP, Method::SACE, Method::GSACE})
    EXPECT_EQ(parse_method(to_string(m)), m);
}

TEST(FitLasso, ZeroAtLambdaMax) {
  const auto d = random_problem(20, 6, 31);
  const double lmax = lambda_max(d);
  EXPECT_EQ(fit_lasso(d, lmax).beta.nonzeros(), 0);
  EXPECT_EQ(fit_lasso(d, 2 * lmax).beta.nonzeros(), 0);
  EXPECT_GT(fit_lasso(d, 0.99 * lmax).beta.nonzeros(), 0);
}

TEST(FitLasso, ZeroAtLambdaMaxAgreesWithBruteForce) {
  // At lambda = lambda_max and p = 3 the zero vector must be optimal; check by
  // scanning a small grid around zero.
  const auto d = random_problem(10, 3, 32);
  const double lmax = lambda_max(d);
  const PenaltySpec spec{PenaltyFamily::L1, lmax, 0.0, 0.0, 0.0};
  const double at_zero = objective(d, CoefficientVector::zeros(3), spec, {});
  for (double a = -0.2; a <= 0.2; a += 0.05)
    for (double b = -0.2; b <= 0.2; b += 0.05)
      for (double c = -0.2; c <= 0.2; c += 0.05) {
        Vector v(3);
        v << a, b, c;
        EXPECT_GE(objective(d, CoefficientVector(v), spec, {}), at_zero - 1e-12);
      }
}

TEST(FitLasso, UnpenalizedLimitIsOls) {
  const auto d = random_problem(30, 5, 33);
  const Vector ols = d.X().colPivHouseholderQr().solve(d.y());
  const auto fit = fit_lasso(d, 0.0);
  EXPECT_LT(max_abs_diff(fit.beta.values(), ols), 1e-8);
}

TEST(FitElasticNet, NoRidgeIsLasso) {
  const auto d = random_problem(25, 8, 34);
  const double lambda = 0.3 * lambda_max(d);
  EXPECT_LT(max_abs_diff(fit_elastic_net(d, lambda, 0.0).beta.values(),
                         fit_lasso(d, lambda).beta.values()),
            1e-10);
}

TEST(FitElasticNet, PureRidgeClosedForm) {
  const auto d = random_problem(12, 5, 35);
  const double lambda2 = 1.7;
  Matrix A = d.X().transpose() * d.X();
  A.diagonal().array() += 2.0 * lambda2;
  const Vector ridge = A.llt().solve(d.X().transpose() * d.y());
  EXPECT_LT(max_abs_diff(fit_elastic_net(d, 0.0, lambda2).beta.values(), ridge), 1e-8);
}

TEST(FitMcp, UnbiasedAboveKinkForSingleOrthogonalColumn) {
  // p = 1, X^T X = n. With |z| / n beyond the kink the MCP solution is z / n.
  Matrix X(4, 1);
  X << 1, -1, 1, -1;
  Vector y(4);
  y << 3, -3, 3.5, -2.5;
  const Dataset d(X, y);
  const double z = X.col(0).dot(y);  // 12
  const double lambda = 2.0, gamma = 1.5;
  ASSERT_GT(std::abs(z) / 4.0, gamma * lambda / 4.0);
  EXPECT_NEAR(fit_mcp(d, lambda, gamma).beta[0], z / 4.0, 1e-12);
  // Inside the kink: firm threshold (z - lambda) / (n - n / gamma).
  const double lambda_in = 8.0;
  EXPECT_NEAR(fit_mcp(d, lambda_in, 3.0).beta[0], (z - lambda_in) / (4.0 - 4.0 / 3.0), 1e-12);
  EXPECT_EQ(fit_mcp(d, std::abs(z), 3.0).beta[0], 0.0);
}

TEST(FitMcp, LargeGammaApproachesLasso) {
  const auto d = random_problem(30, 6, 36);
  const double lambda = 0.2 * lambda_max(d);
  EXPECT_LT(max_abs_diff(fit_mcp(d, lambda, 1e7).beta.values(), fit_lasso(d, lambda).beta.values()),
            1e-3);
}

TEST(FitSace, NoReversedTermIsElasticNetWithHalfRidge) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = random_problem(15, 10, 100 + seed);
    const double lambda = 0.2 * lambda_max(d);
    const auto sace = fit_sace(d, lambda, 0.0);
    const auto en = fit_elastic_net(d, lambda, 0.5);
    EXPECT_LT(max_abs_diff(sace.beta.values(), en.beta.values()), 1e-10);
  }
}

TEST(FitSace, ZeroInitialEstimateMatchesNoReversedTerm) {
  const auto d = random_problem(15, 7, 37);
  const double lambda = 0.15 * lambda_max(d);
  const auto zero = InitialEstimate::user_supplied(CoefficientVector::zeros(7));
  EXPECT_EQ(fit_sace(d, lambda, 0.8, &zero).beta.values(), fit_sace(d, lambda, 0.0).beta.values());
}

TEST(FitSace, FullAdjustmentReproducesLasso) {
  // With b0 the Lasso fit at the same lambda and d = 1 the ridge term cancels.
  const auto d = random_problem(20, 9, 38);
  const double lambda = 0.25 * lambda_max(d);
  EXPECT_LT(max_abs_diff(fit_sace(d, lambda, 1.0).beta.values(), fit_lasso(d, lambda).beta.values()),
            1e-7);
}

TEST(FitSace, MatchesBruteForceOnSmallProblems) {
  std::mt19937_64 rng(39);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + trial % 6;
    const Index p = 1 + trial % 4;
    const Dataset d(gaussian_matrix(n, p, rng), gaussian_matrix(n, 1, rng).col(0));
    const double lambda = u(rng) * lambda_max(d);
    const double dd = u(rng);
    const Vector b0 = gaussian_matrix(p, 1, rng).col(0);
    const auto init = InitialEstimate::user_supplied(CoefficientVector(b0));
    const auto fit = fit_sace(d, lambda, dd, &init);
    EXPECT_LT(max_abs_diff(fit.beta.values(), brute_force_sace(d, lambda, dd, b0)), 1e-6);
  }
}

TEST(FitSace, KktStructureOnConvergedFits) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto d = random_problem(30, 60, 200 + seed, 5);
    const double lambda = 0.1 * lambda_max(d);
    const auto fit = fit_sace(d, lambda, 0.5);
    expect_kkt_structure(fit);
  }
}

TEST(FitSace, LargeLambdaGivesEmptySet) {
  const auto d = random_problem(20, 5, 40);
  const Vector b0 = Vector::Constant(5, 0.3);
  const auto init = InitialEstimate::user_supplied(CoefficientVector(b0));
  const double bound = (d.X().transpose() * d.y() + 0.7 * b0).cwiseAbs().maxCoeff();
  const auto fit = fit_sace(d, 1.01 * bound, 0.7, &init);
  EXPECT_EQ(fit.beta.nonzeros(), 0);
  EXPECT_TRUE(fit.kkt.equicorrelation_set.empty());
  EXPECT_LT(fit.kkt.correlations.cwiseAbs().maxCoeff(), fit.spec.lambda);
}

TEST(FitSace, ObjectiveDecreasesEverySweep) {
  const auto d = random_problem(25, 40, 41, 6);
  SolverOptions opts;
  opts.record_trace = true;
  const auto fit = fit_sace(d, 0.05 * lambda_max(d), 0.6, nullptr, nullptr, opts);
  ASSERT_GT(fit.objective_trace.size(), 1u);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-9 * std::abs(fit.objective_trace[i - 1]));
}

TEST(FitSace, ObjectiveBelowZeroAndWarmStart) {
  const auto d = random_problem(25, 30, 42, 4);
  const double lambda = 0.1 * lambda_max(d);
  const auto init = lasso_init(d, lambda);
  const auto warm = CoefficientVector(Vector::Constant(30, 0.2));
  const auto fit = fit_sace(d, lambda, 0.5, &init, &warm);
  EXPECT_LE(fit.objective, objective(d, CoefficientVector::zeros(30), fit.spec, init.beta0));
  EXPECT_LE(fit.objective, objective(d, warm, fit.spec, init.beta0));
  EXPECT_NEAR(fit.objective, objective(d, fit.beta, fit.spec, init.beta0), 1e-9);
}

TEST(FitSace, PermutationEquivariance) {
  const auto d = random_problem(20, 12, 43, 4);
  std::vector<Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(44);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto permuted = d.select_columns(perm);
  const double lambda = 0.1 * lambda_max(d);
  const auto a = fit_sace(d, lambda, 0.4);
  const auto b = fit_sace(permuted, lambda, 0.4);
  for (Index k = 0; k < 12; ++k) EXPECT_NEAR(b.beta[k], a.beta[perm[static_cast<std::size_t>(k)]], 1e-9);
}

TEST(FitSace, RecoversSignsWhereLassoDoes) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = random_problem(80, 20, 300 + seed, 3, 3.0, 0.3);
    Vector truth = Vector::Zero(20);
    truth << 1, -1, 1, Vector::Zero(17);
    const double lambda = 0.15 * lambda_max(d);
    const auto lasso = fit_lasso(d, lambda);
    const auto sign_of = [](const Vector& v) { return v.unaryExpr([](double x) { return double((x > 0) - (x < 0)); }).eval(); };
    if (sign_of(lasso.beta.values()) != truth) continue;
    ++checked;
    EXPECT_EQ(sign_of(fit_sace(d, lambda, 0.5).beta.values()), truth) << seed;
  }
  EXPECT_GE(checked, 10);
}

TEST(FitSace, RejectsBadD) {
  const auto d = random_problem(10, 3, 45);
  EXPECT_THROW(fit_sace(d, 1.0, 1.5), BadD);
  EXPECT_THROW(fit_gsace(d, 1.0, 3.0, -0.5), BadD);
}

TEST(FitSace, NoConvergenceCarriesBestIterate) {
  const auto d = random_problem(30, 50, 46, 5);
  SolverOptions opts;
  opts.max_sweeps = 1;
  try {
    fit_sace(d, 0.01 * lambda_max(d), 0.5, nullptr, nullptr, opts);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.best().iterations, 1);
    EXPECT_FALSE(e.best().converged);
    EXPECT_EQ(e.best().beta.size(), 50);
  }
}

TEST(FitGsace, UnpenalizedClosedForm) {
  const auto d = random_problem(12, 5, 47);
  const Vector b0 = Vector::LinSpaced(5, -1.0, 1.0);
  const auto init = InitialEstimate::user_supplied(CoefficientVector(b0));
  Matrix A = d.X().transpose() * d.X();
  A.diagonal().array() += 1.0;
  const Vector expected = A.llt().solve(d.X().transpose() * d.y() + 0.6 * b0);
  EXPECT_LT(max_abs_diff(fit_gsace(d, 0.0, 3.0, 0.6, &init).beta.values(), expected), 1e-8);
}

TEST(FitGsace, ZeroResponseAndInitGiveZero) {
  std::mt19937_64 rng(48);
  const Dataset d(gaussian_matrix(10, 4, rng), Vector::Zero(10));
  const auto init = InitialEstimate::user_supplied(CoefficientVector::zeros(4));
  EXPECT_EQ(fit_gsace(d, 0.5, 3.0, 0.5, &init).beta.nonzeros(), 0);
}

TEST(FitGsace, LargeGammaApproachesSace) {
  const auto d = random_problem(30, 10, 49, 3);
  const double lambda = 0.2 * lambda_max(d);
  EXPECT_LT(max_abs_diff(fit_gsace(d, lambda, 1e7, 0.0).beta.values(),
                         fit_sace(d, lambda, 0.0).beta.values()),
            1e-3);
}

TEST(FitGsace, ConvexityGuard) {
  const auto d = random_problem(10, 3, 50);
  // n + 1 - n / gamma <= 0 for gamma <= n / (n + 1).
  EXPECT_THROW(fit_gsace(d, 1.0, 10.0 / 11.0, 0.5), BadGamma);
  EXPECT_THROW(fit_mcp(d, 1.0, 1.0), BadGamma);
}

TEST(FitGsace, KktStructureOnConvergedFits) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto d = random_problem(40, 30, 400 + seed, 4);
    const auto fit = fit_gsace(d, 0.15 * lambda_max(d), 3.0, 0.5);
    expect_kkt_structure(fit);
  }
}

TEST(FitMcp, KktStructureOnConvergedFits) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto d = random_problem(40, 30, 500 + seed, 4);
    expect_kkt_structure(fit_mcp(d, 0.2 * lambda_max(d), 3.0));
    expect_kkt_structure(fit_lasso(d, 0.05 * lambda_max(d)));
    expect_kkt_structure(fit_elastic_net(d, 0.05 * lambda_max(d), 2.0));
  }
}

TEST(KktCheck, NeedsInitWhenDIsNonzero) {
  const auto d = random_problem(15, 5, 51);
  const auto fit = fit_sace(d, 0.3 * lambda_max(d), 0.5);
  EXPECT_THROW(kkt_check(d, fit, nullptr), InvalidArgument);
  const auto init = lasso_init(d, 0.3 * lambda_max(d));
  EXPECT_LE(kkt_check(d, fit, &init).max_violation, 1e-6);
}

TEST(ExplicitSolution, ReproducesSolverOnItsSet) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = random_problem(25, 15, 600 + seed, 4);
    const double lambda = 0.15 * lambda_max(d);
    const auto init = lasso_init(d, lambda);
    const auto fit = fit_sace(d, lambda, 0.7, &init);
    const auto direct = explicit_solution_on_set(d, fit.kkt.equicorrelation_set, lambda, 0.7,
                                                 fit.kkt.tau, init);
    EXPECT_LT(max_abs_diff(direct.values(), fit.beta.values()), 1e-8) << seed;
  }
}

TEST(ExplicitSolution, EmptySetAndRidgeSpecialization) {
  const auto d = random_problem(10, 4, 52);
  const auto init = InitialEstimate::user_supplied(CoefficientVector::zeros(4));
  EXPECT_EQ(explicit_solution_on_set(d, SupportSet{}, 1.0, 0.5, Vector::Ones(4), init).nonzeros(), 0);
  Matrix A = d.X().transpose() * d.X();
  A.diagonal().array() += 1.0;
  const Vector ridge = A.llt().solve(d.X().transpose() * d.y());
  EXPECT_LT(max_abs_diff(explicit_solution_on_set(d, SupportSet::all(4), 0.0, 0.0, Vector::Ones(4), init)
                             .values(),
                         ridge),
            1e-12);
}

TEST(FitMethod, DispatchesToEachSolver) {
  const auto d = random_problem(20, 6, 53);
  Hyperparameters h;
  h.lambda = 0.2 * lambda_max(d);
  h.d = 0.3;
  h.gamma = 3.0;
  h.lambda2 = 0.8;
  EXPECT_EQ(fit_method(d, Method::Lasso, h).beta.values(), fit_lasso(d, h.lambda).beta.values());
  EXPECT_EQ(fit_method(d, Method::ElasticNet, h).beta.values(),
            fit_elastic_net(d, h.lambda, 0.8).beta.values());
  EXPECT_EQ(fit_method(d, Method::MCP, h).beta.values(), fit_mcp(d, h.lambda, 3.0).beta.values());
  EXPECT_EQ(fit_method(d, Method::SACE, h).beta.values(), fit_sace(d, h.lambda, 0.3).beta.values());
  EXPECT_EQ(fit_method(d, Method::GSACE, h).beta.values(),
            fit_gsace(d, h.lambda, 3.0, 0.3).beta.values());
}

}  // namespace
}  // namespace sace
