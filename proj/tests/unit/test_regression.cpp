#include "kryreg/dense.hpp"
#include "kryreg/regression.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace kryreg;

namespace {

Matrix random_points(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix p(d, n);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = u(gen);
  return p;
}

Dataset smooth_data(Index n, Index d, std::uint64_t seed) {
  Matrix p = random_points(n, d, seed);
  std::mt19937_64 gen(seed + 1);
  std::normal_distribution<double> noise(0.0, 0.05);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = std::sin(3.0 * p(0, i)) + p.col(i).squaredNorm() + noise(gen);
  return Dataset(p, y);
}

Matrix cross_matrix(const Dataset& train, const KernelSpec& spec, const Dataset& test) {
  Matrix k(test.n(), train.n());
  for (Index t = 0; t < test.n(); ++t)
    for (Index i = 0; i < train.n(); ++i) k(t, i) = eval_kernel(spec, train.points().col(i), test.points().col(t));
  return k;
}

FitOptions with_solver(SolverKind kind, double tol = 1e-6) {
  FitOptions o;
  o.solve.solver = kind;
  o.solve.config.tolerance = tol;
  return o;
}

}  // namespace

TEST(Fit, SinglePoint) {
  Matrix p(2, 1);
  p << 0.3, 0.7;
  Vector y(1);
  y << 2.0;
  const auto m = fit(Dataset(p, y), {KernelFamily::Gaussian, 0.5, 1.0}, with_solver(SolverKind::Direct));
  EXPECT_DOUBLE_EQ(m.weights(0), 1.0);
  for (SolverKind k : {SolverKind::CG, SolverKind::FGMRES, SolverKind::FCG})
    EXPECT_NEAR(fit(Dataset(p, y), {KernelFamily::Gaussian, 0.5, 1.0}, with_solver(k)).weights(0), 1.0, 1e-12);
}

TEST(Fit, ZeroTargetsGiveZeroWeights) {
  const Dataset data(random_points(80, 3, 1), Vector::Zero(80));
  for (SolverKind k : {SolverKind::Direct, SolverKind::CG, SolverKind::FGMRES, SolverKind::FCG, SolverKind::IluCG}) {
    const auto m = fit(data, {KernelFamily::Gaussian, 0.4, 1e-3}, with_solver(k));
    EXPECT_EQ(m.weights, Vector::Zero(80)) << to_string(k);
    EXPECT_EQ(m.solver_used, k);
  }
}

TEST(Fit, FgmresMatchesDirectN500) {
  const Dataset data = smooth_data(500, 3, 2);
  const KernelSpec spec{KernelFamily::Gaussian, 0.3, 1e-2};
  const auto direct = fit(data, spec, with_solver(SolverKind::Direct));
  // The weights carry the residual amplified by up to 1/gamma.
  const auto iter = fit(data, spec, with_solver(SolverKind::FGMRES, 1e-11));
  EXPECT_LT((direct.weights - iter.weights).cwiseAbs().mean(), 1e-6);
  EXPECT_TRUE(iter.trace.converged());
}

TEST(Fit, RequiresTargets) {
  EXPECT_THROW(fit(Dataset(random_points(5, 2, 3)), {KernelFamily::Gaussian, 0.5, 1e-2}), InvalidInput);
}

TEST(Fit, NonConvergenceCarriesTrace) {
  FitOptions o = with_solver(SolverKind::CG, 1e-14);
  o.solve.config.max_iterations = 3;
  try {
    fit(smooth_data(100, 2, 4), {KernelFamily::Gaussian, 0.8, 1e-6}, o);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_EQ(e.trace().termination, Termination::MaxIterations);
    EXPECT_EQ(e.trace().iterations(), 3);
  }
}

TEST(Fit, CenteringAddsMeanBack) {
  Dataset data = smooth_data(60, 2, 5);
  Vector shifted = data.targets().array() + 10.0;
  FitOptions o = with_solver(SolverKind::Direct);
  o.center_targets = true;
  const KernelSpec spec{KernelFamily::Gaussian, 0.3, 1e-2};
  const auto a = fit(data.with_targets(shifted), spec, o);
  const auto b = fit(data, spec, o);
  const Dataset far(Matrix::Constant(2, 1, 50.0));
  EXPECT_NEAR(predict_mean(a, far)(0), shifted.mean(), 1e-12);
  EXPECT_NEAR(predict_mean(a, data)(3) - predict_mean(b, data)(3), 10.0, 1e-8);
}

TEST(PredictMean, InterpolatesAtNode) {
  Matrix p(3, 1);
  p << 0.1, 0.2, 0.3;
  Vector y(1);
  y << -1.25;
  const Dataset train(p, y);
  const auto m = fit(train, {KernelFamily::Gaussian, 0.5, 0.0}, with_solver(SolverKind::Direct));
  EXPECT_DOUBLE_EQ(predict_mean(m, Dataset(p))(0), -1.25);
}

TEST(PredictMean, ZeroWeights) {
  const Dataset train(random_points(20, 2, 6), Vector::Zero(20));
  const auto m = fit(train, {KernelFamily::Gaussian, 0.5, 1e-2});
  EXPECT_EQ(predict_mean(m, Dataset(random_points(7, 2, 7))), Vector::Zero(7));
}

TEST(PredictMean, MatchesCrossMatrixOracle) {
  const Dataset train = smooth_data(500, 3, 8);
  const Dataset test(random_points(100, 3, 9));
  for (KernelFamily fam : {KernelFamily::Gaussian, KernelFamily::Matern32}) {
    const KernelSpec spec{fam, 0.4, 1e-2};
    const auto m = fit(train, spec, with_solver(SolverKind::Direct));
    const Vector oracle = cross_matrix(train, spec, test) * m.weights;
    EXPECT_LE((predict_mean(m, test) - oracle).cwiseAbs().maxCoeff(), 1e-10) << to_string(fam);
  }
}

TEST(PredictMean, DimensionMismatch) {
  const auto m = fit(smooth_data(10, 2, 10), {KernelFamily::Gaussian, 0.5, 1e-2});
  EXPECT_THROW(predict_mean(m, Dataset(random_points(3, 3, 11))), InvalidInput);
}

TEST(PredictVariance, MatchesDenseOracle) {
  const Dataset train = smooth_data(300, 2, 12);
  const Dataset test(random_points(20, 2, 13));
  const KernelSpec spec{KernelFamily::Gaussian, 0.3, 1e-2};
  const Matrix k = build_dense_kernel(train, spec);
  const Matrix ks = cross_matrix(train, spec, test);
  const Matrix s = cholesky_solve(k, Matrix(ks.transpose()));
  Vector oracle(20);
  for (Index t = 0; t < 20; ++t) oracle(t) = 1.0 - ks.row(t).dot(s.col(t));
  for (SolverKind kind : {SolverKind::Direct, SolverKind::CG, SolverKind::FGMRES}) {
    const auto m = fit(train, spec, with_solver(kind, 1e-10));
    EXPECT_LE((predict_variance(m, test) - oracle).cwiseAbs().maxCoeff(), 1e-6) << to_string(kind);
  }
}

TEST(PredictVariance, LimitCases) {
  const Dataset train = smooth_data(50, 2, 14);
  const auto loud = fit(train, {KernelFamily::Gaussian, 0.3, 1e6});
  const Vector v = predict_variance(loud, Dataset(random_points(5, 2, 15)));
  for (Index i = 0; i < v.size(); ++i) EXPECT_NEAR(v(i), 1.0, 1e-3);

  const auto quiet = fit(train, {KernelFamily::Gaussian, 0.05, 1e-2});
  const Vector far = predict_variance(quiet, Dataset(Matrix::Constant(2, 2, 20.0)));
  EXPECT_NEAR(far(0), 1.0, 1e-6);
  EXPECT_NEAR(far(1), 1.0, 1e-6);
}

TEST(PredictVariance, NonNegativeAndShrinksWhenPointAdded) {
  const Dataset train = smooth_data(100, 2, 16);
  const Dataset test(random_points(10, 2, 17));
  const KernelSpec spec{KernelFamily::Gaussian, 0.2, 1e-3};
  const Vector before = predict_variance(fit(train, spec, with_solver(SolverKind::Direct)), test);
  for (Index t = 0; t < test.n(); ++t) {
    EXPECT_GE(before(t), 0.0);
    Matrix p(2, train.n() + 1);
    p << train.points(), test.points().col(t);
    Vector y(train.n() + 1);
    y << train.targets(), 0.0;
    const auto m = fit(Dataset(p, y), spec, with_solver(SolverKind::Direct));
    EXPECT_LT(predict_variance(m, test.subset(std::vector<Index>{t}))(0), before(t));
  }
}

TEST(Predict, MeanAndOptionalVariance) {
  const Dataset train = smooth_data(40, 2, 18);
  const auto m = fit(train, {KernelFamily::Gaussian, 0.3, 1e-2});
  const Dataset test(random_points(6, 2, 19));
  EXPECT_FALSE(predict(m, test, false).variance.has_value());
  const auto r = predict(m, test, true);
  ASSERT_TRUE(r.variance.has_value());
  EXPECT_EQ(r.variance->size(), 6);
  EXPECT_EQ(r.mean, predict_mean(m, test));
}

TEST(Krige, SinglePointReproducesValue) {
  Matrix p(2, 1);
  p << 0.5, 0.5;
  Vector y(1);
  y << 3.5;
  EXPECT_DOUBLE_EQ(simple_krige(Dataset(p, y), {KernelFamily::Gaussian, 0.1, 0.0}, Dataset(p),
                                with_solver(SolverKind::Direct))(0),
                   3.5);
}

TEST(Krige, DecaysFarFromData) {
  const Dataset train(random_points(30, 2, 20), Vector::Constant(30, 4.0));
  const Vector y = simple_krige(train, {KernelFamily::Gaussian, 0.1, 1e-2}, Dataset(Matrix::Constant(2, 1, 10.0)));
  EXPECT_NEAR(y(0), 0.0, 1e-12);
}

TEST(Krige, IdenticalToFitThenPredict) {
  const Dataset train = smooth_data(200, 2, 21);
  const Dataset test(random_points(30, 2, 22));
  const KernelSpec spec{KernelFamily::Gaussian, 0.2, 1e-3};
  for (SolverKind kind : {SolverKind::CG, SolverKind::FGMRES}) {
    const auto opts = with_solver(kind);
    EXPECT_EQ(simple_krige(train, spec, test, opts), predict_mean(fit(train, spec, opts), test)) << to_string(kind);
  }
}

TEST(Krige, FgmresMatchesCgOnGriddedField) {
  // 80 x 80 grid with every fifth cell held out: 5120 observed, 1280 held out.
  const Index nx = 80;
  Matrix obs(2, 0), held(2, 0);
  std::vector<double> y;
  for (Index iy = 0; iy < nx; ++iy) {
    for (Index ix = 0; ix < nx; ++ix) {
      Vector x(2);
      x << static_cast<double>(ix) / (nx - 1), static_cast<double>(iy) / (nx - 1);
      Matrix& dst = (iy * nx + ix) % 5 == 2 ? held : obs;
      dst.conservativeResize(2, dst.cols() + 1);
      dst.col(dst.cols() - 1) = x;
      if (&dst == &obs) y.push_back(std::sin(6.0 * x(0)) * std::cos(4.0 * x(1)));
    }
  }
  const Dataset train(obs, Eigen::Map<Vector>(y.data(), static_cast<Index>(y.size())));
  const Dataset test(held);
  const KernelSpec spec{KernelFamily::Gaussian, 0.05, 1e-2};
  const Vector by_cg = simple_krige(train, spec, test, with_solver(SolverKind::CG, 1e-8));
  const Vector by_fgmres = simple_krige(train, spec, test, with_solver(SolverKind::FGMRES, 1e-8));
  EXPECT_LT((by_cg - by_fgmres).cwiseAbs().mean(), 1e-6);
}

TEST(GridSearch, SingleCell) {
  const double bw[] = {0.3};
  const double reg[] = {1e-2};
  const auto r = ml_grid_search(smooth_data(50, 2, 23), 50, bw, reg);
  EXPECT_EQ(r.best.bandwidth, 0.3);
  EXPECT_EQ(r.best.regularizer, 1e-2);
  EXPECT_EQ(r.scores.rows(), 1);
}

TEST(GridSearch, RecoversGeneratingBandwidth) {
  const Index n = 400;
  const KernelSpec truth{KernelFamily::Gaussian, 0.5, 1e-2};
  const Dataset x(random_points(n, 2, 24));
  const Matrix l = CholeskyFactor(build_dense_kernel(x, truth)).lower();
  std::mt19937_64 gen(25);
  std::normal_distribution<double> g;
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = g(gen);
  const Dataset data = x.with_targets(l * z);
  const std::vector<double> bw{0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  const std::vector<double> reg{1e-4, 1e-3, 1e-2, 1e-1};
  const auto r = ml_grid_search(data, 400, bw, reg);
  EXPECT_GE(r.best.bandwidth, 0.2);
  EXPECT_LE(r.best.bandwidth, 1.0);
}

TEST(GridSearch, ZeroTargetsPickSmallestLogDeterminant) {
  const Dataset x(random_points(120, 2, 26));
  const Dataset data = x.with_targets(Vector::Zero(120));
  const std::vector<double> bw{0.1, 0.3, 0.9};
  const std::vector<double> reg{1e-2, 1e-1, 1.0};
  double best = std::numeric_limits<double>::infinity();
  KernelSpec arg;
  for (double b : bw)
    for (double g : reg) {
      const double ld = CholeskyFactor(build_dense_kernel(x, {KernelFamily::Gaussian, b, g})).log_determinant();
      if (ld < best) {
        best = ld;
        arg = {KernelFamily::Gaussian, b, g};
      }
    }
  const auto r = ml_grid_search(data, 120, bw, reg);
  EXPECT_EQ(r.best.bandwidth, arg.bandwidth);
  EXPECT_EQ(r.best.regularizer, arg.regularizer);
}

TEST(GridSearch, ExactTiesResolvedByBandwidth) {
  // One point: K = 1 + gamma whatever the bandwidth, so all bandwidths tie
  // exactly and the smallest one wins.
  Matrix p(1, 1);
  p << 0.0;
  const Dataset data(p, Vector::Zero(1));
  const std::vector<double> bw{0.7, 0.2, 0.4};
  const std::vector<double> reg{1e-3};
  const auto r = ml_grid_search(data, 1, bw, reg);
  EXPECT_EQ(r.best.bandwidth, 0.2);
}

TEST(GridSearch, PermutationInvariant) {
  const Dataset data = smooth_data(150, 2, 27);
  std::vector<double> bw{0.05, 0.1, 0.2, 0.4, 0.8};
  std::vector<double> reg{1e-4, 1e-3, 1e-2, 1e-1};
  const auto ref = ml_grid_search(data, 100, bw, reg);
  std::mt19937_64 gen(28);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(bw.begin(), bw.end(), gen);
    std::shuffle(reg.begin(), reg.end(), gen);
    const auto r = ml_grid_search(data, 100, bw, reg);
    EXPECT_EQ(r.best.bandwidth, ref.best.bandwidth);
    EXPECT_EQ(r.best.regularizer, ref.best.regularizer);
    EXPECT_EQ(r.subset, ref.subset);
  }
}

TEST(GridSearch, FailedCellsScoreMinusInfinity) {
  Matrix p(1, 3);
  p << 0.2, 0.2, 0.7;
  const Dataset data(p, Vector::Ones(3));
  const std::vector<double> bw{0.3};
  const std::vector<double> reg{0.0, 1e-2};
  const auto r = ml_grid_search(data, 3, bw, reg);
  EXPECT_EQ(r.scores(0, 0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.best.regularizer, 1e-2);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(GridSearch, Errors) {
  const Dataset data = smooth_data(20, 2, 29);
  const std::vector<double> bw{0.3}, none;
  EXPECT_THROW(ml_grid_search(data, 21, bw, bw), InvalidInput);
  EXPECT_THROW(ml_grid_search(data, 10, none, bw), InvalidInput);
  EXPECT_THROW(ml_grid_search(Dataset(random_points(5, 2, 30)), 5, bw, bw), InvalidInput);
}

TEST(DeterministicSubset, SortedUniqueAndStable) {
  const auto a = deterministic_subset(1000, 100, 5);
  EXPECT_EQ(a, deterministic_subset(1000, 100, 5));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_EQ(deterministic_subset(10, 20, 5).size(), 10u);
}

TEST(Agreement, SolversAgreePairwise) {
  const Dataset train = smooth_data(800, 3, 31);
  const Dataset test(random_points(200, 3, 32));
  const KernelSpec spec{KernelFamily::Gaussian, 0.4, 1e-2};
  std::vector<Vector> preds;
  for (SolverKind kind : {SolverKind::Direct, SolverKind::CG, SolverKind::FGMRES, SolverKind::FCG})
    preds.push_back(predict_mean(fit(train, spec, with_solver(kind, 1e-8)), test));
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = i + 1; j < preds.size(); ++j)
      EXPECT_LT((preds[i] - preds[j]).cwiseAbs().mean(), 1e-6) << i << " vs " << j;
}
