#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "resbal/elastic_net.hpp"
#include "resbal/errors.hpp"
#include "resbal/rng.hpp"

using namespace resbal;

namespace {

Matrix random_matrix(Rng& rng, Index n, Index p) {
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using oracle::column_sd;
using oracle::kkt_violation;
using oracle::standardized;

}  // namespace

TEST_CASE("gaussian fits satisfy KKT on the working design") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 20 + static_cast<Index>(rng.uniform_int(80));
    const Index p = 5 + static_cast<Index>(rng.uniform_int(120));
    const Matrix X = random_matrix(rng, n, p);
    Vector beta = Vector::Zero(p);
    for (Index j = 0; j < std::min<Index>(5, p); ++j) beta(j) = rng.normal();
    const Vector y = X * beta + random_matrix(rng, n, 1).col(0);
    PenaltyConfig cfg;
    cfg.alpha = trial % 2 ? 1.0 : 0.5;
    cfg.standardize = trial % 3 != 0;
    cfg.lambda = lambda_max(X, y, Family::Gaussian, cfg) * (0.02 + 0.5 * rng.uniform());
    const LinearFit fit = fit_gaussian(X, y, cfg);
    if (cfg.standardize) {
      const Vector bw = fit.beta.cwiseProduct(column_sd(X));
      const Matrix Z = standardized(X);
      const double b0 = fit.intercept + X.colwise().mean().dot(fit.beta);
      CHECK(kkt_violation(Z, y, b0, bw, cfg.lambda, cfg.alpha, Family::Gaussian, true) <= 1e-6);
    } else {
      CHECK(kkt_violation(X, y, fit.intercept, fit.beta, cfg.lambda, cfg.alpha, Family::Gaussian, true) <= 1e-6);
      CHECK(kkt_residual(X, y, fit) <= 1e-6);
    }
    CHECK(fit.converged);
  }
}

TEST_CASE("logistic fits satisfy KKT on the working design") {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 60 + static_cast<Index>(rng.uniform_int(80));
    const Index p = 5 + static_cast<Index>(rng.uniform_int(60));
    const Matrix X = random_matrix(rng, n, p);
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = rng.bernoulli(sigmoid(0.8 * X(i, 0) - 0.5 * X(i, 1))) ? 1.0 : 0.0;
    PenaltyConfig cfg;
    cfg.alpha = 0.9;
    cfg.standardize = false;
    cfg.lambda = lambda_max(X, w, Family::Binomial, cfg) * 0.1;
    const LinearFit fit = fit_logistic(X, w, cfg);
    CHECK(kkt_violation(X, w, fit.intercept, fit.beta, cfg.lambda, cfg.alpha, Family::Binomial, true) <= 1e-6);
    const Vector prob = predict(fit, X);
    CHECK(prob.minCoeff() > 0.0);
    CHECK(prob.maxCoeff() < 1.0);
  }
}

TEST_CASE("orthonormal lasso matches per-coordinate minimizers") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 50, p = 20;
    const Matrix Q = random_matrix(rng, n, p).householderQr().householderQ() * Matrix::Identity(n, p);
    Vector beta(p);
    for (Index j = 0; j < p; ++j) beta(j) = j < 5 ? 3 * rng.normal() : 0.0;
    const Vector y = Q * beta + 0.5 * random_matrix(rng, n, 1).col(0);
    PenaltyConfig cfg;
    cfg.alpha = 1.0;
    cfg.standardize = false;
    cfg.fit_intercept = false;
    cfg.lambda = 1.0 + rng.uniform();
    const LinearFit fit = fit_gaussian(Q, y, cfg);
    for (Index j = 0; j < p; ++j) {
      const Vector q = Q.col(j);
      auto sub = [&](double b, double sign) { return -2.0 * q.dot(y - q * b) + cfg.lambda * sign; };
      auto left = [&](double b) { return sub(b, b > 0 ? 1.0 : -1.0); };
      auto right = [&](double b) { return sub(b, b >= 0 ? 1.0 : -1.0); };
      const double bound = std::abs(q.dot(y)) + cfg.lambda + 1.0;
      const double b_star = oracle::subgradient_bisection(left, right, -bound, bound);
      CHECK(std::abs(fit.beta(j) - b_star) <= 1e-8);
      auto f = [&](double b) { return (y - q * b).squaredNorm() + cfg.lambda * std::abs(b); };
      CHECK(std::abs(fit.beta(j) - oracle::golden_section(f, -bound, bound)) <= 1e-5);
    }
  }
}

TEST_CASE("integer weights act like duplicated rows") {
  Rng rng(24);
  const Index n = 40, p = 8;
  const Matrix X = random_matrix(rng, n, p);
  const Vector y = X.col(0) * 2.0 + random_matrix(rng, n, 1).col(0);
  Vector wts = Vector::Ones(n);
  wts.head(10).setConstant(2.0);
  Matrix Xd(n + 10, p);
  Xd << X, X.topRows(10);
  Vector yd(n + 10);
  yd << y, y.head(10);
  PenaltyConfig cfg;
  cfg.standardize = false;
  cfg.lambda = 5.0;
  cfg.tol = 1e-10;
  const LinearFit a = fit_gaussian(X, y, cfg, wts);
  const LinearFit b = fit_gaussian(Xd, yd, cfg);
  CHECK((a.beta - b.beta).lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK(std::abs(a.intercept - b.intercept) < 1e-7);
}

TEST_CASE("lambda_max zeroes every coefficient and nothing larger is needed") {
  Rng rng(25);
  const Matrix X = random_matrix(rng, 50, 10);
  const Vector y = X.col(3) + random_matrix(rng, 50, 1).col(0);
  PenaltyConfig cfg;
  cfg.lambda = lambda_max(X, y, Family::Gaussian, cfg);
  CHECK(fit_gaussian(X, y, cfg).support.empty());
  cfg.lambda *= 0.95;
  CHECK(!fit_gaussian(X, y, cfg).support.empty());
}

TEST_CASE("fitted objective is locally minimal") {
  Rng rng(26);
  const Matrix X = random_matrix(rng, 60, 15);
  const Vector y = X.col(0) - X.col(1) + random_matrix(rng, 60, 1).col(0);
  PenaltyConfig cfg;
  cfg.standardize = false;
  cfg.alpha = 0.7;
  cfg.lambda = 10.0;
  const LinearFit fit = fit_gaussian(X, y, cfg);
  const double f0 = penalized_objective(X, y, Family::Gaussian, fit.intercept, fit.beta, cfg.lambda, cfg.alpha);
  for (int k = 0; k < 50; ++k) {
    Vector b = fit.beta;
    b(static_cast<Index>(rng.uniform_int(15))) += 1e-3 * rng.normal();
    CHECK(penalized_objective(X, y, Family::Gaussian, fit.intercept + 1e-4 * rng.normal(), b, cfg.lambda,
                              cfg.alpha) >= f0 - 1e-9);
  }
}

TEST_CASE("fit_path is warm-started and decreasing in lambda") {
  Rng rng(27);
  const Matrix X = random_matrix(rng, 80, 30);
  const Vector y = X.leftCols(3).rowwise().sum() + random_matrix(rng, 80, 1).col(0);
  PenaltyConfig cfg;
  const double lmax = lambda_max(X, y, Family::Gaussian, cfg);
  std::vector<double> lambdas;
  for (int k = 0; k < 10; ++k) lambdas.push_back(lmax * std::pow(0.5, k));
  const auto path = fit_path(X, y, Family::Gaussian, cfg, lambdas);
  REQUIRE(!path.empty());
  CHECK(path.front().support.empty());
  for (std::size_t k = 0; k < path.size(); ++k) {
    cfg.lambda = lambdas[k];
    const LinearFit cold = fit_gaussian(X, y, cfg);
    CHECK((cold.beta - path[k].beta).lpNorm<Eigen::Infinity>() < 1e-5);
  }
  CHECK_THROWS_AS(fit_path(X, y, Family::Gaussian, cfg, {1.0, 2.0}), UsageError);
}

TEST_CASE("cross-validation is deterministic and picks lambda_1se >= lambda_min") {
  Rng rng(28);
  const Matrix X = random_matrix(rng, 100, 40);
  const Vector y = 2 * X.col(0) + random_matrix(rng, 100, 1).col(0);
  CvOptions opts;
  opts.seed = 9;
  const CvPath a = cv_select(X, y, Family::Gaussian, 0.9, opts);
  const CvPath b = cv_select(X, y, Family::Gaussian, 0.9, opts);
  CHECK(a.lambdas == b.lambdas);
  CHECK(a.cv_mean == b.cv_mean);
  CHECK(a.lambda_1se >= a.lambda_min);
  CHECK(a.index_1se <= a.index_min);
  for (std::size_t k = 1; k < a.lambdas.size(); ++k) CHECK(a.lambdas[k] < a.lambdas[k - 1]);
  CHECK(a.cv_mean[a.index_1se] <= a.cv_mean[a.index_min] + a.cv_se[a.index_min] + 1e-12);
  const CvFit fit = fit_cv(X, y, Family::Gaussian, 0.9, opts);
  CHECK(fit.fit.beta(0) > 1.0);
  CHECK(fit.fit.lambda_used == doctest::Approx(a.lambda_1se));
}

TEST_CASE("logistic cross-validation runs with stratified folds") {
  Rng rng(29);
  const Matrix X = random_matrix(rng, 120, 20);
  Vector w(120);
  for (Index i = 0; i < 120; ++i) w(i) = rng.bernoulli(sigmoid(1.5 * X(i, 0))) ? 1.0 : 0.0;
  CvOptions opts;
  const CvFit fit = fit_cv(X, w, Family::Binomial, 0.9, opts);
  CHECK(fit.fit.beta(0) > 0.0);
}

TEST_CASE("invalid inputs are rejected") {
  Matrix X = Matrix::Ones(5, 2);
  Vector y = Vector::Zero(5);
  PenaltyConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(fit_gaussian(X, y, cfg), UsageError);
  cfg.alpha = 0.5;
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(fit_gaussian(X, y, cfg), UsageError);
  cfg.lambda = 1.0;
  CHECK_THROWS(fit_gaussian(X, Vector::Zero(4), cfg));
  CHECK_THROWS(fit_logistic(X, Vector::Constant(5, 0.5), cfg));
}
