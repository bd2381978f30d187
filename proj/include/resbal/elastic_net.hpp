#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resbal/data.hpp"

namespace resbal {

enum class Family { Gaussian, Binomial };

// Penalized regression settings. The objective is
//
//   Gaussian:  sum_i w_i (y_i - b0 - x_i . beta)^2      + lambda * P(beta)
//   Binomial:  sum_i w_i [log(1 + e^eta_i) - y_i eta_i] + lambda * P(beta)
//
// with P(beta) = (1 - alpha) ||beta||_2^2 + alpha ||beta||_1. The loss is a
// plain sum over observations (no 1/(2n) factor), so a glmnet-style
// per-observation penalty lambda_g corresponds to lambda = 2 n lambda_g for
// the Gaussian family and lambda = n lambda_g for the binomial family.
// With `standardize`, the penalty acts on coefficients of columns scaled to
// unit sample standard deviation.
struct PenaltyConfig {
  double lambda = 0.0;
  double alpha = 0.9;
  bool standardize = true;
  bool fit_intercept = true;
  int max_iter = 100000;   // cap on coordinate sweeps
  double tol = 1e-7;       // max coefficient change per sweep (working scale)
  double kkt_tol = 1e-6;   // certificate checked after the sweeps settle

  void validate() const;
};

struct LinearFit {
  Family family = Family::Gaussian;
  Vector beta;              // original covariate scale
  double intercept = 0.0;
  std::vector<Index> support;
  double objective = 0.0;   // penalized loss in the working (standardized) scale
  double lambda_used = 0.0;
  double alpha = 1.0;
  double kkt_residual = 0.0;
  int sweeps = 0;
  bool converged = true;
  std::vector<std::string> warnings;
};

// `weights`, when non-empty, are per-observation loss weights (length n, > 0).
LinearFit fit_gaussian(const Matrix& X, const Vector& y, const PenaltyConfig& cfg,
                       const Vector& weights = Vector());
LinearFit fit_logistic(const Matrix& X, const Vector& w, const PenaltyConfig& cfg,
                       const Vector& weights = Vector());

// Warm-started fits along a decreasing lambda sequence. Stops early once the
// fit explains 99.9% of the null deviance or stops improving, so the result
// may be shorter than `lambdas`.
std::vector<LinearFit> fit_path(const Matrix& X, const Vector& y, Family family,
                                const PenaltyConfig& cfg, const std::vector<double>& lambdas,
                                const Vector& weights = Vector(), bool early_stop = true);

// Smallest lambda for which every coefficient is zero.
double lambda_max(const Matrix& X, const Vector& y, Family family, const PenaltyConfig& cfg,
                  const Vector& weights = Vector());

// First-order optimality violation of `fit` for the design exactly as given
// (no standardization applied); the fit's lambda and alpha are used.
double kkt_residual(const Matrix& X, const Vector& y, const LinearFit& fit,
                    const Vector& weights = Vector());

// Penalized objective of (intercept, beta) on the design exactly as given.
double penalized_objective(const Matrix& X, const Vector& y, Family family, double intercept,
                           const Vector& beta, double lambda, double alpha,
                           const Vector& weights = Vector());

// Linear predictor for Gaussian fits, probability for binomial fits.
Vector predict(const LinearFit& fit, const Matrix& Xnew);

struct CvOptions {
  int n_lambda = 100;
  double lambda_min_ratio = -1.0;  // <= 0: 1e-3 when n < p, else 1e-4
  int k_folds = 10;
  std::uint64_t seed = 1;
  bool standardize = true;
  bool fit_intercept = true;
  double tol = 1e-7;
  int max_iter = 100000;
};

// Cross-validated lambda path. Lambdas are on the full-sample objective
// scale; fold fits use the same per-observation penalty.
struct CvPath {
  std::vector<double> lambdas;  // strictly decreasing
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
};

CvPath cv_select(const Matrix& X, const Vector& y, Family family, double alpha,
                 const CvOptions& opts, const Vector& weights = Vector());

struct CvFit {
  CvPath path;
  LinearFit fit;  // full-sample fit at lambda_1se
};

CvFit fit_cv(const Matrix& X, const Vector& y, Family family, double alpha,
             const CvOptions& opts, const Vector& weights = Vector());

}  // namespace resbal
