#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resbal/balancing.hpp"
#include "resbal/data.hpp"
#include "resbal/elastic_net.hpp"

namespace resbal {

enum class Method { Arb, ArbAte, Naive, EnetOnly, BalanceOnly, Ipw, Aipw, WeightedEnet, Tmle, DoubleSelect };

// CLI names: arb, arb-ate, naive, enet, balance, ipw, aipw, wenet, tmle, double-select.
std::string method_name(Method m);
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

struct EstimatorConfig {
  double zeta = 0.5;
  double alpha = 0.9;       // outcome model mixing weight
  double prop_alpha = 0.9;  // propensity model mixing weight
  double level = 0.95;
  double trim_lo = 0.05;
  double trim_hi = 0.95;
  int k_folds = 10;
  std::uint64_t cv_seed = 1;
  bool standardize = true;            // elastic-net column scaling
  bool balance_standardized = true;   // imbalance measured on sd-scaled covariates
  bool ds_two_lasso = false;          // double selection without the treated-arm lasso
  bool df_correction = true;          // residual variances scaled by n / (n - df)
  double solver_tol = 1e-7;
  int solver_max_iter = 100000;

  // Test hooks.
  bool force_uniform_weights = false;
  bool force_zero_beta = false;
  Vector propensity_override;  // length n; replaces the fitted propensity model

  void validate() const;
};

struct EstimateReport {
  std::string method;
  double tau_hat = 0.0;
  double mu_c_hat = 0.0;
  double mu_t_hat = 0.0;
  double var_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;

  // Weights over control rows (input order) and the control outcome model
  // that produced mu_c_hat, when the method has them.
  std::vector<Index> control_rows;
  Vector control_weights;
  Vector beta_c;
  double intercept_c = 0.0;
};

// Normal quantile z with P(|Z| <= z) = level.
double normal_two_sided_quantile(double level);

struct VarianceParts {
  double var_hat = 0.0;
  double V_c = 0.0;
  double V_t = 0.0;
};

// V_c = sum gamma_i^2 r_i^2 over controls, V_t = n_t^-2 sum r_i^2 over treated.
VarianceParts variance_att(const Vector& residuals_c, const Vector& gamma, const Vector& residuals_t);

// Scales each arm's part by n / max(1, n - df), where df counts the fitted
// parameters (support plus intercept) behind that arm's residuals.
VarianceParts df_corrected(VarianceParts v, Index n_c, double df_c, Index n_t, double df_t);

// Shared per-dataset state: the arm split and lazily computed model fits, so
// several estimators on one dataset reuse one outcome fit per arm and one
// propensity fit. Not thread-safe; use one context per thread.
class EstimationContext {
 public:
  EstimationContext(const Dataset& data, EstimatorConfig cfg = {});

  const Dataset& data() const { return data_; }
  const EstimatorConfig& config() const { return cfg_; }
  const ArmSplit& arms() const { return arms_; }
  const Vector& xbar_t() const { return xbar_t_; }
  const Vector& xbar() const { return xbar_; }

  const LinearFit& control_fit();
  const LinearFit& treated_fit();
  // Fitted propensities for all n units, before trimming.
  const Vector& propensity();

  // Covariates (rows of `X`) and targets in the scale used for balancing.
  Matrix balance_scale(const Matrix& X) const;
  Vector balance_scale(const Vector& x) const;

  EstimateReport run(Method m);

 private:
  const Dataset& data_;
  EstimatorConfig cfg_;
  ArmSplit arms_;
  Vector xbar_t_, xbar_;
  Vector col_scale_;
  std::optional<LinearFit> control_fit_, treated_fit_;
  std::optional<Vector> propensity_;
};

EstimateReport estimate(const Dataset& data, Method m, const EstimatorConfig& cfg = {});

EstimateReport arb_att(EstimationContext& ctx);
EstimateReport arb_ate(EstimationContext& ctx);
EstimateReport naive(EstimationContext& ctx);
EstimateReport enet_only(EstimationContext& ctx);
EstimateReport balance_only(EstimationContext& ctx);
EstimateReport ipw(EstimationContext& ctx);
EstimateReport aipw(EstimationContext& ctx);
EstimateReport weighted_enet(EstimationContext& ctx);
EstimateReport tmle_style(EstimationContext& ctx);
EstimateReport double_selection_ols(EstimationContext& ctx);

// Elastic net chosen by cross-validation with the lambda-1se rule; falls back
// to an intercept-only fit when the arm is too small to cross-validate.
LinearFit fit_outcome_model(const Matrix& X, const Vector& y, Family family, double alpha,
                            const EstimatorConfig& cfg, const Vector& weights = Vector());

}  // namespace resbal
