#include "resbal/estimators.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "resbal/errors.hpp"

namespace resbal {

namespace {

const std::vector<std::pair<Method, const char*>>& method_table() {
  static const std::vector<std::pair<Method, const char*>> table = {
      {Method::Arb, "arb"},           {Method::ArbAte, "arb-ate"},       {Method::Naive, "naive"},
      {Method::EnetOnly, "enet"},     {Method::BalanceOnly, "balance"},  {Method::Ipw, "ipw"},
      {Method::Aipw, "aipw"},         {Method::WeightedEnet, "wenet"},   {Method::Tmle, "tmle"},
      {Method::DoubleSelect, "double-select"},
  };
  return table;
}

}  // namespace

std::string method_name(Method m) {
  for (const auto& [method, name] : method_table())
    if (method == m) return name;
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (const auto& [method, label] : method_table())
    if (name == label) return method;
  throw UsageError("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& entry : method_table()) out.push_back(entry.first);
    return out;
  }();
  return methods;
}

void EstimatorConfig::validate() const {
  if (!(zeta > 0.0 && zeta < 1.0)) throw UsageError("zeta must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha <= 1.0) || !(prop_alpha > 0.0 && prop_alpha <= 1.0))
    throw UsageError("alpha must lie in (0, 1]");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  if (!(0.0 < trim_lo && trim_lo <= trim_hi && trim_hi < 1.0))
    throw UsageError("trim bounds must satisfy 0 < lo <= hi < 1");
  if (k_folds < 2) throw UsageError("k_folds must be at least 2");
}

double normal_two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

VarianceParts variance_att(const Vector& residuals_c, const Vector& gamma, const Vector& residuals_t) {
  if (residuals_c.size() != gamma.size()) throw UsageError("weights and control residuals differ in length");
  if (residuals_t.size() == 0) throw UsageError("no treated residuals");
  VarianceParts v;
  v.V_c = (gamma.array().square() * residuals_c.array().square()).sum();
  const double nt = static_cast<double>(residuals_t.size());
  v.V_t = residuals_t.squaredNorm() / (nt * nt);
  v.var_hat = v.V_c + v.V_t;
  return v;
}

VarianceParts df_corrected(VarianceParts v, Index n_c, double df_c, Index n_t, double df_t) {
  v.V_c *= static_cast<double>(n_c) / std::max(1.0, static_cast<double>(n_c) - df_c);
  v.V_t *= static_cast<double>(n_t) / std::max(1.0, static_cast<double>(n_t) - df_t);
  v.var_hat = v.V_c + v.V_t;
  return v;
}

LinearFit fit_outcome_model(const Matrix& X, const Vector& y, Family family, double alpha,
                            const EstimatorConfig& cfg, const Vector& weights) {
  const Index n = X.rows();
  if (n < 3) {
    LinearFit fit;
    fit.family = family;
    fit.beta = Vector::Zero(X.cols());
    fit.alpha = alpha;
    const double mean = weights.size() ? weights.dot(y) / weights.sum() : y.mean();
    if (family == Family::Gaussian) {
      fit.intercept = mean;
    } else {
      const double m = std::clamp(mean, 1e-5, 1 - 1e-5);
      fit.intercept = std::log(m / (1 - m));
    }
    fit.warnings.push_back("arm too small to cross-validate; intercept-only fit");
    return fit;
  }
  CvOptions opts;
  opts.k_folds = static_cast<int>(std::min<Index>(cfg.k_folds, n));
  opts.seed = cfg.cv_seed;
  opts.standardize = cfg.standardize;
  return fit_cv(X, y, family, alpha, opts, weights).fit;
}

EstimationContext::EstimationContext(const Dataset& data, EstimatorConfig cfg)
    : data_(data), cfg_(std::move(cfg)), arms_(split_by_arm(data)) {
  cfg_.validate();
  if (cfg_.propensity_override.size() && cfg_.propensity_override.size() != data.n())
    throw UsageError("propensity override must have one entry per unit");
  xbar_t_ = treated_mean_covariates(arms_.treated).xi;
  xbar_ = data.X().colwise().mean().transpose();
  col_scale_ = Vector::Ones(data.p());
  if (cfg_.balance_standardized && data.n() > 1) {
    const Matrix centered = data.X().rowwise() - xbar_.transpose();
    for (Index j = 0; j < data.p(); ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(data.n() - 1));
      if (sd > 0.0) col_scale_(j) = 1.0 / sd;
    }
  }
}

Matrix EstimationContext::balance_scale(const Matrix& X) const { return X * col_scale_.asDiagonal(); }

Vector EstimationContext::balance_scale(const Vector& x) const { return x.cwiseProduct(col_scale_); }

const LinearFit& EstimationContext::control_fit() {
  if (!control_fit_)
    control_fit_ = fit_outcome_model(arms_.control.X, arms_.control.Y, Family::Gaussian, cfg_.alpha, cfg_);
  return *control_fit_;
}

const LinearFit& EstimationContext::treated_fit() {
  if (!treated_fit_)
    treated_fit_ = fit_outcome_model(arms_.treated.X, arms_.treated.Y, Family::Gaussian, cfg_.alpha, cfg_);
  return *treated_fit_;
}

const Vector& EstimationContext::propensity() {
  if (!propensity_) {
    if (cfg_.propensity_override.size()) {
      propensity_ = cfg_.propensity_override;
    } else {
      const LinearFit fit = fit_outcome_model(data_.X(), data_.W(), Family::Binomial, cfg_.prop_alpha, cfg_);
      propensity_ = predict(fit, data_.X());
    }
  }
  return *propensity_;
}

namespace {

Vector residuals(const Matrix& X, const Vector& y, const LinearFit& fit) {
  return (y - X * fit.beta).array() - fit.intercept;
}

LinearFit zero_fit(const Vector& y, Index p) {
  LinearFit fit;
  fit.beta = Vector::Zero(p);
  fit.intercept = y.mean();
  return fit;
}

void finalize(EstimateReport& r, const VarianceParts& v, double level) {
  r.var_hat = std::max(0.0, v.var_hat);
  r.level = level;
  const double half = normal_two_sided_quantile(level) * std::sqrt(r.var_hat);
  r.ci_lo = r.tau_hat - half;
  r.ci_hi = r.tau_hat + half;
  r.diagnostics["V_c"] = v.V_c;
  r.diagnostics["V_t"] = v.V_t;
}

VarianceParts arm_variance(const EstimationContext& ctx, const VarianceParts& v, double df_c, double df_t) {
  if (!ctx.config().df_correction) return v;
  return df_corrected(v, ctx.arms().control.size(), df_c, ctx.arms().treated.size(), df_t);
}

void note_fit(EstimateReport& r, const std::string& tag, const LinearFit& fit) {
  r.diagnostics["support_" + tag] = static_cast<double>(fit.support.size());
  r.diagnostics["lambda_" + tag] = fit.lambda_used;
  for (const auto& w : fit.warnings) r.warnings.push_back(tag + " model: " + w);
}

void note_weights(EstimateReport& r, const BalanceWeights& w, const Matrix& X_raw, const Vector& xi_raw,
                  const std::string& suffix = "") {
  r.diagnostics["sup_imbalance" + suffix] = w.sup_imbalance;
  r.diagnostics["sup_imbalance_raw" + suffix] = (xi_raw - X_raw.transpose() * w.gamma).cwiseAbs().maxCoeff();
  r.diagnostics["gamma_sq_norm" + suffix] = w.gamma.squaredNorm();
  r.diagnostics["solver_iterations" + suffix] = w.iterations;
  if (w.status != SolveStatus::Optimal)
    r.warnings.push_back("weight solver status " + to_string(w.status));
}

BalanceWeights uniform(Index n) {
  BalanceWeights w;
  w.gamma = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return w;
}

// Lagrange-form weights on the balancing scale, or uniform under the hook.
BalanceWeights lagrange_weights(EstimationContext& ctx, const Matrix& X, const Vector& xi) {
  BalanceWeights w;
  if (ctx.config().force_uniform_weights) {
    w = uniform(X.rows());
  } else {
    BalanceProblem prob;
    prob.Xc = ctx.balance_scale(X);
    prob.xi = ctx.balance_scale(xi);
    prob.form = BalanceForm::Lagrange;
    prob.zeta = ctx.config().zeta;
    prob.solver_tol = ctx.config().solver_tol;
    prob.max_iter = ctx.config().solver_max_iter;
    w = solve_lagrange(prob);
  }
  fill_diagnostics(ctx.balance_scale(X), ctx.balance_scale(xi), w);
  return w;
}

Vector control_propensity(EstimationContext& ctx) {
  const Vector& e = ctx.propensity();
  const auto& rows = ctx.arms().control.indices;
  Vector out(static_cast<Index>(rows.size()));
  for (Index k = 0; k < out.size(); ++k) out(k) = e(rows[static_cast<std::size_t>(k)]);
  return out;
}

BalanceWeights odds_weights(EstimationContext& ctx) {
  const auto& cfg = ctx.config();
  BalanceWeights w = ipw_weights(control_propensity(ctx), cfg.trim_lo, cfg.trim_hi);
  fill_diagnostics(ctx.balance_scale(ctx.arms().control.X), ctx.balance_scale(ctx.xbar_t()), w);
  return w;
}

// Regression adjustment plus weighted control residuals:
// mu_c = xbar_t . beta + sum gamma_i (Y_i - X_i . beta).
EstimateReport residual_balance(EstimationContext& ctx, const std::string& method, const LinearFit& fit_c,
                                const BalanceWeights& w) {
  const auto& ctl = ctx.arms().control;
  const auto& tr = ctx.arms().treated;
  EstimateReport r;
  r.method = method;
  Vector gamma = w.gamma / w.gamma.sum();
  r.mu_c_hat = ctx.xbar_t().dot(fit_c.beta) + gamma.dot(ctl.Y - ctl.X * fit_c.beta);
  r.mu_t_hat = tr.Y.mean();
  r.tau_hat = r.mu_t_hat - r.mu_c_hat;

  const Vector rc = residuals(ctl.X, ctl.Y, fit_c);
  Vector rt;
  double df_t = 1.0;
  if (ctx.config().force_zero_beta) {
    rt = tr.Y.array() - r.mu_t_hat;
  } else {
    const LinearFit& fit_t = ctx.treated_fit();
    rt = residuals(tr.X, tr.Y, fit_t);
    df_t += static_cast<double>(fit_t.support.size());
    note_fit(r, "t", fit_t);
  }
  finalize(r, arm_variance(ctx, variance_att(rc, gamma, rt), 1.0 + static_cast<double>(fit_c.support.size()), df_t),
           ctx.config().level);
  note_fit(r, "c", fit_c);
  note_weights(r, w, ctl.X, ctx.xbar_t());
  r.control_rows = ctl.indices;
  r.control_weights = std::move(gamma);
  r.beta_c = fit_c.beta;
  r.intercept_c = fit_c.intercept;
  return r;
}

// mu_c = sum gamma_i Y_i; the variance treats both arms as intercept-only fits.
EstimateReport weighting_only(EstimationContext& ctx, const std::string& method, const BalanceWeights& w) {
  const auto& ctl = ctx.arms().control;
  const auto& tr = ctx.arms().treated;
  EstimateReport r;
  r.method = method;
  Vector gamma = w.gamma / w.gamma.sum();
  r.mu_c_hat = gamma.dot(ctl.Y);
  r.mu_t_hat = tr.Y.mean();
  r.tau_hat = r.mu_t_hat - r.mu_c_hat;
  const Vector rc = ctl.Y.array() - r.mu_c_hat;
  const Vector rt = tr.Y.array() - r.mu_t_hat;
  finalize(r, arm_variance(ctx, variance_att(rc, gamma, rt), 1.0, 1.0), ctx.config().level);
  note_weights(r, w, ctl.X, ctx.xbar_t());
  r.control_rows = ctl.indices;
  r.control_weights = std::move(gamma);
  r.beta_c = Vector::Zero(ctx.data().p());
  r.intercept_c = r.mu_c_hat;
  return r;
}

const LinearFit& control_model(EstimationContext& ctx, LinearFit& storage) {
  if (!ctx.config().force_zero_beta) return ctx.control_fit();
  storage = zero_fit(ctx.arms().control.Y, ctx.data().p());
  return storage;
}

}  // namespace

EstimateReport arb_att(EstimationContext& ctx) {
  LinearFit storage;
  const LinearFit& fit_c = control_model(ctx, storage);
  const BalanceWeights w = lagrange_weights(ctx, ctx.arms().control.X, ctx.xbar_t());
  EstimateReport r = residual_balance(ctx, "arb", fit_c, w);
  r.diagnostics["solver_polished"] = w.polished ? 1.0 : 0.0;
  r.diagnostics["duality_gap"] = w.duality_gap;
  return r;
}

EstimateReport arb_ate(EstimationContext& ctx) {
  const auto& ctl = ctx.arms().control;
  const auto& tr = ctx.arms().treated;
  LinearFit storage_c, storage_t;
  const LinearFit& fit_c = control_model(ctx, storage_c);
  const LinearFit& fit_t = ctx.config().force_zero_beta ? (storage_t = zero_fit(tr.Y, ctx.data().p()))
                                                        : ctx.treated_fit();
  const BalanceWeights wc = lagrange_weights(ctx, ctl.X, ctx.xbar());
  const BalanceWeights wt = lagrange_weights(ctx, tr.X, ctx.xbar());
  const Vector gc = wc.gamma / wc.gamma.sum();
  const Vector gt = wt.gamma / wt.gamma.sum();

  EstimateReport r;
  r.method = "arb-ate";
  r.mu_c_hat = ctx.xbar().dot(fit_c.beta) + gc.dot(ctl.Y - ctl.X * fit_c.beta);
  r.mu_t_hat = ctx.xbar().dot(fit_t.beta) + gt.dot(tr.Y - tr.X * fit_t.beta);
  r.tau_hat = r.mu_t_hat - r.mu_c_hat;
  const Vector rc = residuals(ctl.X, ctl.Y, fit_c);
  const Vector rt = residuals(tr.X, tr.Y, fit_t);
  VarianceParts v;
  v.V_c = (gc.array().square() * rc.array().square()).sum();
  v.V_t = (gt.array().square() * rt.array().square()).sum();
  v.var_hat = v.V_c + v.V_t;
  finalize(r,
           arm_variance(ctx, v, 1.0 + static_cast<double>(fit_c.support.size()),
                        1.0 + static_cast<double>(fit_t.support.size())),
           ctx.config().level);
  note_fit(r, "c", fit_c);
  note_fit(r, "t", fit_t);
  note_weights(r, wc, ctl.X, ctx.xbar(), "_c");
  note_weights(r, wt, tr.X, ctx.xbar(), "_t");
  r.control_rows = ctl.indices;
  r.control_weights = gc;
  r.beta_c = fit_c.beta;
  r.intercept_c = fit_c.intercept;
  return r;
}

EstimateReport naive(EstimationContext& ctx) {
  const auto& ctl = ctx.arms().control;
  const auto& tr = ctx.arms().treated;
  EstimateReport r;
  r.method = "naive";
  r.mu_t_hat = tr.Y.mean();
  r.mu_c_hat = ctl.Y.mean();
  r.tau_hat = r.mu_t_hat - r.mu_c_hat;
  const Vector gamma = Vector::Constant(ctl.size(), 1.0 / static_cast<double>(ctl.size()));
  const VarianceParts v = variance_att(ctl.Y.array() - r.mu_c_hat, gamma, tr.Y.array() - r.mu_t_hat);
  finalize(r, arm_variance(ctx, v, 1.0, 1.0), ctx.config().level);
  r.control_rows = ctl.indices;
  r.control_weights = gamma;
  r.beta_c = Vector::Zero(ctx.data().p());
  r.intercept_c = r.mu_c_hat;
  return r;
}

EstimateReport enet_only(EstimationContext& ctx) {
  LinearFit storage;
  const LinearFit& fit_c = control_model(ctx, storage);
  BalanceWeights w = uniform(ctx.arms().control.size());
  fill_diagnostics(ctx.balance_scale(ctx.arms().control.X), ctx.balance_scale(ctx.xbar_t()), w);
  return residual_balance(ctx, "enet", fit_c, w);
}

EstimateReport balance_only(EstimationContext& ctx) {
  const auto& ctl = ctx.arms().control;
  BalanceWeights w;
  if (ctx.config().force_uniform_weights) {
    w = uniform(ctl.size());
  } else {
    BalanceProblem prob;
    prob.Xc = ctx.balance_scale(ctl.X);
    prob.xi = ctx.balance_scale(ctx.xbar_t());
    prob.form = BalanceForm::Constraint;
    prob.solver_tol = ctx.config().solver_tol;
    prob.max_iter = ctx.config().solver_max_iter;
    w = solve_stable_auto(prob);
  }
  fill_diagnostics(ctx.balance_scale(ctl.X), ctx.balance_scale(ctx.xbar_t()), w);
  EstimateReport r = weighting_only(ctx, "balance", w);
  r.diagnostics["stable_threshold"] = w.radius;
  return r;
}

EstimateReport ipw(EstimationContext& ctx) { return weighting_only(ctx, "ipw", odds_weights(ctx)); }

EstimateReport aipw(EstimationContext& ctx) {
  LinearFit storage;
  const LinearFit& fit_c = control_model(ctx, storage);
  return residual_balance(ctx, "aipw", fit_c, odds_weights(ctx));
}

EstimateReport weighted_enet(EstimationContext& ctx) {
  const auto& ctl = ctx.arms().control;
  const BalanceWeights w = odds_weights(ctx);
  LinearFit fit_c;
  if (ctx.config().force_zero_beta) {
    fit_c = zero_fit(ctl.Y, ctx.data().p());
  } else if ((w.gamma.array() == w.gamma(0)).all()) {
    fit_c = ctx.control_fit();
  } else {
    const Vector sample_w = w.gamma * (static_cast<double>(ctl.size()) / w.gamma.sum());
    fit_c = fit_outcome_model(ctl.X, ctl.Y, Family::Gaussian, ctx.config().alpha, ctx.config(), sample_w);
  }
  return residual_balance(ctx, "wenet", fit_c, w);
}

EstimateReport tmle_style(EstimationContext& ctx) {
  const auto& cfg = ctx.config();
  const auto& ctl = ctx.arms().control;
  const auto& tr = ctx.arms().treated;
  LinearFit storage;
  const LinearFit& fit_c = control_model(ctx, storage);
  const BalanceWeights w = odds_weights(ctx);
  const Vector gamma = w.gamma / w.gamma.sum();

  auto clever = [&](double e) {
    const double c = std::clamp(e, cfg.trim_lo, cfg.trim_hi);
    return c / (1.0 - c);
  };
  const Vector& e = ctx.propensity();
  Vector h_c(ctl.size()), h_t(tr.size());
  for (Index k = 0; k < ctl.size(); ++k) h_c(k) = clever(e(ctl.indices[static_cast<std::size_t>(k)]));
  for (Index k = 0; k < tr.size(); ++k) h_t(k) = clever(e(tr.indices[static_cast<std::size_t>(k)]));

  const Vector rc = residuals(ctl.X, ctl.Y, fit_c);
  const double epsilon = h_c.dot(rc) / h_c.squaredNorm();
  const Vector pred_t = (tr.X * fit_c.beta).array() + fit_c.intercept + epsilon * h_t.array();
  const Vector rc_fluct = rc - epsilon * h_c;

  EstimateReport r;
  r.method = "tmle";
  r.mu_c_hat = pred_t.mean() + gamma.dot(rc_fluct);
  r.mu_t_hat = tr.Y.mean();
  r.tau_hat = r.mu_t_hat - r.mu_c_hat;
  Vector rt;
  double df_t = 1.0;
  if (cfg.force_zero_beta) {
    rt = tr.Y.array() - r.mu_t_hat;
  } else {
    const LinearFit& fit_t = ctx.treated_fit();
    rt = residuals(tr.X, tr.Y, fit_t);
    df_t += static_cast<double>(fit_t.support.size());
    note_fit(r, "t", fit_t);
  }
  // The fluctuation adds one parameter to the control fit.
  finalize(r, arm_variance(ctx, variance_att(rc_fluct, gamma, rt), 2.0 + static_cast<double>(fit_c.support.size()), df_t),
           cfg.level);
  note_fit(r, "c", fit_c);
  note_weights(r, w, ctl.X, ctx.xbar_t());
  r.diagnostics["epsilon"] = epsilon;
  r.control_rows = ctl.indices;
  r.control_weights = gamma;
  r.beta_c = fit_c.beta;
  r.intercept_c = fit_c.intercept;
  return r;
}

EstimateReport double_selection_ols(EstimationContext& ctx) {
  const auto& cfg = ctx.config();
  const Dataset& data = ctx.data();
  const auto& ctl = ctx.arms().control;
  const auto& tr = ctx.arms().treated;

  std::vector<bool> selected(static_cast<std::size_t>(data.p()), false);
  auto add = [&](const LinearFit& fit) {
    for (Index j : fit.support) selected[static_cast<std::size_t>(j)] = true;
  };
  EstimateReport r;
  r.method = "double-select";
  const LinearFit fc = fit_outcome_model(ctl.X, ctl.Y, Family::Gaussian, 1.0, cfg);
  add(fc);
  r.diagnostics["support_c"] = static_cast<double>(fc.support.size());
  if (!cfg.ds_two_lasso) {
    const LinearFit ft = fit_outcome_model(tr.X, tr.Y, Family::Gaussian, 1.0, cfg);
    add(ft);
    r.diagnostics["support_t"] = static_cast<double>(ft.support.size());
  }
  const LinearFit fw = fit_outcome_model(data.X(), data.W(), Family::Binomial, 1.0, cfg);
  add(fw);
  r.diagnostics["support_w"] = static_cast<double>(fw.support.size());

  std::vector<Index> S;
  for (Index j = 0; j < data.p(); ++j)
    if (selected[static_cast<std::size_t>(j)]) S.push_back(j);
  const Index n = data.n();
  const Index k = static_cast<Index>(S.size()) + 2;
  r.diagnostics["support_union"] = static_cast<double>(S.size());
  if (k >= n)
    throw NumericError("double selection: " + std::to_string(S.size()) +
                       " selected covariates leave no residual degrees of freedom; increase the lasso penalty");
  Matrix Z(n, k);
  Z.col(0).setOnes();
  Z.col(1) = data.W();
  for (Index c = 0; c < static_cast<Index>(S.size()); ++c) Z.col(c + 2) = data.X().col(S[static_cast<std::size_t>(c)]);
  Eigen::ColPivHouseholderQR<Matrix> qr(Z);
  if (qr.rank() < k)
    throw NumericError("double selection: regression design [1, W, X_S] is rank deficient; increase the lasso penalty");
  const Vector coef = qr.solve(data.Y());
  const Vector e = data.Y() - Z * coef;
  const Matrix bread = (Z.transpose() * Z).ldlt().solve(Matrix::Identity(k, k));
  const Matrix meat = Z.transpose() * e.array().square().matrix().asDiagonal() * Z;
  const Matrix V = bread * meat * bread * (static_cast<double>(n) / static_cast<double>(n - k));

  r.tau_hat = coef(1);
  r.mu_t_hat = tr.Y.mean();
  r.mu_c_hat = r.mu_t_hat - r.tau_hat;
  VarianceParts v;
  v.var_hat = V(1, 1);
  finalize(r, v, cfg.level);
  r.diagnostics.erase("V_c");
  r.diagnostics.erase("V_t");
  return r;
}

EstimateReport EstimationContext::run(Method m) {
  switch (m) {
    case Method::Arb: return arb_att(*this);
    case Method::ArbAte: return arb_ate(*this);
    case Method::Naive: return naive(*this);
    case Method::EnetOnly: return enet_only(*this);
    case Method::BalanceOnly: return balance_only(*this);
    case Method::Ipw: return ipw(*this);
    case Method::Aipw: return aipw(*this);
    case Method::WeightedEnet: return weighted_enet(*this);
    case Method::Tmle: return tmle_style(*this);
    case Method::DoubleSelect: return double_selection_ols(*this);
  }
  throw UsageError("unknown method");
}

EstimateReport estimate(const Dataset& data, Method m, const EstimatorConfig& cfg) {
  EstimationContext ctx(data, cfg);
  return ctx.run(m);
}

}  // namespace resbal
