#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "resbal/errors.hpp"
#include "resbal/estimators.hpp"
#include "resbal/rng.hpp"
#include "resbal/simulations.hpp"

using namespace resbal;

namespace {

Dataset fixture() { return load_csv(std::filesystem::path(RESBAL_TEST_DIR) / "fixtures" / "six_rows.csv"); }

struct Synthetic {
  Dataset data;
  Vector beta_c;
  Vector eps;  // control noise, in control-row order
};

// Y(0) = X beta_c + eps for controls; treated outcomes get an extra effect.
Synthetic synthetic(std::uint64_t seed, Index n, Index p) {
  Rng rng(seed);
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  Vector beta = Vector::Zero(p);
  for (Index j = 0; j < std::min<Index>(10, p); ++j) beta(j) = 1.0 / (1.0 + j);
  Vector W(n), Y(n);
  std::vector<double> eps;
  for (Index i = 0; i < n; ++i) {
    W(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-0.5 * X(i, 0)))) ? 1.0 : 0.0;
    const double e = rng.normal();
    Y(i) = X.row(i).dot(beta) + e + W(i) * (1.0 + 0.3 * X(i, 1));
    if (W(i) == 0.0) eps.push_back(e);
  }
  return {Dataset(X, W, Y), beta, Eigen::Map<Vector>(eps.data(), static_cast<Index>(eps.size()))};
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK(all_methods().size() == 10);
  CHECK_THROWS_AS(parse_method("lasso"), UsageError);
}

TEST_CASE("normal quantile") {
  CHECK(normal_two_sided_quantile(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_two_sided_quantile(0.9) == doctest::Approx(1.6448536269514722).epsilon(1e-14));
  CHECK_THROWS_AS(normal_two_sided_quantile(1.0), UsageError);
}

TEST_CASE("naive estimate on the fixture matches hand arithmetic") {
  const EstimateReport r = estimate(fixture(), Method::Naive);
  // Treated outcomes 3, 5, 4 and control outcomes 1, 2, 0.
  CHECK(r.tau_hat == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(r.var_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const double half = 1.959963984540054 * std::sqrt(2.0 / 3.0);
  CHECK(r.ci_lo == doctest::Approx(3.0 - half).epsilon(1e-12));
  CHECK(r.ci_hi == doctest::Approx(3.0 + half).epsilon(1e-12));
}

TEST_CASE("variance formula") {
  Vector rc(3), g(3), rt(2);
  rc << 1, -2, 0.5;
  g << 0.2, 0.3, 0.5;
  rt << 1, 3;
  const VarianceParts v = variance_att(rc, g, rt);
  CHECK(v.V_c == doctest::Approx(0.04 + 0.36 + 0.0625));
  CHECK(v.V_t == doctest::Approx(10.0 / 4.0));
  CHECK(v.var_hat == doctest::Approx(v.V_c + v.V_t));
  CHECK_THROWS_AS(variance_att(rc, Vector::Ones(2), rt), UsageError);

  const VarianceParts d = df_corrected(v, 10, 4.0, 2, 5.0);
  CHECK(d.V_c == doctest::Approx(v.V_c * 10.0 / 6.0));
  CHECK(d.V_t == doctest::Approx(v.V_t * 2.0));
  CHECK(d.var_hat == doctest::Approx(d.V_c + d.V_t));
}

TEST_CASE("residual variances carry the degrees-of-freedom factor") {
  const Synthetic s = synthetic(11, 120, 30);
  EstimatorConfig raw;
  raw.df_correction = false;
  EstimationContext with(s.data), without(s.data, raw);
  for (Method m : {Method::Arb, Method::EnetOnly, Method::Naive, Method::BalanceOnly}) {
    const EstimateReport a = with.run(m), b = without.run(m);
    CAPTURE(a.method);
    CHECK(a.tau_hat == b.tau_hat);
    const double df_c = 1.0 + (a.diagnostics.count("support_c") ? a.diagnostics.at("support_c") : 0.0);
    const double n_c = static_cast<double>(with.arms().control.size());
    CHECK(a.diagnostics.at("V_c") == doctest::Approx(b.diagnostics.at("V_c") * n_c / (n_c - df_c)).epsilon(1e-12));
    CHECK(a.var_hat > b.var_hat);
  }
}

TEST_CASE("error decomposition holds for residual-balancing estimators") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Synthetic s = synthetic(seed, 100, 60);
    EstimationContext ctx(s.data);
    const ArmView& c = ctx.arms().control;
    const double mu_c = ctx.xbar_t().dot(s.beta_c);
    for (Method m : {Method::Arb, Method::EnetOnly, Method::Aipw}) {
      const EstimateReport r = ctx.run(m);
      const Vector& g = r.control_weights;
      const double rhs = (ctx.xbar_t() - c.X.transpose() * g).dot(r.beta_c - s.beta_c) + g.dot(s.eps);
      const double lhs = r.mu_c_hat - mu_c;
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1e-3}));
      CHECK(std::abs(g.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("uniform weights and a zero outcome model reduce arb to the naive estimate") {
  const Synthetic s = synthetic(7, 80, 20);
  EstimatorConfig cfg;
  cfg.force_uniform_weights = true;
  cfg.force_zero_beta = true;
  const EstimateReport a = estimate(s.data, Method::Arb, cfg);
  const EstimateReport n = estimate(s.data, Method::Naive);
  CHECK(a.tau_hat == doctest::Approx(n.tau_hat).epsilon(1e-13));
  const ArmView c = split_by_arm(s.data).control;
  CHECK(a.mu_c_hat == doctest::Approx(oracle::compensated_mean(c.Y)).epsilon(1e-13));
}

TEST_CASE("shifting every outcome leaves tau unchanged; shifting treated outcomes moves it") {
  const Synthetic s = synthetic(8, 120, 40);
  const Dataset shifted = s.data.with_outcome(s.data.Y().array() + 3.0);
  const Dataset treated_shift = s.data.with_outcome(s.data.Y() + 2.0 * s.data.W());
  for (Method m : {Method::Arb, Method::EnetOnly, Method::Aipw, Method::Naive, Method::BalanceOnly, Method::Ipw}) {
    const double base = estimate(s.data, m).tau_hat;
    CHECK(estimate(shifted, m).tau_hat == doctest::Approx(base).epsilon(1e-7));
    CHECK(estimate(treated_shift, m).tau_hat == doctest::Approx(base + 2.0).epsilon(1e-7));
  }
}

TEST_CASE("every method runs and reports a consistent interval") {
  const Synthetic s = synthetic(9, 150, 30);
  EstimationContext ctx(s.data);
  for (Method m : all_methods()) {
    const EstimateReport r = ctx.run(m);
    CAPTURE(r.method);
    CHECK(r.method == method_name(m));
    CHECK(std::isfinite(r.tau_hat));
    CHECK(r.var_hat > 0.0);
    CHECK(r.ci_lo < r.tau_hat);
    CHECK(r.ci_hi > r.tau_hat);
    CHECK(r.ci_hi - r.ci_lo == doctest::Approx(2 * 1.959963984540054 * std::sqrt(r.var_hat)));
    CHECK(r.tau_hat == doctest::Approx(r.mu_t_hat - r.mu_c_hat));
    // Truth is about 1; every estimator should land in a wide band.
    CHECK(std::abs(r.tau_hat - 1.0) < 1.5);
  }
}

TEST_CASE("ipw uses normalized propensity odds") {
  const Synthetic s = synthetic(10, 60, 5);
  EstimatorConfig cfg;
  cfg.propensity_override = Vector::Constant(60, 0.3);
  for (Index i = 0; i < 10; ++i) cfg.propensity_override(i) = 0.6;
  const EstimateReport r = estimate(s.data, Method::Ipw, cfg);
  const ArmView c = split_by_arm(s.data).control;
  Vector odds(c.size());
  for (Index k = 0; k < c.size(); ++k) {
    const double e = cfg.propensity_override(c.indices[static_cast<std::size_t>(k)]);
    odds(k) = e / (1 - e);
  }
  odds /= odds.sum();
  CHECK(r.mu_c_hat == doctest::Approx(odds.dot(c.Y)).epsilon(1e-13));
}

TEST_CASE("double selection matches OLS with HC1 errors when every covariate is selected") {
  Rng rng(11);
  const Index n = 400, p = 3;
  Matrix X(n, p);
  Vector W(n), Y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) X(i, j) = rng.normal();
    W(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-(X(i, 0) + X(i, 1) + X(i, 2))))) ? 1.0 : 0.0;
    Y(i) = 2 * X(i, 0) - 2 * X(i, 1) + 2 * X(i, 2) + W(i) + rng.normal();
  }
  const Dataset d(X, W, Y);
  const EstimateReport r = estimate(d, Method::DoubleSelect);
  REQUIRE(r.diagnostics.at("support_union") == 3.0);
  Matrix Z(n, p + 2);
  Z << Vector::Ones(n), W, X;
  const Matrix ZtZ = Z.transpose() * Z;
  const Vector coef = ZtZ.llt().solve(Z.transpose() * Y);
  const Vector e = Y - Z * coef;
  const Matrix inv = ZtZ.inverse();
  Matrix meat = Matrix::Zero(p + 2, p + 2);
  for (Index i = 0; i < n; ++i) meat += e(i) * e(i) * Z.row(i).transpose() * Z.row(i);
  const double v = (inv * meat * inv)(1, 1) * n / static_cast<double>(n - p - 2);
  CHECK(r.tau_hat == doctest::Approx(coef(1)).epsilon(1e-10));
  CHECK(r.var_hat == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("arb-ate targets the full-sample mean") {
  const Synthetic s = synthetic(12, 200, 10);
  const EstimateReport r = estimate(s.data, Method::ArbAte);
  CHECK(std::isfinite(r.tau_hat));
  CHECK(r.diagnostics.count("sup_imbalance_c") == 1);
  CHECK(r.diagnostics.count("sup_imbalance_t") == 1);
}

TEST_CASE("configuration is validated") {
  EstimatorConfig cfg;
  cfg.zeta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.level = 1.5;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.trim_lo = 0.6;
  cfg.trim_hi = 0.4;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.propensity_override = Vector::Constant(3, 0.5);
  CHECK_THROWS_AS(estimate(fixture(), Method::Ipw, cfg), UsageError);
}

TEST_CASE("tiny arms fall back to intercept-only models") {
  const EstimateReport r = estimate(fixture(), Method::EnetOnly);
  CHECK(std::isfinite(r.tau_hat));
}
