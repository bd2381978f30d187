#include <doctest.h>

#include <cmath>

#include "resbal/errors.hpp"
#include "resbal/simulations.hpp"

using namespace resbal;

TEST_CASE("coefficient patterns have the requested norm and shape") {
  for (BetaKind k : {BetaKind::Dense, BetaKind::Harmonic, BetaKind::ModeratelySparse, BetaKind::VerySparse,
                     BetaKind::InverseSquare, BetaKind::Inverse}) {
    const Vector b = make_beta({k, 2.5}, 200);
    CHECK(b.norm() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(parse_beta_kind(to_string(k)) == k);
  }
  const Vector vs = make_beta({BetaKind::VerySparse, 1.0}, 50);
  CHECK((vs.head(10).array() == vs(0)).all());
  CHECK(vs.tail(40).isZero());
  const Vector ms = make_beta({BetaKind::ModeratelySparse, 1.0}, 200);
  CHECK(ms(0) == doctest::Approx(10 * ms(10)));
  CHECK(ms(99) == ms(10));
  CHECK(ms(100) == 0.0);
  const Vector d = make_beta({BetaKind::Dense, 1.0}, 100);
  CHECK(d(3) / d(0) == doctest::Approx(0.5));
  const Vector h = make_beta({BetaKind::Harmonic, 1.0}, 100);
  CHECK(h(0) / h(1) == doctest::Approx(11.0 / 10.0));
  CHECK_THROWS_AS(make_beta({BetaKind::ModeratelySparse, 1.0}, 50), UsageError);
}

TEST_CASE("index shift permutes the pattern") {
  const Index p = 100;
  const Vector plain = make_beta({BetaKind::VerySparse, 1.0}, p);
  const Vector shifted = make_beta({BetaKind::VerySparse, 1.0}, p, true);
  CHECK(shifted.norm() == doctest::Approx(1.0));
  for (Index j = 1; j <= p; ++j) CHECK(shifted(j - 1) == plain((23 * (j - 1)) % p));
}

TEST_CASE("draws are deterministic in seed and replication") {
  for (DesignKind k : {DesignKind::TwoCluster, DesignKind::ManyCluster, DesignKind::SparseTwoStage,
                       DesignKind::ModeratelySparseTwoStage, DesignKind::Misspecified}) {
    SimulationDesign d = default_design(k);
    d.n = 120;
    d.p = 150;
    d.seed = 5;
    CHECK(parse_design_kind(to_string(k)) == k);
    const SimDraw a = draw(d, 3), b = draw(d, 3), c = draw(d, 4);
    CHECK(a.data.X() == b.data.X());
    CHECK(a.data.Y() == b.data.Y());
    CHECK(a.data.W() == b.data.W());
    CHECK(a.tau_true == b.tau_true);
    CHECK(a.data.Y() != c.data.Y());
    CHECK(a.data.n() == 120);
    CHECK(a.data.p() == 150);
  }
}

TEST_CASE("two-cluster membership follows the design") {
  SimulationDesign d = default_design(DesignKind::TwoCluster);
  d.n = 4000;
  d.p = 20;
  const SimDraw s = draw(d, 0);
  const Vector& c = s.oracle_info.at("cluster");
  double treated = 0, treated_origin = 0, control = 0, control_origin = 0;
  for (Index i = 0; i < d.n; ++i) {
    if (s.data.treated(i)) {
      ++treated;
      treated_origin += c(i) == 0.0;
    } else {
      ++control;
      control_origin += c(i) == 0.0;
    }
  }
  CHECK(std::abs(treated / d.n - 0.5) < 0.03);
  CHECK(std::abs(treated_origin / treated - 0.2) < 0.03);
  CHECK(std::abs(control_origin / control - 0.8) < 0.03);
  CHECK(s.tau_true == 1.0);
  // Sparse shift: 40/sqrt(n) on coordinates 1, 11, 21, ...
  const Vector mean_shift = s.data.X().colwise().mean().transpose();
  CHECK(mean_shift(0) > 0.2);
  CHECK(std::abs(mean_shift(1)) < 0.1);
}

TEST_CASE("many-cluster propensities are eta or 1 - eta") {
  SimulationDesign d = default_design(DesignKind::ManyCluster);
  d.n = 200;
  d.p = 30;
  d.eta = 0.1;
  const SimDraw s = draw(d, 1);
  const Vector& e = s.oracle_info.at("propensity");
  for (Index i = 0; i < d.n; ++i) CHECK((e(i) == 0.1 || e(i) == 0.9));
}

TEST_CASE("misspecified effect function and population estimand") {
  CHECK(misspecified_theta(0.0) == doctest::Approx(std::log1p(std::exp(-2.0)) / 0.915).epsilon(1e-15));
  CHECK(misspecified_theta(-30.0) == doctest::Approx((58.0 + std::log1p(std::exp(-58.0))) / 0.915));
  // Independent composite Simpson rule for E[theta | W = 1].
  const int m = 40000;
  const double a = -12.0, b = 12.0, h = (b - a) / m;
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double x = a + k * h;
    const double wgt = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double t = std::log(1.0 + std::exp(-2.0 - 2.0 * x)) / 0.915;
    const double prop = 1.0 - std::exp(-t);
    const double dens = std::exp(-0.5 * x * x);
    num += wgt * t * prop * dens;
    den += wgt * prop * dens;
  }
  CHECK(misspecified_population_att() == doctest::Approx(num / den).epsilon(1e-10));
}

TEST_CASE("misspecified draws record the treated-sample effect") {
  SimulationDesign d = default_design(DesignKind::Misspecified);
  d.n = 300;
  d.p = 20;
  const SimDraw s = draw(d, 2);
  const Vector& theta = s.oracle_info.at("theta");
  double sum = 0;
  for (Index i = 0; i < d.n; ++i)
    if (s.data.treated(i)) sum += theta(i);
  CHECK(s.tau_true == doctest::Approx(sum / s.data.n_treated()).epsilon(1e-14));
  CHECK(s.tau_population == doctest::Approx(misspecified_population_att()));
}

TEST_CASE("design validation and labels") {
  SimulationDesign d = default_design(DesignKind::ManyCluster);
  d.eta = 0.0;
  CHECK_THROWS_AS(d.validate(), UsageError);
  d = default_design(DesignKind::SparseTwoStage);
  d.rho = 1.0;
  CHECK_THROWS_AS(d.validate(), UsageError);
  d = default_design(DesignKind::TwoCluster);
  d.n = 300;
  d.p = 800;
  CHECK(d.label() == "two_cluster(delta=sparse,beta=very_sparse,n=300,p=800)");
  CHECK_THROWS_AS(parse_design_kind("three_cluster"), UsageError);
}
