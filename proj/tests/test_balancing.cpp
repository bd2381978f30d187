#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "resbal/balancing.hpp"
#include "resbal/errors.hpp"
#include "resbal/rng.hpp"

using namespace resbal;

namespace {

struct Instance {
  Matrix Xc;
  Vector xi;
};

Instance random_instance(Rng& rng, Index n, Index p, double shift) {
  Instance inst{Matrix(n, p), Vector(p)};
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) inst.Xc(i, j) = rng.normal();
  for (Index j = 0; j < p; ++j) inst.xi(j) = shift * rng.normal();
  return inst;
}

double sup_imbalance(const Instance& inst, const Vector& g) {
  return (inst.xi - inst.Xc.transpose() * g).cwiseAbs().maxCoeff();
}

void check_feasible(const Vector& g, double cap, double tol = 1e-7) {
  CHECK(std::abs(g.sum() - 1.0) <= tol);
  CHECK(g.minCoeff() >= -tol);
  CHECK(g.maxCoeff() <= cap + tol);
}

BalanceProblem make_problem(const Instance& inst) {
  BalanceProblem prob;
  prob.Xc = inst.Xc;
  prob.xi = inst.xi;
  return prob;
}

}  // namespace

TEST_CASE("lagrange weights match the epigraph QP oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.uniform_int(17));
    const Index p = 1 + static_cast<Index>(rng.uniform_int(5));
    const Instance inst = random_instance(rng, n, p, 0.7);
    BalanceProblem prob = make_problem(inst);
    prob.zeta = 0.1 + 0.8 * rng.uniform();
    const BalanceWeights w = solve_lagrange(prob);
    const auto ref = oracle::lagrange_oracle({inst.Xc, inst.xi, prob.cap()}, prob.zeta);
    const double s = sup_imbalance(inst, w.gamma);
    const double obj = (1 - prob.zeta) * w.gamma.squaredNorm() + prob.zeta * s * s;
    CHECK(std::abs(obj - ref.objective) <= 1e-4 * ref.objective);
    CHECK(std::abs(w.objective - obj) <= 1e-12 * std::max(1.0, obj));
    check_feasible(w.gamma, prob.cap());
    CHECK(w.status == SolveStatus::Optimal);
    CHECK(w.duality_gap <= 1e-5 * std::max(1.0, obj));
  }
}

TEST_CASE("constraint and stable weights match the oracle") {
  Rng rng(32);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.uniform_int(17));
    const Index p = 2 + static_cast<Index>(rng.uniform_int(4));
    const Instance inst = random_instance(rng, n, p, 0.7);
    BalanceProblem prob = make_problem(inst);
    const oracle::BalanceInstance oi{inst.Xc, inst.xi, prob.cap()};
    const double best = oracle::min_sup_imbalance(oi);
    const double radius = best + (0.2 + rng.uniform()) * (sup_imbalance(inst, Vector::Constant(n, 1.0 / n)) - best);
    if (!(radius > best + 1e-6)) continue;
    const auto ref = oracle::radius_oracle(oi, radius);
    REQUIRE(ref.feasible);

    prob.form = BalanceForm::Constraint;
    prob.K = radius / std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
    const BalanceWeights wc = solve_constraint(prob);
    CHECK(std::abs(wc.gamma.squaredNorm() - ref.objective) <= 1e-4 * ref.objective);
    CHECK(sup_imbalance(inst, wc.gamma) <= radius + 1e-7);
    check_feasible(wc.gamma, prob.cap());

    const BalanceWeights ws = solve_stable(make_problem(inst), radius);
    CHECK(std::abs(ws.gamma.squaredNorm() - ref.objective) <= 1e-4 * ref.objective);
    CHECK(sup_imbalance(inst, ws.gamma) <= radius + 1e-7);
    check_feasible(ws.gamma, prob.cap());
  }
}

TEST_CASE("infeasible thresholds are reported") {
  Rng rng(33);
  const Instance inst = random_instance(rng, 10, 4, 3.0);
  const BalanceProblem prob = make_problem(inst);
  const double best = oracle::min_sup_imbalance({inst.Xc, inst.xi, prob.cap()});
  REQUIRE(best > 0.1);
  CHECK(solve_stable(prob, 0.5 * best).status == SolveStatus::Infeasible);
}

TEST_CASE("stable auto sits just above the smallest feasible threshold") {
  Rng rng(34);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance inst = random_instance(rng, 15, 3, 1.0);
    const BalanceProblem prob = make_problem(inst);
    const double best = oracle::min_sup_imbalance({inst.Xc, inst.xi, prob.cap()});
    const BalanceWeights w = solve_stable_auto(prob);
    CHECK(w.status == SolveStatus::Optimal);
    CHECK(w.radius >= 1.05 * best - 1e-6);
    CHECK(w.radius <= 1.05 * best * (1 + 2e-3) + 1e-9);
    CHECK(sup_imbalance(inst, w.gamma) <= w.radius + 1e-7);
    check_feasible(w.gamma, prob.cap());
  }
}

TEST_CASE("an infinite threshold gives uniform weights") {
  Rng rng(35);
  const Instance inst = random_instance(rng, 12, 3, 1.0);
  const BalanceWeights w = solve_stable(make_problem(inst), std::numeric_limits<double>::infinity());
  CHECK((w.gamma.array() - 1.0 / 12).abs().maxCoeff() < 1e-12);
}

TEST_CASE("zeta trades norm for imbalance monotonically") {
  Rng rng(36);
  const Instance inst = random_instance(rng, 20, 5, 1.0);
  double prev_sup = std::numeric_limits<double>::infinity(), prev_norm = 0.0;
  for (double zeta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    BalanceProblem prob = make_problem(inst);
    prob.zeta = zeta;
    const BalanceWeights w = solve_lagrange(prob);
    CHECK(w.sup_imbalance <= prev_sup + 1e-6);
    CHECK(w.sq_norm >= prev_norm - 1e-6);
    prev_sup = w.sup_imbalance;
    prev_norm = w.sq_norm;
  }
}

TEST_CASE("weights are invariant to translating covariates and target together") {
  Rng rng(37);
  const Instance inst = random_instance(rng, 20, 4, 1.0);
  Instance moved = inst;
  const Vector c = Vector::LinSpaced(4, -5.0, 7.0);
  moved.Xc.rowwise() += c.transpose();
  moved.xi += c;
  BalanceProblem a = make_problem(inst), b = make_problem(moved);
  const Vector ga = solve_lagrange(a).gamma, gb = solve_lagrange(b).gamma;
  CHECK((ga - gb).lpNorm<Eigen::Infinity>() <= 10 * a.solver_tol);
}

TEST_CASE("entropy weights match a primal Newton oracle") {
  Rng rng(38);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.uniform_int(10));
    const Index p = 1 + static_cast<Index>(rng.uniform_int(4));
    Instance inst = random_instance(rng, n, p, 0.0);
    Vector mix(n);
    for (Index i = 0; i < n; ++i) mix(i) = 0.5 + rng.uniform();
    mix /= mix.sum();
    inst.xi = inst.Xc.transpose() * mix;
    const BalanceWeights w = solve_entropy(make_problem(inst));
    const Vector ref = oracle::entropy_oracle(inst.Xc, inst.xi);
    CHECK((w.gamma - ref).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(w.sup_imbalance < 1e-9);
  }
}

TEST_CASE("entropy balancing fails loudly outside the convex hull") {
  Matrix Xc(3, 1);
  Xc << 0, 1, 2;
  Vector xi(1);
  xi << 5;
  BalanceProblem prob;
  prob.Xc = Xc;
  prob.xi = xi;
  CHECK_THROWS_AS(solve_entropy(prob), NumericError);
}

TEST_CASE("ipw weights are normalized clamped odds") {
  Vector e(4);
  e << 0.01, 0.5, 0.75, 0.99;
  const BalanceWeights w = ipw_weights(e, 0.05, 0.95);
  Vector odds(4);
  odds << 0.05 / 0.95, 1.0, 3.0, 19.0;
  CHECK((w.gamma - odds / odds.sum()).norm() < 1e-15);
  CHECK_THROWS_AS(ipw_weights(e, 0.5, 0.4), UsageError);
}

TEST_CASE("problem validation") {
  BalanceProblem prob;
  prob.Xc = Matrix::Ones(4, 2);
  prob.xi = Vector::Zero(3);
  CHECK_THROWS_AS(prob.validate(), UsageError);
  prob.xi = Vector::Zero(2);
  prob.zeta = 1.0;
  CHECK_THROWS_AS(prob.validate(), UsageError);
  prob.zeta = 0.5;
  prob.box_upper = 0.1;
  CHECK_THROWS_AS(prob.validate(), UsageError);
  prob.box_upper = -1;
  CHECK(prob.cap() == doctest::Approx(std::pow(4.0, -2.0 / 3.0)));
  CHECK_NOTHROW(prob.validate());
}

TEST_CASE("box-only mode respects the bounds") {
  Rng rng(39);
  const Instance inst = random_instance(rng, 15, 3, 1.0);
  BalanceProblem prob = make_problem(inst);
  prob.simplex = false;
  const BalanceWeights w = solve_lagrange(prob);
  CHECK(w.gamma.cwiseAbs().maxCoeff() <= prob.cap() + 1e-7);
}
