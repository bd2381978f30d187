#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "resbal/capped_simplex.hpp"
#include "resbal/errors.hpp"
#include "resbal/rng.hpp"

using namespace resbal;

namespace {

Vector random_vector(Rng& rng, Index n, double scale) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("projection is feasible and satisfies the variational inequality") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(30));
    const double lo = trial % 3 == 0 ? -0.2 : 0.0;
    const double hi = std::max(1.0 / static_cast<double>(n) + 0.05, rng.uniform());
    const Vector v = random_vector(rng, n, 1.0 + 3 * rng.uniform());
    const Vector x = project_capped_simplex(v, lo, hi);
    CHECK(std::abs(x.sum() - 1.0) < 1e-12);
    CHECK(x.minCoeff() >= lo - 1e-15);
    CHECK(x.maxCoeff() <= hi + 1e-15);
    // (v - x).(y - x) <= 0 for feasible y; test against random feasible points.
    for (int k = 0; k < 5; ++k) {
      const Vector y = project_capped_simplex(random_vector(rng, n, 2.0), lo, hi);
      CHECK((v - x).dot(y - x) <= 1e-10);
    }
  }
}

TEST_CASE("projection of a feasible point is the identity") {
  Vector v(4);
  v << 0.1, 0.2, 0.3, 0.4;
  CHECK((project_capped_simplex(v, 0.0, 0.5) - v).norm() < 1e-15);
}

TEST_CASE("projection matches a barrier QP oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.uniform_int(8));
    const double hi = 0.5;
    const Vector v = random_vector(rng, n, 1.0);
    const Vector x = project_capped_simplex(v, 0.0, hi);
    Matrix G(2 * n, n);
    G << -Matrix::Identity(n, n), Matrix::Identity(n, n);
    Vector h(2 * n);
    h << Vector::Zero(n), Vector::Constant(n, hi);
    const auto r = oracle::barrier_qp(Matrix::Identity(n, n), -v, G, h, Matrix::Ones(1, n), Vector::Ones(1),
                                      Vector::Constant(n, 1.0 / static_cast<double>(n)));
    CHECK((r.z - x).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("infeasible bounds are rejected") {
  CHECK_THROWS(project_capped_simplex(Vector::Zero(3), 0.0, 0.2));
}

TEST_CASE("epigraph projection") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(10));
    const Vector v = random_vector(rng, n, 1.0);
    const double s = rng.normal();
    Vector z;
    double t = 0.0;
    project_linf_epigraph(v, s, z, t);
    CHECK(z.lpNorm<Eigen::Infinity>() <= t + 1e-12);
    // Optimality: compare with nearby feasible candidates.
    const double d0 = (z - v).squaredNorm() + (t - s) * (t - s);
    for (int k = 0; k < 20; ++k) {
      Vector z2 = z + 0.05 * random_vector(rng, n, 1.0);
      const double t2 = std::max(t + 0.05 * rng.normal(), z2.lpNorm<Eigen::Infinity>());
      CHECK((z2 - v).squaredNorm() + (t2 - s) * (t2 - s) >= d0 - 1e-12);
    }
  }
  Vector z;
  double t = 0.0;
  project_linf_epigraph(Vector::Constant(2, 0.5), 1.0, z, t);
  CHECK(t == 1.0);
  CHECK(z(0) == 0.5);
}
