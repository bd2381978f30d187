#include "resbal/simulations.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "resbal/errors.hpp"
#include "resbal/rng.hpp"

namespace resbal {

namespace {

template <class E>
struct NameTable {
  E value;
  const char* name;
};

constexpr NameTable<BetaKind> kBetaNames[] = {
    {BetaKind::Dense, "dense"},
    {BetaKind::Harmonic, "harmonic"},
    {BetaKind::ModeratelySparse, "moderately_sparse"},
    {BetaKind::VerySparse, "very_sparse"},
    {BetaKind::InverseSquare, "inverse_square"},
    {BetaKind::Inverse, "inverse"},
};

constexpr NameTable<DesignKind> kDesignNames[] = {
    {DesignKind::TwoCluster, "two_cluster"},
    {DesignKind::ManyCluster, "many_cluster"},
    {DesignKind::SparseTwoStage, "sparse_two_stage"},
    {DesignKind::ModeratelySparseTwoStage, "moderately_sparse_two_stage"},
    {DesignKind::Misspecified, "misspecified"},
};

constexpr NameTable<DeltaKind> kDeltaNames[] = {
    {DeltaKind::Dense, "dense"},
    {DeltaKind::Sparse, "sparse"},
};

template <class E, std::size_t N>
std::string lookup(const NameTable<E> (&table)[N], E value) {
  for (const auto& entry : table)
    if (entry.value == value) return entry.name;
  return "unknown";
}

template <class E, std::size_t N>
E lookup(const NameTable<E> (&table)[N], const std::string& name, const char* what) {
  std::string options;
  for (const auto& entry : table) {
    if (name == entry.name) return entry.value;
    options += options.empty() ? entry.name : std::string(", ") + entry.name;
  }
  throw UsageError(std::string("unknown ") + what + " '" + name + "' (expected one of: " + options + ")");
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector normal_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Rows of N(0, Sigma) with Sigma_ij = rho^|i-j| by the AR(1) recursion.
Matrix ar1_design(Rng& rng, Index n, Index p, double rho) {
  Matrix X(n, p);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    for (Index j = 1; j < p; ++j) X(i, j) = rho * X(i, j - 1) + innov * rng.normal();
  }
  return X;
}

double treated_mean(const Vector& values, const Vector& W) {
  double total = 0.0, count = 0.0;
  for (Index i = 0; i < W.size(); ++i) {
    if (W(i) != 0.0) {
      total += values(i);
      count += 1.0;
    }
  }
  return count > 0 ? total / count : 0.0;
}

}  // namespace

std::string to_string(BetaKind kind) { return lookup(kBetaNames, kind); }
BetaKind parse_beta_kind(const std::string& name) { return lookup(kBetaNames, name, "beta model"); }
std::string to_string(DesignKind kind) { return lookup(kDesignNames, kind); }
DesignKind parse_design_kind(const std::string& name) { return lookup(kDesignNames, name, "design"); }
std::string to_string(DeltaKind kind) { return lookup(kDeltaNames, kind); }
DeltaKind parse_delta_kind(const std::string& name) { return lookup(kDeltaNames, name, "delta kind"); }

Vector make_beta(const BetaModel& model, Index p, bool index_shift) {
  if (p < 1) throw UsageError("p must be positive");
  if (!(model.norm > 0.0)) throw UsageError("beta norm must be positive");
  if (model.kind == BetaKind::ModeratelySparse && p < 100)
    throw UsageError("moderately_sparse beta needs p >= 100");
  if (model.kind == BetaKind::VerySparse && p < 10) throw UsageError("very_sparse beta needs p >= 10");
  auto pattern = [&](Index j) -> double {  // j is 1-based
    const double x = static_cast<double>(j);
    switch (model.kind) {
      case BetaKind::Dense: return 1.0 / std::sqrt(x);
      case BetaKind::Harmonic: return 1.0 / (x + 9.0);
      case BetaKind::ModeratelySparse: return j <= 10 ? 10.0 : (j <= 100 ? 1.0 : 0.0);
      case BetaKind::VerySparse: return j <= 10 ? 1.0 : 0.0;
      case BetaKind::InverseSquare: return 1.0 / (x * x);
      case BetaKind::Inverse: return 1.0 / x;
    }
    return 0.0;
  };
  Vector beta(p);
  for (Index j = 1; j <= p; ++j) {
    const Index source = index_shift ? 1 + (23 * (j - 1)) % p : j;
    beta(j - 1) = pattern(source);
  }
  return beta * (model.norm / beta.norm());
}

void SimulationDesign::validate() const {
  if (n < 2) throw UsageError("design needs n >= 2");
  if (p < 1) throw UsageError("design needs p >= 1");
  if (kind == DesignKind::ManyCluster) {
    if (!(eta > 0.0 && eta < 1.0)) throw UsageError("eta must lie in (0, 1)");
    if (n_clusters < 2 || n_clusters % 2 != 0) throw UsageError("n_clusters must be a positive even number");
  }
  if ((kind == DesignKind::SparseTwoStage || kind == DesignKind::ModeratelySparseTwoStage) &&
      !(rho > -1.0 && rho < 1.0))
    throw UsageError("rho must lie in (-1, 1)");
  if (kind == DesignKind::Misspecified && p < 10) throw UsageError("misspecified design needs p >= 10");
  if (kind != DesignKind::Misspecified) make_beta(beta, p, kind == DesignKind::ModeratelySparseTwoStage);
  if (kind == DesignKind::SparseTwoStage) make_beta(beta_w, p);
}

std::string SimulationDesign::label() const {
  std::ostringstream out;
  out << to_string(kind) << '(';
  switch (kind) {
    case DesignKind::TwoCluster:
      out << "delta=" << to_string(delta) << ",beta=" << to_string(beta.kind);
      break;
    case DesignKind::ManyCluster:
      out << "eta=" << eta << ",beta=" << to_string(beta.kind);
      break;
    case DesignKind::SparseTwoStage:
      out << "rho=" << rho << ",beta_w=" << to_string(beta_w.kind) << ':' << beta_w.norm << ",beta_y=" << beta.norm;
      break;
    case DesignKind::ModeratelySparseTwoStage:
      out << "rho=" << rho << ",beta=" << to_string(beta.kind);
      break;
    case DesignKind::Misspecified:
      break;
  }
  if (kind != DesignKind::Misspecified) out << ',';
  out << "n=" << n << ",p=" << p << ')';
  return out.str();
}

SimulationDesign default_design(DesignKind kind) {
  SimulationDesign d;
  d.kind = kind;
  switch (kind) {
    case DesignKind::TwoCluster: d.beta = {BetaKind::VerySparse, 2.0}; break;
    case DesignKind::ManyCluster: d.beta = {BetaKind::VerySparse, 3.0}; break;
    case DesignKind::SparseTwoStage: d.beta = {BetaKind::InverseSquare, 1.0}; break;
    case DesignKind::ModeratelySparseTwoStage: d.beta = {BetaKind::VerySparse, 1.0}; break;
    case DesignKind::Misspecified: d.beta = {BetaKind::VerySparse, 1.0}; break;
  }
  return d;
}

SimDraw draw_two_cluster(const SimulationDesign& d, std::uint64_t replication) {
  d.validate();
  Rng rng = Rng(d.seed).substream(replication);
  const Vector beta = make_beta(d.beta, d.p);
  Vector delta = Vector::Zero(d.p);
  const double rn = std::sqrt(static_cast<double>(d.n));
  for (Index j = 0; j < d.p; ++j) {
    if (d.delta == DeltaKind::Dense) delta(j) = 4.0 / rn;
    else if (j % 10 == 0) delta(j) = 40.0 / rn;  // 1-based j = 1 mod 10
  }
  Matrix X(d.n, d.p);
  Vector W(d.n), Y(d.n), cluster(d.n), prop(d.n);
  for (Index i = 0; i < d.n; ++i) {
    W(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double p_zero = W(i) != 0.0 ? 0.2 : 0.8;
    cluster(i) = rng.bernoulli(p_zero) ? 0.0 : 1.0;
    for (Index j = 0; j < d.p; ++j) X(i, j) = cluster(i) * delta(j) + rng.normal();
    Y(i) = X.row(i).dot(beta) + W(i) + rng.normal();
    // P(W = 1 | C): 0.2 in the origin cluster, 0.8 in the shifted one.
    prop(i) = cluster(i) != 0.0 ? 0.8 : 0.2;
  }
  SimDraw out{Dataset(std::move(X), W, std::move(Y)), 1.0, 1.0, {}};
  out.oracle_info["cluster"] = cluster;
  out.oracle_info["propensity"] = prop;
  return out;
}

SimDraw draw_many_cluster(const SimulationDesign& d, std::uint64_t replication) {
  d.validate();
  Rng rng = Rng(d.seed).substream(replication);
  const Vector beta = make_beta(d.beta, d.p);
  Matrix centers(d.n_clusters, d.p);
  for (Index k = 0; k < d.n_clusters; ++k)
    for (Index j = 0; j < d.p; ++j) centers(k, j) = rng.normal();
  Matrix X(d.n, d.p);
  Vector W(d.n), Y(d.n), cluster(d.n), prop(d.n);
  const auto half = static_cast<std::uint64_t>(d.n_clusters / 2);
  for (Index i = 0; i < d.n; ++i) {
    const std::uint64_t k = rng.uniform_int(static_cast<std::uint64_t>(d.n_clusters));
    cluster(i) = static_cast<double>(k);
    prop(i) = k < half ? d.eta : 1.0 - d.eta;
    W(i) = rng.bernoulli(prop(i)) ? 1.0 : 0.0;
    for (Index j = 0; j < d.p; ++j) X(i, j) = centers(static_cast<Index>(k), j) + rng.normal();
    Y(i) = X.row(i).dot(beta) + W(i) + rng.normal();
  }
  SimDraw out{Dataset(std::move(X), W, std::move(Y)), 1.0, 1.0, {}};
  out.oracle_info["cluster"] = cluster;
  out.oracle_info["propensity"] = prop;
  return out;
}

SimDraw draw_sparse_two_stage(const SimulationDesign& d, std::uint64_t replication) {
  d.validate();
  Rng rng = Rng(d.seed).substream(replication);
  const Vector beta_y = make_beta(d.beta, d.p);
  const Vector beta_w = make_beta(d.beta_w, d.p);
  Matrix X = ar1_design(rng, d.n, d.p, d.rho);
  const Vector theta = X * beta_w + normal_vector(rng, d.n);
  Vector W(d.n);
  for (Index i = 0; i < d.n; ++i) W(i) = rng.bernoulli(1.0 / (1.0 + std::exp(theta(i)))) ? 1.0 : 0.0;
  Vector Y = X * beta_y + 0.5 * W + normal_vector(rng, d.n);
  SimDraw out{Dataset(std::move(X), W, std::move(Y)), 0.5, 0.5, {}};
  out.oracle_info["theta"] = theta;
  return out;
}

SimDraw draw_moderately_sparse_two_stage(const SimulationDesign& d, std::uint64_t replication) {
  d.validate();
  Rng rng = Rng(d.seed).substream(replication);
  const Vector beta = make_beta(d.beta, d.p, true);
  Matrix X = ar1_design(rng, d.n, d.p, d.rho);
  const Index m = std::min<Index>(d.p, 100);
  Vector W(d.n), prop(d.n);
  for (Index i = 0; i < d.n; ++i) {
    prop(i) = logistic(X.row(i).head(m).sum() / 40.0);
    W(i) = rng.bernoulli(prop(i)) ? 1.0 : 0.0;
  }
  Vector Y = X * beta + 0.5 * W + normal_vector(rng, d.n);
  SimDraw out{Dataset(std::move(X), W, std::move(Y)), 0.5, 0.5, {}};
  out.oracle_info["propensity"] = prop;
  return out;
}

double misspecified_theta(double x1) {
  const double z = -2.0 - 2.0 * x1;
  const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus / 0.915;
}

double misspecified_population_att() {
  using boost::math::quadrature::gauss_kronrod;
  const double inv_sqrt_2pi = 0.3989422804014327;
  auto density = [&](double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); };
  auto prop = [](double x) { return -std::expm1(-misspecified_theta(x)); };
  const double num = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return misspecified_theta(x) * prop(x) * density(x); }, -12.0, 12.0, 15, 1e-14);
  const double den =
      gauss_kronrod<double, 61>::integrate([&](double x) { return prop(x) * density(x); }, -12.0, 12.0, 15, 1e-14);
  return num / den;
}

SimDraw draw_misspecified(const SimulationDesign& d, std::uint64_t replication) {
  d.validate();
  Rng rng = Rng(d.seed).substream(replication);
  Matrix X(d.n, d.p);
  for (Index i = 0; i < d.n; ++i)
    for (Index j = 0; j < d.p; ++j) X(i, j) = rng.normal();
  Vector theta(d.n), W(d.n), Y(d.n), prop(d.n);
  for (Index i = 0; i < d.n; ++i) {
    theta(i) = misspecified_theta(X(i, 0));
    prop(i) = -std::expm1(-theta(i));
    W(i) = rng.bernoulli(prop(i)) ? 1.0 : 0.0;
    Y(i) = X.row(i).head(10).sum() + theta(i) * (2.0 * W(i) - 1.0) / 2.0 + rng.normal();
  }
  static const double population = misspecified_population_att();
  const double tau = treated_mean(theta, W);
  SimDraw out{Dataset(std::move(X), W, std::move(Y)), tau, population, {}};
  out.oracle_info["theta"] = theta;
  out.oracle_info["propensity"] = prop;
  return out;
}

SimDraw draw(const SimulationDesign& design, std::uint64_t replication) {
  switch (design.kind) {
    case DesignKind::TwoCluster: return draw_two_cluster(design, replication);
    case DesignKind::ManyCluster: return draw_many_cluster(design, replication);
    case DesignKind::SparseTwoStage: return draw_sparse_two_stage(design, replication);
    case DesignKind::ModeratelySparseTwoStage: return draw_moderately_sparse_two_stage(design, replication);
    case DesignKind::Misspecified: return draw_misspecified(design, replication);
  }
  throw UsageError("unknown design");
}

}  // namespace resbal
