#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "resbal/data.hpp"

namespace resbal {

// Coefficient patterns, each rescaled to the requested Euclidean norm:
//   dense 1/sqrt(j), harmonic 1/(j + 9), moderately_sparse (10 x10, 90 x1, 0...),
//   very_sparse (10 x1, 0...), inverse_square 1/j^2, inverse 1/j.
enum class BetaKind { Dense, Harmonic, ModeratelySparse, VerySparse, InverseSquare, Inverse };

std::string to_string(BetaKind kind);
BetaKind parse_beta_kind(const std::string& name);

struct BetaModel {
  BetaKind kind = BetaKind::VerySparse;
  double norm = 1.0;
};

// With `index_shift`, entry j (1-based) takes the pattern value at position
// 1 + (23 (j - 1) mod p).
Vector make_beta(const BetaModel& model, Index p, bool index_shift = false);

enum class DesignKind { TwoCluster, ManyCluster, SparseTwoStage, ModeratelySparseTwoStage, Misspecified };
enum class DeltaKind { Dense, Sparse };

std::string to_string(DesignKind kind);
DesignKind parse_design_kind(const std::string& name);
std::string to_string(DeltaKind kind);
DeltaKind parse_delta_kind(const std::string& name);

struct SimulationDesign {
  DesignKind kind = DesignKind::TwoCluster;
  Index n = 200;
  Index p = 400;
  BetaModel beta;                   // outcome coefficients (beta_Y in the two-stage designs)
  DeltaKind delta = DeltaKind::Sparse;  // two-cluster
  double eta = 0.25;                // many-cluster overlap
  int n_clusters = 20;              // many-cluster
  double rho = 0.5;                 // two-stage AR(1) correlation
  BetaModel beta_w{BetaKind::InverseSquare, 1.0};  // sparse two-stage propensity coefficients
  std::uint64_t seed = 1;

  void validate() const;
  // Short human-readable cell name, stable across runs.
  std::string label() const;
};

// Design of the given kind with the defaults used in the published tables
// (signal norm 2 for two-cluster, 3 for many-cluster, 1 otherwise).
SimulationDesign default_design(DesignKind kind);

struct SimDraw {
  Dataset data;
  double tau_true = 0.0;        // treated-sample effect of this draw
  double tau_population = 0.0;  // population ATT of the design
  std::map<std::string, Vector> oracle_info;
};

// Draws depend only on (design.seed, replication).
SimDraw draw(const SimulationDesign& design, std::uint64_t replication = 0);

SimDraw draw_two_cluster(const SimulationDesign& design, std::uint64_t replication = 0);
SimDraw draw_many_cluster(const SimulationDesign& design, std::uint64_t replication = 0);
SimDraw draw_sparse_two_stage(const SimulationDesign& design, std::uint64_t replication = 0);
SimDraw draw_moderately_sparse_two_stage(const SimulationDesign& design, std::uint64_t replication = 0);
SimDraw draw_misspecified(const SimulationDesign& design, std::uint64_t replication = 0);

// Unit-level effect in the misspecified design, log(1 + exp(-2 - 2 x1)) / 0.915.
double misspecified_theta(double x1);
// Population ATT of the misspecified design, by quadrature over x1 ~ N(0, 1).
double misspecified_population_att();

}  // namespace resbal
