#pragma once

#include <string>

#include "resbal/data.hpp"

namespace resbal {

enum class BalanceForm { Lagrange, Constraint };
enum class SolveStatus { Optimal, MaxIter, Infeasible };

std::string to_string(SolveStatus status);

// Weights over the rows of `Xc` that bring Xc^T gamma close to `xi`.
//
//   Lagrange:   min (1 - zeta) ||g||^2 + zeta ||xi - Xc^T g||_inf^2
//   Constraint: min ||g||^2  s.t. ||xi - Xc^T g||_inf <= K sqrt(log(p) / n_c)
//
// over 0 <= g_i <= box_upper with sum(g) = 1 when `simplex` is set, or over
// |g_i| <= box_upper otherwise.
struct BalanceProblem {
  Matrix Xc;
  Vector xi;
  BalanceForm form = BalanceForm::Lagrange;
  double zeta = 0.5;
  double K = 1.0;
  double box_upper = -1.0;  // <= 0 selects n_c^(-2/3)
  bool simplex = true;
  double solver_tol = 1e-7;
  int max_iter = 100000;

  Index n_c() const { return Xc.rows(); }
  double cap() const;
  // Imbalance radius of the constraint form.
  double radius() const;
  void validate() const;
};

struct BalanceWeights {
  Vector gamma;
  Vector imbalance;  // xi - Xc^T gamma
  double sup_imbalance = 0.0;
  double sq_norm = 0.0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  bool polished = false;
  double duality_gap = 0.0;  // Lagrange form only; certified upper bound on suboptimality
  double radius = 0.0;       // imbalance bound used by constraint-type solves
};

BalanceWeights solve_lagrange(const BalanceProblem& prob);
BalanceWeights solve_constraint(const BalanceProblem& prob);

// Minimum-norm simplex weights with sup-imbalance at most `threshold`
// (infinite threshold allowed).
BalanceWeights solve_stable(const BalanceProblem& prob, double threshold);

// Stable weights at 1.05 times the smallest feasible threshold. The threshold
// is bracketed by a near-minimax Lagrange solve (its imbalance above, its dual
// bound below) and refined by at most 20 bisection steps.
BalanceWeights solve_stable_auto(const BalanceProblem& prob);

// Maximum-entropy simplex weights with exact balance, via the dual. Throws
// NumericError when exact balance is unattainable.
BalanceWeights solve_entropy(const BalanceProblem& prob);

// Normalized propensity-odds weights e/(1-e) after clamping e into [lo, hi].
BalanceWeights ipw_weights(const Vector& ehat, double lo = 0.05, double hi = 0.95);

// Recomputes imbalance, sup-imbalance and squared norm for `gamma`.
void fill_diagnostics(const Matrix& Xc, const Vector& xi, BalanceWeights& w);

}  // namespace resbal
