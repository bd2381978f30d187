#include "resbal/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resbal/capped_simplex.hpp"
#include "resbal/errors.hpp"

namespace resbal {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double BalanceProblem::cap() const {
  return box_upper > 0 ? box_upper : std::pow(static_cast<double>(n_c()), -2.0 / 3.0);
}

double BalanceProblem::radius() const {
  const double p = static_cast<double>(Xc.cols());
  return K * std::sqrt(std::log(p) / static_cast<double>(n_c()));
}

void BalanceProblem::validate() const {
  if (n_c() < 1) throw UsageError("balancing needs at least one control row");
  if (xi.size() != Xc.cols()) throw UsageError("target length does not match covariate columns");
  if (!Xc.allFinite() || !xi.allFinite()) throw DataError("non-finite values in balancing problem");
  if (form == BalanceForm::Lagrange && !(zeta > 0.0 && zeta < 1.0)) throw UsageError("zeta must lie in (0, 1)");
  if (form == BalanceForm::Constraint && !(K >= 0.0)) throw UsageError("K must be nonnegative");
  if (!(solver_tol > 0.0) || max_iter <= 0) throw UsageError("solver tolerance and iteration cap must be positive");
  if (simplex && cap() * static_cast<double>(n_c()) < 1.0 - 1e-12)
    throw UsageError("box_upper * n_c < 1: the capped simplex is empty");
}

void fill_diagnostics(const Matrix& Xc, const Vector& xi, BalanceWeights& w) {
  w.imbalance = xi - Xc.transpose() * w.gamma;
  w.sup_imbalance = w.imbalance.size() ? w.imbalance.cwiseAbs().maxCoeff() : 0.0;
  w.sq_norm = w.gamma.squaredNorm();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solves (c I + rho Xc Xc^T) x = rhs for varying (c, rho) from a single
// eigendecomposition of the smaller Gram matrix.
class GramSolver {
 public:
  explicit GramSolver(const Matrix& X) {
    const Index n = X.rows(), p = X.cols();
    if (n <= p) {
      Matrix K = Matrix::Zero(n, n);
      K.selfadjointView<Eigen::Lower>().rankUpdate(X);
      Eigen::SelfAdjointEigenSolver<Matrix> es(K);
      eig_ = es.eigenvalues().cwiseMax(0.0);
      U_ = es.eigenvectors();
    } else {
      Matrix G = Matrix::Zero(p, p);
      G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(G);
      const double top = es.eigenvalues().maxCoeff();
      std::vector<Index> keep;
      for (Index k = 0; k < p; ++k)
        if (es.eigenvalues()(k) > 1e-12 * std::max(top, 1e-300)) keep.push_back(k);
      U_.resize(n, static_cast<Index>(keep.size()));
      eig_.resize(static_cast<Index>(keep.size()));
      for (Index c = 0; c < static_cast<Index>(keep.size()); ++c) {
        const Index k = keep[static_cast<std::size_t>(c)];
        eig_(c) = es.eigenvalues()(k);
        U_.col(c) = X * es.eigenvectors().col(k) / std::sqrt(eig_(c));
      }
    }
  }

  Vector solve(double c, double rho, const Vector& rhs) const {
    Vector coef = U_.transpose() * rhs;
    coef.array() *= 1.0 / (c + rho * eig_.array()) - 1.0 / c;
    return rhs / c + U_ * coef;
  }

 private:
  Matrix U_;
  Vector eig_;
};

// min a||g||^2 + b s^2 subject to g in C and ||X^T g - xi||_inf <= s, where
// s is a free epigraph variable when b > 0 and fixed to `radius` when b == 0.
struct Core {
  const Matrix& X;
  const Vector& xi;
  double a = 1.0;
  double b = 0.0;
  double radius = 0.0;
  double lo = 0.0, hi = 1.0;
  bool simplex = true;
  double tol = 1e-7;
  int max_iter = 100000;
  bool probe = false;       // stop at the first iterate within probe_slack of feasible
  double probe_slack = 1e-3;

  bool lagrange() const { return b > 0.0; }

  Vector project(const Vector& v) const {
    if (simplex) return project_capped_simplex(v, lo, hi, 1.0);
    return v.cwiseMax(lo).cwiseMin(hi);
  }

  // Largest a||g||^2 over C; any feasible point has objective below it.
  double max_primal() const {
    const double n = static_cast<double>(X.rows());
    if (!simplex) return a * n * std::max(lo * lo, hi * hi);
    const double full = std::floor(1.0 / hi);
    const double rem = std::max(0.0, 1.0 - full * hi);
    return a * (full * hi * hi + rem * rem);
  }

  // Lagrange dual function with the coupling X^T g = w dualized by `mult`.
  double dual_value(const Vector& mult) const {
    const Vector c = X * mult;
    const Vector g = project(-c / (2.0 * a));
    double value = a * g.squaredNorm() + c.dot(g) - mult.dot(xi);
    const double l1 = mult.lpNorm<1>();
    value -= lagrange() ? l1 * l1 / (4.0 * b) : radius * l1;
    return value;
  }

  double primal_value(const Vector& g) const {
    const double imb = (X.transpose() * g - xi).cwiseAbs().maxCoeff();
    return a * g.squaredNorm() + (lagrange() ? b * imb * imb : 0.0);
  }
};

struct CoreResult {
  Vector gamma;
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  bool polished = false;
  Vector dual;  // multiplier of the coupling X^T g = w
};

// Equality-constrained QP on a guessed active set; accepted only when the
// KKT conditions of the full problem verify.
bool polish(const Core& core, const Vector& y, const Vector& z, double tau, Vector& out, Vector& dual) {
  const Matrix& X = core.X;
  const Index n = X.rows(), p = X.cols();
  const double s_fixed = core.lagrange() ? tau : core.radius;
  if (core.lagrange() && !(tau > 0.0)) return false;

  std::vector<Index> free_idx, fixed_idx, rows;
  std::vector<double> sigma;
  for (Index i = 0; i < n; ++i) (y(i) <= core.lo || y(i) >= core.hi ? fixed_idx : free_idx).push_back(i);
  for (Index j = 0; j < p; ++j) {
    if (std::abs(z(j)) >= s_fixed * (1 - 1e-12) && s_fixed > 0) {
      rows.push_back(j);
      sigma.push_back(z(j) > 0 ? 1.0 : -1.0);
    }
  }
  const Index nf = static_cast<Index>(free_idx.size());
  const Index nj = static_cast<Index>(rows.size());
  const Index off = core.simplex ? 1 : 0;
  const Index k = off + nj;

  Vector fixed_val = Vector::Zero(n);
  for (Index i : fixed_idx) fixed_val(i) = y(i) <= core.lo ? core.lo : core.hi;

  Vector gamma = fixed_val;
  Vector eta = Vector::Zero(k);
  double s = s_fixed;
  if (k > 0) {
    Matrix B(k, nf);
    Vector d(k), e = Vector::Zero(k);
    if (core.simplex) {
      B.row(0).setOnes();
      d(0) = 1.0 - fixed_val.sum();
    }
    const Vector fixed_imb = X.transpose() * fixed_val;
    for (Index r = 0; r < nj; ++r) {
      const Index j = rows[static_cast<std::size_t>(r)];
      const double sg = sigma[static_cast<std::size_t>(r)];
      for (Index c = 0; c < nf; ++c) B(off + r, c) = sg * X(free_idx[static_cast<std::size_t>(c)], j);
      d(off + r) = sg * (core.xi(j) - fixed_imb(j));
      e(off + r) = 1.0;
    }
    Matrix S = B * B.transpose() / (2.0 * core.a);
    Vector rhs = -d;
    if (core.lagrange()) S += e * e.transpose() / (2.0 * core.b);
    else rhs -= core.radius * e;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(S);
    eta = cod.solve(rhs);
    if ((S * eta - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) return false;
    const Vector gf = -B.transpose() * eta / (2.0 * core.a);
    for (Index c = 0; c < nf; ++c) gamma(free_idx[static_cast<std::size_t>(c)]) = gf(c);
    if (core.lagrange()) s = eta.tail(nj).sum() / (2.0 * core.b);
  } else if (core.simplex) {
    return false;
  }

  const double scale = std::max({1.0, eta.size() ? eta.cwiseAbs().maxCoeff() : 0.0, 2.0 * core.a * core.hi});
  const double mult_tol = 1e-9 * scale;
  for (Index r = 0; r < nj; ++r)
    if (eta(off + r) < -mult_tol) return false;
  for (Index i : free_idx)
    if (gamma(i) < core.lo - 1e-12 || gamma(i) > core.hi + 1e-12) return false;
  // Bound multipliers: stationarity gradient at fixed coordinates.
  Vector row_mult = Vector::Zero(p);
  for (Index r = 0; r < nj; ++r) row_mult(rows[static_cast<std::size_t>(r)]) = eta(off + r) * sigma[static_cast<std::size_t>(r)];
  const Vector coupling = X * row_mult;
  const double nu = core.simplex ? eta(0) : 0.0;
  for (Index i : fixed_idx) {
    const double grad = 2.0 * core.a * gamma(i) + nu + coupling(i);
    if (gamma(i) <= core.lo && grad < -mult_tol) return false;
    if (gamma(i) >= core.hi && grad > mult_tol) return false;
  }
  gamma = gamma.cwiseMax(core.lo).cwiseMin(core.hi);
  const double imb = (X.transpose() * gamma - core.xi).cwiseAbs().maxCoeff();
  if (imb > s + 1e-10 * std::max(1.0, s)) return false;
  out = gamma;
  dual = row_mult;
  return true;
}

// Iterate of the scaled ADMM, reusable as a warm start for a nearby problem.
struct AdmmState {
  Vector y, w, uy, uw;
  double tau = 0.0, ut = 0.0, rho = 1.0;
};

CoreResult run_admm(const Core& core, const GramSolver& gram, AdmmState* state = nullptr) {
  const Matrix& X = core.X;
  const Index n = X.rows();
  const double relax = 1.6;
  const int check_every = 10;
  const int adapt_every = 50;

  CoreResult res;
  Vector y, w, uy, uw;
  double tau, ut, rho;
  if (state && state->y.size() == n) {
    y = state->y;
    w = state->w;
    uy = state->uy;
    uw = state->uw;
    tau = core.lagrange() ? state->tau : core.radius;
    ut = state->ut;
    rho = state->rho;
  } else {
    y = core.project(Vector::Zero(n));
    w = X.transpose() * y;
    tau = core.lagrange() ? (w - core.xi).cwiseAbs().maxCoeff() : core.radius;
    uy = Vector::Zero(n);
    uw = Vector::Zero(X.cols());
    ut = 0.0;
    rho = 1.0;
  }
  Vector gamma = y;
  double s = tau;
  Vector z = w - core.xi;
  struct Saver {
    AdmmState* st;
    Vector &y, &w, &uy, &uw;
    double &tau, &ut, &rho;
    ~Saver() {
      if (st) *st = AdmmState{y, w, uy, uw, tau, ut, rho};
    }
  } saver{state, y, w, uy, uw, tau, ut, rho};
  int polish_attempts = 0;
  int next_polish = 0;
  const double pmax = core.max_primal();
  // Penalty ratio between the imbalance rows and the weight rows; equal to
  // 1 / (mean squared column norm), which equilibrates the two blocks.
  const double kappa = 1.0 / std::max(X.squaredNorm() / static_cast<double>(X.cols()), 1e-12);

  for (int it = 1; it <= core.max_iter; ++it) {
    const double rw = kappa * rho;
    const Vector rhs = rho * (y - uy) + rw * (X * (w - uw));
    gamma = gram.solve(2.0 * core.a + rho, rw, rhs);
    if (core.lagrange()) s = rw * (tau - ut) / (2.0 * core.b + rw);
    const Vector mg = X.transpose() * gamma;

    const Vector hy = relax * gamma + (1 - relax) * y;
    const Vector hw = relax * mg + (1 - relax) * w;
    const double hs = relax * s + (1 - relax) * tau;
    const Vector y_old = y, w_old = w;
    const double tau_old = tau;

    y = core.project(hy + uy);
    if (core.lagrange()) {
      project_linf_epigraph(hw + uw - core.xi, hs + ut, z, tau);
    } else {
      z = (hw + uw - core.xi).cwiseMax(-core.radius).cwiseMin(core.radius);
    }
    w = core.xi + z;
    uy += hy - y;
    uw += hw - w;
    if (core.lagrange()) ut += hs - tau;
    res.iterations = it;

    if (it % check_every != 0 && it != core.max_iter) continue;

    const double r_prim = std::max({(gamma - y).cwiseAbs().maxCoeff(), (mg - w).cwiseAbs().maxCoeff(),
                                    core.lagrange() ? std::abs(s - tau) : 0.0});
    const Vector dual_move = rho * (y - y_old) + rw * (X * (w - w_old));
    const double r_dual = std::max(dual_move.cwiseAbs().maxCoeff(), rw * std::abs(tau - tau_old));
    const double prim_scale = std::max({gamma.cwiseAbs().maxCoeff(), mg.cwiseAbs().maxCoeff(),
                                        w.cwiseAbs().maxCoeff(), std::abs(tau), std::abs(s)});
    const double dual_scale = std::max((rho * uy + rw * (X * uw)).cwiseAbs().maxCoeff(), rw * std::abs(ut));
    const double eps_p = core.tol + core.tol * prim_scale;
    const double eps_d = core.tol + core.tol * dual_scale;

    if (core.probe) {
      const double imb = (X.transpose() * y - core.xi).cwiseAbs().maxCoeff();
      if (imb <= core.radius * (1 + core.probe_slack) + 1e-12) {
        res.gamma = y;
        res.status = SolveStatus::Optimal;
        return res;
      }
    }
    if (!core.lagrange() && core.dual_value(rw * uw) > pmax * (1 + 1e-9) + 1e-12) {
      res.gamma = y;
      res.status = SolveStatus::Infeasible;
      return res;
    }

    const bool converged = r_prim <= eps_p && r_dual <= eps_d;
    const bool near = r_prim <= 1e3 * eps_p && r_dual <= 1e3 * eps_d;
    if (!core.probe && (converged || (near && it >= next_polish && polish_attempts < 20))) {
      ++polish_attempts;
      next_polish = it + 50;
      Vector polished, dual;
      if (polish(core, y, z, tau, polished, dual)) {
        res.gamma = polished;
        res.dual = dual;
        res.polished = true;
        res.status = SolveStatus::Optimal;
        return res;
      }
    }
    if (converged) {
      res.gamma = y;
      res.dual = rw * uw;
      res.status = SolveStatus::Optimal;
      return res;
    }

    if (it % adapt_every == 0) {
      const double p_rel = r_prim / std::max(prim_scale, 1e-300);
      const double d_rel = r_dual / std::max(dual_scale, 1e-300);
      const double ratio = std::sqrt(p_rel / std::max(d_rel, 1e-300));
      if ((ratio > 5.0 || ratio < 0.2) && std::isfinite(ratio)) {
        const double factor = std::clamp(ratio, 1e-3, 1e3);
        rho *= factor;
        uy /= factor;
        uw /= factor;
        ut /= factor;
      }
    }
  }
  res.gamma = y;
  res.dual = kappa * rho * uw;
  res.status = SolveStatus::MaxIter;
  return res;
}

struct Prepared {
  Matrix X;
  Vector xi;
};

// With the sum constraint the imbalance is translation invariant, so the
// solver works on control-centered covariates.
Prepared prepare(const BalanceProblem& prob) {
  if (!prob.simplex) return {prob.Xc, prob.xi};
  const Vector mean = prob.Xc.colwise().mean().transpose();
  Prepared out{prob.Xc.rowwise() - mean.transpose(), prob.xi - mean};
  return out;
}

BalanceWeights finish(const BalanceProblem& prob, CoreResult&& r, double a, double b) {
  BalanceWeights w;
  w.gamma = std::move(r.gamma);
  if (prob.simplex) w.gamma /= w.gamma.sum();
  fill_diagnostics(prob.Xc, prob.xi, w);
  w.status = r.status;
  w.iterations = r.iterations;
  w.polished = r.polished;
  w.objective = a * w.sq_norm + b * w.sup_imbalance * w.sup_imbalance;
  return w;
}

BalanceWeights uniform_weights(const BalanceProblem& prob, double a, double b) {
  CoreResult r;
  r.gamma = Vector::Constant(prob.n_c(), 1.0 / static_cast<double>(prob.n_c()));
  r.status = SolveStatus::Optimal;
  return finish(prob, std::move(r), a, b);
}

double uniform_sup_imbalance(const BalanceProblem& prob) {
  const Vector mean = prob.Xc.colwise().mean().transpose();
  return (prob.xi - mean).cwiseAbs().maxCoeff();
}

BalanceWeights solve_with_radius(const BalanceProblem& prob, double radius, AdmmState* warm = nullptr) {
  prob.validate();
  if (!(radius >= 0.0)) throw UsageError("imbalance bound must be nonnegative");
  const double cap = prob.cap();
  const bool uniform_ok = prob.simplex && 1.0 / static_cast<double>(prob.n_c()) <= cap;
  if (uniform_ok && uniform_sup_imbalance(prob) <= radius) {
    auto w = uniform_weights(prob, 1.0, 0.0);
    w.radius = radius;
    return w;
  }
  if (std::isinf(radius)) {
    // Unconstrained minimum-norm point of C.
    CoreResult r;
    r.gamma = prob.simplex ? project_capped_simplex(Vector::Zero(prob.n_c()), 0.0, cap) : Vector::Zero(prob.n_c());
    r.status = SolveStatus::Optimal;
    auto w = finish(prob, std::move(r), 1.0, 0.0);
    w.radius = radius;
    return w;
  }
  const Prepared pr = prepare(prob);
  Core core{pr.X, pr.xi};
  core.a = 1.0;
  core.b = 0.0;
  core.radius = radius;
  core.lo = prob.simplex ? 0.0 : -cap;
  core.hi = cap;
  core.simplex = prob.simplex;
  core.tol = prob.solver_tol;
  core.max_iter = prob.max_iter;
  auto w = finish(prob, run_admm(core, GramSolver(core.X), warm), 1.0, 0.0);
  w.radius = radius;
  return w;
}

}  // namespace

BalanceWeights solve_lagrange(const BalanceProblem& prob) {
  prob.validate();
  if (prob.form != BalanceForm::Lagrange) throw UsageError("solve_lagrange needs a Lagrange-form problem");
  const double a = 1.0 - prob.zeta, b = prob.zeta;
  const double cap = prob.cap();
  const Index n = prob.n_c();
  if (prob.simplex && 1.0 / static_cast<double>(n) <= cap &&
      uniform_sup_imbalance(prob) <= 1e-14 * std::max(1.0, prob.xi.cwiseAbs().maxCoeff())) {
    return uniform_weights(prob, a, b);
  }
  const Prepared pr = prepare(prob);
  Core core{pr.X, pr.xi};
  core.a = a;
  core.b = b;
  core.lo = prob.simplex ? 0.0 : -cap;
  core.hi = cap;
  core.simplex = prob.simplex;
  core.tol = prob.solver_tol;
  core.max_iter = prob.max_iter;
  CoreResult r = run_admm(core, GramSolver(core.X));
  const Vector dual = r.dual;
  BalanceWeights w = finish(prob, std::move(r), a, b);
  if (dual.size()) w.duality_gap = std::max(0.0, w.objective - core.dual_value(dual));
  return w;
}

BalanceWeights solve_constraint(const BalanceProblem& prob) {
  if (prob.form != BalanceForm::Constraint) throw UsageError("solve_constraint needs a constraint-form problem");
  return solve_with_radius(prob, prob.radius());
}

BalanceWeights solve_stable(const BalanceProblem& prob, double threshold) {
  BalanceProblem p = prob;
  p.form = BalanceForm::Constraint;
  p.simplex = true;
  return solve_with_radius(p, threshold);
}

BalanceWeights solve_stable_auto(const BalanceProblem& prob) {
  BalanceProblem p = prob;
  p.form = BalanceForm::Constraint;
  p.simplex = true;
  p.validate();
  const double cap = p.cap();
  double hi = uniform_sup_imbalance(p);
  double lo = 0.0;
  AdmmState state;
  if (hi > 0.0) {
    const Prepared pr = prepare(p);
    const GramSolver gram(pr.X);
    // Bracket the smallest feasible threshold with a nearly pure
    // imbalance-minimizing Lagrange solve: its iterate is feasible for its own
    // imbalance, and its dual bound limits how much lower the minimum can be.
    Core minimax{pr.X, pr.xi};
    minimax.a = 0.01;
    minimax.b = 0.99;
    minimax.lo = 0.0;
    minimax.hi = cap;
    minimax.tol = p.solver_tol;
    minimax.max_iter = std::min(p.max_iter, 20000);
    const CoreResult m = run_admm(minimax, gram, &state);
    hi = std::min(hi, (pr.X.transpose() * m.gamma - pr.xi).cwiseAbs().maxCoeff());
    if (m.dual.size()) {
      const double bound = (minimax.dual_value(m.dual) - minimax.max_primal()) / minimax.b;
      lo = std::sqrt(std::max(0.0, bound));
    }
    for (int step = 0; step < 20 && hi - lo > 1e-3 * hi; ++step) {
      const double mid = 0.5 * (lo + hi);
      Core core{pr.X, pr.xi};
      core.a = 1.0;
      core.radius = mid;
      core.lo = 0.0;
      core.hi = cap;
      core.tol = p.solver_tol;
      core.max_iter = std::min(p.max_iter, 500);
      core.probe = true;
      const CoreResult r = run_admm(core, gram, &state);
      if (r.status == SolveStatus::Optimal) hi = mid;
      else lo = mid;
    }
  }
  return solve_with_radius(p, 1.05 * hi, &state);
}

BalanceWeights solve_entropy(const BalanceProblem& prob) {
  prob.validate();
  const Index p = prob.Xc.cols();
  // Dual: minimize log sum_i exp(lambda . d_i) with d_i = x_i - xi; the
  // weights are the softmax and the gradient is the imbalance.
  const Matrix D = prob.Xc.rowwise() - prob.xi.transpose();
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  Vector lambda = Vector::Zero(p);
  auto evaluate = [&](const Vector& l, Vector& g) {
    const Vector s = D * l;
    const double m = s.maxCoeff();
    g = (s.array() - m).exp().matrix();
    const double total = g.sum();
    g /= total;
    return m + std::log(total);
  };
  Vector gamma;
  double f = evaluate(lambda, gamma);
  bool converged = false;
  int it = 0;
  for (; it < std::min(prob.max_iter, 500); ++it) {
    const Vector grad = D.transpose() * gamma;
    if (grad.cwiseAbs().maxCoeff() <= 1e-11 * scale) {
      converged = true;
      break;
    }
    Matrix H = D.transpose() * gamma.asDiagonal() * D - grad * grad.transpose();
    H.diagonal().array() += 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
    Vector step = -H.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) >= 0) step = -grad;
    double t = 1.0;
    Vector trial_gamma;
    double trial = kInf;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = evaluate(lambda + t * step, trial_gamma);
      if (trial <= f + 1e-4 * t * step.dot(grad)) break;
    }
    if (!(trial < f) && !(trial <= f)) break;
    lambda += t * step;
    f = trial;
    gamma = trial_gamma;
    if (lambda.cwiseAbs().maxCoeff() > 1e10 / scale) break;
  }
  if (!converged) throw NumericError("entropy balancing: exact balance is not attainable for this target");
  BalanceWeights w;
  w.gamma = gamma;
  fill_diagnostics(prob.Xc, prob.xi, w);
  w.objective = (gamma.array() * gamma.array().max(1e-300).log()).sum();
  w.iterations = it;
  w.status = SolveStatus::Optimal;
  return w;
}

BalanceWeights ipw_weights(const Vector& ehat, double lo, double hi) {
  if (!(0.0 < lo && lo <= hi && hi < 1.0)) throw UsageError("trim bounds must satisfy 0 < lo <= hi < 1");
  if (ehat.size() == 0) throw UsageError("no propensities supplied");
  if (!ehat.allFinite()) throw DataError("non-finite propensity");
  const Vector e = ehat.cwiseMax(lo).cwiseMin(hi);
  BalanceWeights w;
  w.gamma = (e.array() / (1.0 - e.array())).matrix();
  w.gamma /= w.gamma.sum();
  w.sq_norm = w.gamma.squaredNorm();
  w.objective = w.sq_norm;
  w.status = SolveStatus::Optimal;
  return w;
}

}  // namespace resbal
