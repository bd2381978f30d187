#include "resbal/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "resbal/errors.hpp"
#include "resbal/rng.hpp"

namespace resbal {

void PenaltyConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in (0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be finite and >= 0");
  if (!(tol > 0.0)) throw UsageError("tol must be positive");
  if (max_iter <= 0) throw UsageError("max_iter must be positive");
}

namespace {

constexpr double kProbFloor = 1e-5;
constexpr double kCoefCap = 100.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Vector resolve_weights(const Vector& weights, Index n) {
  if (weights.size() == 0) return Vector::Ones(n);
  if (weights.size() != n) throw DataError("observation weight length does not match rows");
  if (!weights.allFinite() || (weights.array() <= 0.0).any())
    throw DataError("observation weights must be finite and positive");
  return weights;
}

// Centered and scaled copy of the design; coefficients live on this scale
// while solving.
struct WorkingDesign {
  Matrix X;
  Vector center;
  Vector scale;
  std::vector<char> usable;
};

WorkingDesign make_working(const Matrix& X, const Vector& v, bool intercept, bool standardize) {
  const Index n = X.rows(), p = X.cols();
  const double vsum = v.sum();
  WorkingDesign wd{X, Vector::Zero(p), Vector::Ones(p), std::vector<char>(static_cast<std::size_t>(p), 1)};
  for (Index j = 0; j < p; ++j) {
    const double mean = v.dot(X.col(j)) / vsum;
    const double ss = (v.array() * (X.col(j).array() - mean).square()).sum() / vsum;
    const double sd = n > 1 ? std::sqrt(ss * static_cast<double>(n) / static_cast<double>(n - 1)) : 0.0;
    const double rms = std::sqrt(v.dot(X.col(j).cwiseAbs2()) / vsum);
    const bool constant = sd <= 1e-12 * std::max(1.0, std::abs(mean));
    if (intercept) {
      wd.center(j) = mean;
      if (constant) wd.usable[static_cast<std::size_t>(j)] = 0;
      else if (standardize) wd.scale(j) = sd;
    } else {
      if (rms == 0.0) wd.usable[static_cast<std::size_t>(j)] = 0;
      else if (standardize) wd.scale(j) = constant ? rms : sd;
    }
    if (!wd.usable[static_cast<std::size_t>(j)]) {
      wd.X.col(j).setZero();
    } else {
      wd.X.col(j) = (X.col(j).array() - wd.center(j)) / wd.scale(j);
    }
  }
  return wd;
}

// Coordinate descent on the working design, shared by both families. The
// binomial family runs proximal-Newton (IRLS) outer steps around the same
// weighted least-squares coordinate updates.
class Solver {
 public:
  // With `relative_tol`, a sweep converges once max_j curv_j * change_j^2
  // falls below tol times the null deviance instead of the plain coefficient
  // change test.
  Solver(const Matrix& X, const Vector& y, const Vector& v, Family family, bool intercept, double alpha,
         double tol, int max_iter, bool relative_tol = false)
      : X_(X), y_(y), v_(v), family_(family), intercept_(intercept), alpha_(alpha), tol_(tol),
        max_iter_(max_iter), relative_tol_(relative_tol), n_(X.rows()), p_(X.cols()), beta_(Vector::Zero(X.cols())),
        eta_(Vector::Zero(X.rows())), unit_weights_((v.array() == 1.0).all()) {
    usable_.assign(static_cast<std::size_t>(p_), 1);
    for (Index j = 0; j < p_; ++j)
      if (X_.col(j).squaredNorm() == 0.0) usable_[static_cast<std::size_t>(j)] = 0;
    if (family_ == Family::Gaussian) {
      curv_.resize(p_);
      for (Index j = 0; j < p_; ++j) curv_(j) = weighted_dot(X_.col(j), X_.col(j), v_);
    }
    reset_null();
  }

  void reset_null() {
    beta_.setZero();
    const double ybar = v_.dot(y_) / v_.sum();
    if (!intercept_) b0_ = 0.0;
    else if (family_ == Family::Gaussian) b0_ = ybar;
    else b0_ = std::log(std::clamp(ybar, 1e-12, 1 - 1e-12) / (1 - std::clamp(ybar, 1e-12, 1 - 1e-12)));
    eta_.setConstant(b0_);
    null_deviance_ = deviance();
  }

  double null_lambda() const {
    const Vector g = loss_gradient();
    double m = 0.0;
    for (Index j = 0; j < p_; ++j)
      if (usable_[static_cast<std::size_t>(j)]) m = std::max(m, std::abs(g(j)));
    return m / alpha_;
  }

  // Warm-started solve at `lambda`; `lambda_prev` drives the strong rule.
  void solve(double lambda, double lambda_prev, double kkt_tol) {
    lambda_ = lambda;
    Vector g = loss_gradient();
    std::vector<char> in_set(static_cast<std::size_t>(p_), 0);
    const double strong = alpha_ * (2.0 * lambda - lambda_prev);
    for (Index j = 0; j < p_; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (usable_[js] && (beta_(j) != 0.0 || std::abs(g(j)) >= strong)) in_set[js] = 1;
    }
    double tol = tol_;
    for (int attempt = 0;; ++attempt) {
      while (true) {
        fit_on_set(in_set, tol);
        g = loss_gradient();
        bool added = false;
        for (Index j = 0; j < p_; ++j) {
          const auto js = static_cast<std::size_t>(j);
          if (usable_[js] && !in_set[js] && std::abs(g(j)) > lambda * alpha_) {
            in_set[js] = 1;
            added = true;
          }
        }
        if (!added || exhausted()) break;
      }
      kkt_ = kkt_from_gradient(g);
      if (kkt_ <= kkt_tol || exhausted() || attempt >= 6) break;
      tol *= 0.1;
    }
  }

  double kkt() const { return kkt_; }
  bool exhausted() const { return sweeps_ >= max_iter_; }
  int sweeps() const { return sweeps_; }
  bool hit_cap() const { return hit_cap_; }
  const Vector& beta() const { return beta_; }
  double intercept() const { return b0_; }
  double null_deviance() const { return null_deviance_; }

  double deviance() const {
    if (family_ == Family::Gaussian) return weighted_dot(y_ - eta_, y_ - eta_, v_);
    double nll = 0.0;
    for (Index i = 0; i < n_; ++i) nll += v_(i) * (log1pexp(eta_(i)) - y_(i) * eta_(i));
    return 2.0 * nll;
  }

  double objective() const {
    const double loss = family_ == Family::Gaussian ? deviance() : 0.5 * deviance();
    return loss + lambda_ * ((1 - alpha_) * beta_.squaredNorm() + alpha_ * beta_.lpNorm<1>());
  }

 private:
  double weighted_dot(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                      const Vector& w) const {
    if (unit_weights_ && &w == &v_) return a.dot(b);
    return (a.array() * b.array() * w.array()).sum();
  }

  // Gradient of the unpenalized loss with respect to the working coefficients.
  Vector loss_gradient() const {
    Vector resid(n_);
    if (family_ == Family::Gaussian) {
      resid = (y_ - eta_).cwiseProduct(v_) * 2.0;
    } else {
      for (Index i = 0; i < n_; ++i) resid(i) = v_(i) * (y_(i) - sigmoid(eta_(i)));
    }
    Vector g = -(X_.transpose() * resid);
    intercept_grad_ = -resid.sum();
    return g;
  }

  double kkt_from_gradient(const Vector& g) const {
    double worst = intercept_ ? std::abs(intercept_grad_) : 0.0;
    for (Index j = 0; j < p_; ++j) {
      if (!usable_[static_cast<std::size_t>(j)]) continue;
      const double b = beta_(j);
      double viol;
      if (b == 0.0) {
        viol = std::max(0.0, std::abs(g(j)) - lambda_ * alpha_);
      } else {
        viol = std::abs(g(j) + 2 * lambda_ * (1 - alpha_) * b + lambda_ * alpha_ * (b > 0 ? 1.0 : -1.0));
        if (std::abs(b) >= kCoefCap) viol = 0.0;  // pinned by the separation guard
      }
      worst = std::max(worst, viol);
    }
    return worst;
  }

  double change_measure(double delta, double curvature) const {
    if (!relative_tol_) return std::abs(delta);
    return curvature * delta * delta / std::max(null_deviance_, 1e-300);
  }

  // Minimizes h * sum W (r-target) ^2 + penalty over the coordinates in
  // `set`, where r is the working residual. Returns the largest change.
  double sweep(const std::vector<Index>& coords, const Vector& W, const Vector& curv, double h,
               Vector& r) {
    double max_change = 0.0;
    const double l1 = lambda_ * alpha_;
    const double l2 = 2.0 * lambda_ * (1 - alpha_);
    for (Index j : coords) {
      const double cj = curv(j);
      if (cj <= 0.0) continue;
      const double old = beta_(j);
      const double grad = weighted_dot(X_.col(j), r, W);
      double nb = soft_threshold(2 * h * (grad + cj * old), l1) / (2 * h * cj + l2);
      if (std::abs(nb) > kCoefCap) {
        nb = std::copysign(kCoefCap, nb);
        hit_cap_ = true;
      }
      const double delta = nb - old;
      if (delta != 0.0) {
        r.noalias() -= delta * X_.col(j);
        beta_(j) = nb;
        max_change = std::max(max_change, change_measure(delta, h * cj));
      }
    }
    if (intercept_) {
      const double wsum = unit_weights_ && &W == &v_ ? static_cast<double>(n_) : W.sum();
      const double delta = (unit_weights_ && &W == &v_ ? r.sum() : W.dot(r)) / wsum;
      if (delta != 0.0) {
        r.array() -= delta;
        b0_ += delta;
        max_change = std::max(max_change, change_measure(delta, h * wsum));
      }
    }
    ++sweeps_;
    return max_change;
  }

  void run_cd(const std::vector<char>& in_set, const Vector& W, const Vector& curv, double h, Vector& r,
              double tol) {
    std::vector<Index> set;
    for (Index j = 0; j < p_; ++j)
      if (in_set[static_cast<std::size_t>(j)]) set.push_back(j);
    while (!exhausted()) {
      if (sweep(set, W, curv, h, r) < tol) break;
      std::vector<Index> active;
      for (Index j : set)
        if (beta_(j) != 0.0) active.push_back(j);
      while (!exhausted() && sweep(active, W, curv, h, r) >= tol) {
      }
    }
  }

  void fit_on_set(const std::vector<char>& in_set, double tol) {
    if (family_ == Family::Gaussian) {
      Vector r = y_ - eta_;
      run_cd(in_set, v_, curv_, 1.0, r, tol);
      eta_ = y_ - r;
      return;
    }
    Vector W(n_), r(n_), curv = Vector::Zero(p_);
    for (int outer = 0; !exhausted(); ++outer) {
      for (Index i = 0; i < n_; ++i) {
        const double mu = sigmoid(eta_(i));
        const double var = std::max(mu * (1 - mu), kProbFloor);
        W(i) = v_(i) * var;
        r(i) = (y_(i) - mu) / var;
      }
      for (Index j = 0; j < p_; ++j)
        if (in_set[static_cast<std::size_t>(j)]) curv(j) = (X_.col(j).array().square() * W.array()).sum();
      const Vector beta_old = beta_;
      const double b0_old = b0_;
      const Vector r_old = r;
      run_cd(in_set, W, curv, 0.5, r, tol);
      eta_ += r_old - r;
      double change = change_measure(b0_ - b0_old, 0.5 * W.sum());
      for (Index j = 0; j < p_; ++j)
        if (in_set[static_cast<std::size_t>(j)]) change = std::max(change, change_measure(beta_(j) - beta_old(j), 0.5 * curv(j)));
      if (change < tol) break;
    }
  }

  const Matrix& X_;
  const Vector& y_;
  const Vector& v_;
  Family family_;
  bool intercept_;
  double alpha_;
  double tol_;
  int max_iter_;
  bool relative_tol_;
  Index n_, p_;
  Vector beta_;
  double b0_ = 0.0;
  Vector eta_;
  Vector curv_;
  std::vector<char> usable_;
  bool unit_weights_;
  double lambda_ = 0.0;
  double kkt_ = 0.0;
  double null_deviance_ = 0.0;
  mutable double intercept_grad_ = 0.0;
  int sweeps_ = 0;
  bool hit_cap_ = false;
};

LinearFit to_linear_fit(const Solver& s, const WorkingDesign& wd, Family family, double lambda, double alpha) {
  LinearFit fit;
  fit.family = family;
  fit.beta = s.beta().cwiseQuotient(wd.scale);
  fit.intercept = s.intercept() - wd.center.dot(fit.beta);
  for (Index j = 0; j < fit.beta.size(); ++j)
    if (fit.beta(j) != 0.0) fit.support.push_back(j);
  fit.objective = s.objective();
  fit.lambda_used = lambda;
  fit.alpha = alpha;
  fit.kkt_residual = s.kkt();
  fit.sweeps = s.sweeps();
  fit.converged = !s.exhausted();
  if (!fit.converged) fit.warnings.push_back("coordinate descent hit max_iter");
  if (s.hit_cap()) fit.warnings.push_back("coefficient cap reached (possible separation)");
  return fit;
}

void check_inputs(const Matrix& X, const Vector& y, Family family) {
  if (X.rows() < 1) throw DataError("design has no rows");
  if (y.size() != X.rows()) throw DataError("response length does not match design rows");
  if (!X.allFinite() || !y.allFinite()) throw DataError("non-finite values in design or response");
  if (family == Family::Binomial) {
    for (Index i = 0; i < y.size(); ++i)
      if (y(i) != 0.0 && y(i) != 1.0) throw DataError("binomial response must be 0/1");
  }
}

// Runs a warm-started path. Intermediate fits are certified to
// `kkt_tol_path` and the last one to `kkt_tol_last` (infinity skips the
// certificate). Cross-validation folds use the relative sweep test.
std::vector<LinearFit> run_path(const Matrix& X, const Vector& y, Family family, const PenaltyConfig& cfg,
                                const std::vector<double>& lambdas, const Vector& v, bool early_stop,
                                double kkt_tol_path, double kkt_tol_last, bool relative_tol = false) {
  const WorkingDesign wd = make_working(X, v, cfg.fit_intercept, cfg.standardize);
  Solver solver(wd.X, y, v, family, cfg.fit_intercept, cfg.alpha, cfg.tol, cfg.max_iter, relative_tol);
  const double lmax = solver.null_lambda();
  std::vector<LinearFit> fits;
  double prev_lambda = lmax;
  double prev_ratio = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lambda = lambdas[k];
    const bool last = k + 1 == lambdas.size();
    // At or above lmax the null fit the solver starts from is optimal.
    if (lambda < lmax) solver.solve(lambda, std::max(prev_lambda, lambda), last ? kkt_tol_last : kkt_tol_path);
    fits.push_back(to_linear_fit(solver, wd, family, lambda, cfg.alpha));
    prev_lambda = lambda;
    if (early_stop && solver.null_deviance() > 0) {
      const double ratio = 1.0 - solver.deviance() / solver.null_deviance();
      if (ratio >= 0.999) break;
      if (k > 0 && ratio - prev_ratio < 1e-5 * ratio) break;
      prev_ratio = ratio;
    }
    if (solver.exhausted()) break;
  }
  return fits;
}

}  // namespace

double lambda_max(const Matrix& X, const Vector& y, Family family, const PenaltyConfig& cfg, const Vector& weights) {
  check_inputs(X, y, family);
  const Vector v = resolve_weights(weights, X.rows());
  const WorkingDesign wd = make_working(X, v, cfg.fit_intercept, cfg.standardize);
  Solver solver(wd.X, y, v, family, cfg.fit_intercept, cfg.alpha, cfg.tol, cfg.max_iter);
  return solver.null_lambda();
}

std::vector<LinearFit> fit_path(const Matrix& X, const Vector& y, Family family, const PenaltyConfig& cfg,
                                const std::vector<double>& lambdas, const Vector& weights, bool early_stop) {
  cfg.validate();
  check_inputs(X, y, family);
  for (std::size_t k = 1; k < lambdas.size(); ++k)
    if (!(lambdas[k] < lambdas[k - 1])) throw UsageError("lambda path must be strictly decreasing");
  const Vector v = resolve_weights(weights, X.rows());
  return run_path(X, y, family, cfg, lambdas, v, early_stop, cfg.kkt_tol, cfg.kkt_tol);
}

LinearFit fit_gaussian(const Matrix& X, const Vector& y, const PenaltyConfig& cfg, const Vector& weights) {
  cfg.validate();
  check_inputs(X, y, Family::Gaussian);
  const Vector v = resolve_weights(weights, X.rows());
  return run_path(X, y, Family::Gaussian, cfg, {cfg.lambda}, v, false, cfg.kkt_tol, cfg.kkt_tol).back();
}

LinearFit fit_logistic(const Matrix& X, const Vector& w, const PenaltyConfig& cfg, const Vector& weights) {
  cfg.validate();
  check_inputs(X, w, Family::Binomial);
  const Vector v = resolve_weights(weights, X.rows());
  return run_path(X, w, Family::Binomial, cfg, {cfg.lambda}, v, false, cfg.kkt_tol, cfg.kkt_tol).back();
}

double penalized_objective(const Matrix& X, const Vector& y, Family family, double intercept, const Vector& beta,
                           double lambda, double alpha, const Vector& weights) {
  const Vector v = resolve_weights(weights, X.rows());
  const Vector eta = (X * beta).array() + intercept;
  double loss = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    if (family == Family::Gaussian) loss += v(i) * (y(i) - eta(i)) * (y(i) - eta(i));
    else loss += v(i) * (log1pexp(eta(i)) - y(i) * eta(i));
  }
  return loss + lambda * ((1 - alpha) * beta.squaredNorm() + alpha * beta.lpNorm<1>());
}

double kkt_residual(const Matrix& X, const Vector& y, const LinearFit& fit, const Vector& weights) {
  const Vector v = resolve_weights(weights, X.rows());
  const Vector eta = (X * fit.beta).array() + fit.intercept;
  Vector resid(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    resid(i) = fit.family == Family::Gaussian ? 2.0 * v(i) * (y(i) - eta(i)) : v(i) * (y(i) - sigmoid(eta(i)));
  }
  const Vector g = -(X.transpose() * resid);
  const double lambda = fit.lambda_used, alpha = fit.alpha;
  double worst = std::abs(resid.sum());
  for (Index j = 0; j < X.cols(); ++j) {
    const double b = fit.beta(j);
    if (b == 0.0) worst = std::max(worst, std::abs(g(j)) - lambda * alpha);
    else worst = std::max(worst, std::abs(g(j) + 2 * lambda * (1 - alpha) * b + lambda * alpha * (b > 0 ? 1.0 : -1.0)));
  }
  return std::max(worst, 0.0);
}

Vector predict(const LinearFit& fit, const Matrix& Xnew) {
  if (Xnew.cols() != fit.beta.size())
    throw DataError("predict: design has " + std::to_string(Xnew.cols()) + " columns, fit expects " +
                    std::to_string(fit.beta.size()));
  Vector eta = (Xnew * fit.beta).array() + fit.intercept;
  if (fit.family == Family::Binomial) eta = eta.unaryExpr([](double x) { return sigmoid(x); });
  return eta;
}

namespace {

std::vector<int> assign_folds(const Vector& y, Family family, int k, Rng& rng) {
  const auto n = static_cast<std::size_t>(y.size());
  std::vector<int> fold(n);
  if (family == Family::Gaussian) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return fold;
  }
  // Stratified by class so each training split keeps both labels.
  std::vector<std::size_t> zeros, ones;
  for (std::size_t i = 0; i < n; ++i) (y(static_cast<Index>(i)) != 0.0 ? ones : zeros).push_back(i);
  rng.shuffle(zeros);
  rng.shuffle(ones);
  std::size_t pos = 0;
  for (auto i : zeros) fold[i] = static_cast<int>(pos++ % static_cast<std::size_t>(k));
  for (auto i : ones) fold[i] = static_cast<int>(pos++ % static_cast<std::size_t>(k));
  return fold;
}

double holdout_loss(Family family, double y, double eta) {
  if (family == Family::Gaussian) return (y - eta) * (y - eta);
  const double mu = std::clamp(sigmoid(eta), kProbFloor, 1 - kProbFloor);
  return -2.0 * (y * std::log(mu) + (1 - y) * std::log(1 - mu));
}

}  // namespace

CvPath cv_select(const Matrix& X, const Vector& y, Family family, double alpha, const CvOptions& opts,
                 const Vector& weights) {
  check_inputs(X, y, family);
  const Index n = X.rows();
  if (opts.k_folds < 2 || opts.k_folds > n) throw UsageError("k_folds must lie in [2, n]");
  if (opts.n_lambda < 1) throw UsageError("n_lambda must be positive");
  const Vector v = resolve_weights(weights, n);

  PenaltyConfig cfg;
  cfg.alpha = alpha;
  cfg.standardize = opts.standardize;
  cfg.fit_intercept = opts.fit_intercept;
  cfg.tol = opts.tol;
  cfg.max_iter = opts.max_iter;
  cfg.validate();

  if (family == Family::Binomial) {
    const double pos = y.sum();
    if (pos < 2 || static_cast<double>(n) - pos < 2)
      throw DataError("cross-validation needs at least two observations of each class");
  }

  double lmax = lambda_max(X, y, family, cfg, v);
  if (!(lmax > 0.0)) lmax = 1.0;
  const double ratio = opts.lambda_min_ratio > 0 ? opts.lambda_min_ratio : (n < X.cols() ? 1e-3 : 1e-4);
  CvPath path;
  for (int k = 0; k < opts.n_lambda; ++k) {
    const double frac = opts.n_lambda == 1 ? 0.0 : static_cast<double>(k) / (opts.n_lambda - 1);
    path.lambdas.push_back(lmax * std::pow(ratio, frac));
  }

  Rng rng(opts.seed, 0xC5F01D5ULL);
  std::vector<int> fold = assign_folds(y, family, opts.k_folds, rng);

  const double vsum = v.sum();
  std::vector<std::vector<double>> fold_loss(static_cast<std::size_t>(opts.k_folds));
  std::vector<double> fold_weight(static_cast<std::size_t>(opts.k_folds), 0.0);
  std::size_t usable_len = path.lambdas.size();
  for (int f = 0; f < opts.k_folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty()) continue;
    Matrix Xtr(static_cast<Index>(train.size()), X.cols());
    Vector ytr(static_cast<Index>(train.size())), vtr(static_cast<Index>(train.size()));
    for (Index r = 0; r < Xtr.rows(); ++r) {
      Xtr.row(r) = X.row(train[static_cast<std::size_t>(r)]);
      ytr(r) = y(train[static_cast<std::size_t>(r)]);
      vtr(r) = v(train[static_cast<std::size_t>(r)]);
    }
    if (family == Family::Binomial && (ytr.sum() == 0.0 || ytr.sum() == static_cast<double>(ytr.size())))
      throw DataError("a cross-validation training fold contains a single class");
    const double scale = vtr.sum() / vsum;
    std::vector<double> fold_lambdas;
    for (double l : path.lambdas) fold_lambdas.push_back(l * scale);
    const auto fits = run_path(Xtr, ytr, family, cfg, fold_lambdas, vtr, true, kInf, kInf, true);
    usable_len = std::min(usable_len, fits.size());

    auto& losses = fold_loss[static_cast<std::size_t>(f)];
    double wsum = 0.0;
    for (Index i : test) wsum += v(i);
    fold_weight[static_cast<std::size_t>(f)] = wsum;
    for (const auto& fit : fits) {
      double total = 0.0;
      for (Index i : test) total += v(i) * holdout_loss(family, y(i), fit.intercept + X.row(i).dot(fit.beta));
      losses.push_back(total / wsum);
    }
  }
  usable_len = std::max<std::size_t>(usable_len, 1);
  path.lambdas.resize(usable_len);

  const double total_weight = std::accumulate(fold_weight.begin(), fold_weight.end(), 0.0);
  int used_folds = 0;
  for (double w : fold_weight) used_folds += w > 0 ? 1 : 0;
  for (std::size_t k = 0; k < usable_len; ++k) {
    double mean = 0.0;
    for (std::size_t f = 0; f < fold_loss.size(); ++f)
      if (fold_weight[f] > 0) mean += fold_weight[f] * fold_loss[f][k];
    mean /= total_weight;
    double var = 0.0;
    for (std::size_t f = 0; f < fold_loss.size(); ++f)
      if (fold_weight[f] > 0) var += fold_weight[f] * (fold_loss[f][k] - mean) * (fold_loss[f][k] - mean);
    var /= total_weight;
    path.cv_mean.push_back(mean);
    path.cv_se.push_back(std::sqrt(var / std::max(used_folds - 1, 1)));
  }
  path.index_min = static_cast<std::size_t>(
      std::min_element(path.cv_mean.begin(), path.cv_mean.end()) - path.cv_mean.begin());
  const double threshold = path.cv_mean[path.index_min] + path.cv_se[path.index_min];
  path.index_1se = path.index_min;
  for (std::size_t k = 0; k <= path.index_min; ++k) {
    if (path.cv_mean[k] <= threshold) {
      path.index_1se = k;
      break;
    }
  }
  path.lambda_min = path.lambdas[path.index_min];
  path.lambda_1se = path.lambdas[path.index_1se];
  return path;
}

CvFit fit_cv(const Matrix& X, const Vector& y, Family family, double alpha, const CvOptions& opts,
             const Vector& weights) {
  CvFit out;
  out.path = cv_select(X, y, family, alpha, opts, weights);
  PenaltyConfig cfg;
  cfg.alpha = alpha;
  cfg.standardize = opts.standardize;
  cfg.fit_intercept = opts.fit_intercept;
  cfg.tol = opts.tol;
  cfg.max_iter = opts.max_iter;
  const std::vector<double> lambdas(out.path.lambdas.begin(),
                                    out.path.lambdas.begin() + static_cast<std::ptrdiff_t>(out.path.index_1se) + 1);
  const Vector v = resolve_weights(weights, X.rows());
  out.fit = run_path(X, y, family, cfg, lambdas, v, false, kInf, cfg.kkt_tol).back();
  return out;
}

}  // namespace resbal
