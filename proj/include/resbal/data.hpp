#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace resbal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Observed covariates, binary treatment and outcome for n units.
// Immutable once constructed; the constructor enforces every invariant.
class Dataset {
 public:
  Dataset(Matrix X, Vector W, Vector Y, std::vector<std::string> covariate_names = {});

  const Matrix& X() const { return X_; }
  const Vector& W() const { return W_; }
  const Vector& Y() const { return Y_; }
  const std::vector<std::string>& covariate_names() const { return names_; }

  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  Index n_treated() const { return n_treated_; }
  Index n_control() const { return n() - n_treated_; }
  bool treated(Index i) const { return W_(i) != 0.0; }

  // Same covariates and treatment, outcomes replaced.
  Dataset with_outcome(Vector Y) const;

 private:
  Matrix X_;
  Vector W_;
  Vector Y_;
  std::vector<std::string> names_;
  Index n_treated_ = 0;
};

// Rows belonging to one treatment arm, in increasing input order.
struct ArmView {
  std::vector<Index> indices;
  Matrix X;
  Vector Y;

  Index size() const { return static_cast<Index>(indices.size()); }
};

struct TargetMean {
  Vector xi;
};

struct ArmSplit {
  ArmView control;
  ArmView treated;
};

ArmSplit split_by_arm(const Dataset& data);

// Gathers the listed rows of X (and Y) into an ArmView.
ArmView gather_rows(const Matrix& X, const Vector& Y, std::vector<Index> rows);

TargetMean treated_mean_covariates(const ArmView& treated);

struct ColumnSpec {
  std::string treatment = "w";
  std::string outcome = "y";
};

Dataset load_csv(const std::filesystem::path& path, const ColumnSpec& columns = {});

// Writes `outcome,treatment,covariates...` with 17 significant digits.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const ColumnSpec& columns = {});

}  // namespace resbal
