#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "qpl/dgp.hpp"
#include "qpl/features.hpp"

namespace qpl {

enum class ResidualMode { Hard, Smoothed };

struct LossConfig {
  /// Ridge added to M^T M in the inner solve. Unset means the relative default
  /// 1e-8 * trace(M^T M) / d; an explicit 0 gives the exact unregularized dual.
  std::optional<double> ridge;
  double smoothing_temperature = 5.0;
  ResidualMode mode = ResidualMode::Smoothed;

  void validate() const;
};

/// W(D; h): per-sample quantile residuals. Hard entries lie in {-alpha, 1-alpha},
/// smoothed entries in the open interval between them.
struct ResidualVector {
  Eigen::VectorXd w;
  ResidualMode mode = ResidualMode::Hard;
  double temperature = 0.0;
};

/// Maximizing test-function coefficients and the attained dual value.
struct InnerSolution {
  Eigen::VectorXd theta_coef;
  double loss_value = 0.0;
};

/// w_i = 1{y_i <= h_i} - alpha (Hard) or sigmoid(t (h_i - y_i)) - alpha (Smoothed).
ResidualVector residuals(const IvDataset& data, const Eigen::VectorXd& beta, double alpha, const LossConfig& config);

double default_ridge(const DesignMatrix& dm);

/// Closed-form dual
///   theta = (M^T M + ridge I)^{-1} M^T w
///   loss  = (1/n) w^T M theta - (1/2n) theta^T M^T M theta.
/// Throws NumericalError when ridge = 0 and M^T M is singular.
InnerSolution inner_maximize(const Eigen::VectorXd& w, const DesignMatrix& dm, double ridge);

/// Factorizes M^T M + ridge I once and evaluates the dual for many residual
/// vectors over the same design.
class DualProjector {
 public:
  DualProjector(DesignMatrix dm, double ridge);

  InnerSolution solve(const Eigen::VectorXd& w) const;
  /// Dual value for each column of `w` (n x k).
  Eigen::VectorXd values(const Eigen::MatrixXd& w) const;
  /// Derivative weights: d loss / d w = (1/n) * M * direction(theta).
  /// Equals (1/n) M theta when ridge = 0.
  Eigen::VectorXd loss_sensitivity(const InnerSolution& sol) const;

  const DesignMatrix& design() const { return dm_; }
  double ridge() const { return ridge_; }
  Eigen::Index n() const { return dm_.n(); }
  Eigen::Index d() const { return dm_.d(); }

 private:
  DesignMatrix dm_;
  double ridge_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// The IV quantile minimax loss on one dataset with a fixed test basis.
/// Caches the hypothesis features and the factorized dual so repeated
/// evaluations (descent, random search) cost O(n d) each.
class IvLossProblem {
 public:
  IvLossProblem(const IvDataset& data, double alpha, const TestBasis& basis, const LossConfig& config);

  Eigen::Index n() const { return features_.rows(); }
  Eigen::Index dim() const { return features_.cols(); }
  double alpha() const { return alpha_; }
  const LossConfig& config() const { return config_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const DualProjector& projector() const { return projector_; }

  ResidualVector residuals(const Eigen::VectorXd& beta) const;
  InnerSolution inner(const Eigen::VectorXd& beta) const;
  double loss(const Eigen::VectorXd& beta) const;
  /// Smoothed mode only.
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  double loss_and_gradient(const Eigen::VectorXd& beta, Eigen::VectorXd& grad) const;
  /// Symmetrized central-difference Jacobian of the analytic gradient.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& beta) const;
  /// Loss for each row of `candidates` (k x p).
  Eigen::VectorXd losses(const Eigen::MatrixXd& candidates) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd y_;
  double alpha_;
  LossConfig config_;
  DualProjector projector_;
};

double empirical_loss(const IvDataset& data, const Eigen::VectorXd& beta, double alpha, const TestBasis& basis,
                      const LossConfig& config);

/// dL/dbeta for the smoothed loss. Throws UnsupportedModeError in Hard mode.
Eigen::VectorXd loss_gradient(const IvDataset& data, const Eigen::VectorXd& beta, double alpha,
                              const TestBasis& basis, const LossConfig& config);

/// max(0, L(beta) - L(beta_min)).
double excess_loss(const IvDataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_min, double alpha,
                   const TestBasis& basis, const LossConfig& config);

struct NcLossValue {
  double l1 = 0.0;
  double l2 = 0.0;
  double total() const { return l1 + l2; }
};

/// Two-part negative-control loss. l1 projects W(D; h1) - h2(v, a, x) onto the
/// exposure basis over (e, a, x); l2 projects h2(v, a', x) onto the augmented
/// basis over (a', x). h2 is linear in `bridge` features over (v, a, x1, x2).
class NcLossProblem {
 public:
  NcLossProblem(const NcDataset& data, double alpha, const TestBasis& exposure_basis,
                const TestBasis& augmented_basis, const TestBasis& bridge, const LossConfig& config);

  Eigen::Index n() const { return h1_features_.rows(); }
  Eigen::Index h1_dim() const { return h1_features_.cols(); }
  Eigen::Index h2_dim() const { return bridge_obs_.cols(); }
  Eigen::Index dim() const { return h1_dim() + h2_dim(); }

  NcLossValue loss(const Eigen::VectorXd& h1_beta, const Eigen::VectorXd& h2_beta) const;
  /// Joint parameter (h1 block first, then h2 block).
  NcLossValue loss(const Eigen::VectorXd& joint) const;
  /// Gradient of l1 + l2 with respect to the joint parameter. Smoothed only.
  Eigen::VectorXd gradient(const Eigen::VectorXd& joint) const;
  /// Total loss for each row of `candidates` (k x dim()).
  Eigen::VectorXd losses(const Eigen::MatrixXd& candidates) const;

 private:
  Eigen::VectorXd residual_one(const Eigen::VectorXd& h1_beta, const Eigen::VectorXd& h2_beta,
                               Eigen::VectorXd* smoothing_slope) const;

  Eigen::MatrixXd h1_features_;
  Eigen::MatrixXd bridge_obs_;
  Eigen::MatrixXd bridge_aug_;
  Eigen::VectorXd y_;
  double alpha_;
  LossConfig config_;
  DualProjector exposure_;
  DualProjector augmented_;
};

NcLossValue nc_loss(const NcDataset& data, const Eigen::VectorXd& h1_beta, const Eigen::VectorXd& h2_beta,
                    double alpha, const TestBasis& exposure_basis, const TestBasis& augmented_basis,
                    const TestBasis& bridge, const LossConfig& config);

}  // namespace qpl
