#include "qpl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qpl/error.hpp"
#include "qpl/format.hpp"

namespace qpl {

namespace {

// Candidate chunk for batched loss evaluation; bounds the n x k work matrix.
constexpr Eigen::Index kBatch = 256;

template <typename Derived>
auto smoothed_indicator(const Eigen::ArrayBase<Derived>& margin, double temperature) {
  return (1.0 / (1.0 + (-temperature * margin).exp())).eval();
}

}  // namespace

void LossConfig::validate() const {
  if (ridge && !(*ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  if (!(smoothing_temperature > 0.0)) throw ConfigError("smoothing temperature must be positive");
}

double default_ridge(const DesignMatrix& dm) {
  if (dm.d() == 0) return 0.0;
  const double trace = dm.m.colwise().squaredNorm().sum();
  return 1e-8 * trace / static_cast<double>(dm.d());
}

// ---------------------------------------------------------------------------
// DualProjector

DualProjector::DualProjector(DesignMatrix dm, double ridge) : dm_(std::move(dm)), ridge_(ridge) {
  if (!(ridge_ >= 0.0)) throw ConfigError("ridge must be nonnegative");
  if (dm_.n() == 0) throw ConfigError("design matrix has no rows");
  gram_ = dm_.m.transpose() * dm_.m;
  Eigen::MatrixXd normal = gram_;
  normal.diagonal().array() += ridge_;
  llt_.compute(normal);
  const bool failed = llt_.info() != Eigen::Success;
  if (failed || (ridge_ == 0.0 && llt_.rcond() < 1e-13)) {
    throw NumericalError("normal matrix M^T M is singular or ill-conditioned at ridge = " + fmt17(ridge_) +
                         "; use a positive ridge");
  }
}

InnerSolution DualProjector::solve(const Eigen::VectorXd& w) const {
  if (w.size() != dm_.n()) throw ConfigError("residual length does not match design rows");
  const Eigen::VectorXd g = dm_.m.transpose() * w;
  InnerSolution sol;
  sol.theta_coef = llt_.solve(g);
  const double nn = static_cast<double>(dm_.n());
  sol.loss_value = g.dot(sol.theta_coef) / nn - 0.5 * sol.theta_coef.dot(gram_ * sol.theta_coef) / nn;
  return sol;
}

Eigen::VectorXd DualProjector::values(const Eigen::MatrixXd& w) const {
  const Eigen::MatrixXd g = dm_.m.transpose() * w;
  const Eigen::MatrixXd theta = llt_.solve(g);
  const double nn = static_cast<double>(dm_.n());
  const Eigen::MatrixXd gt = gram_ * theta;
  return ((g.array() * theta.array()).colwise().sum() / nn - 0.5 * (theta.array() * gt.array()).colwise().sum() / nn)
      .transpose();
}

Eigen::VectorXd DualProjector::loss_sensitivity(const InnerSolution& sol) const {
  Eigen::VectorXd dir = sol.theta_coef;
  if (ridge_ > 0.0) dir += ridge_ * llt_.solve(sol.theta_coef);
  return dm_.m * dir / static_cast<double>(dm_.n());
}

InnerSolution inner_maximize(const Eigen::VectorXd& w, const DesignMatrix& dm, double ridge) {
  return DualProjector(dm, ridge).solve(w);
}

// ---------------------------------------------------------------------------
// IV loss

namespace {

DualProjector make_projector(DesignMatrix dm, const LossConfig& config) {
  const double ridge = config.ridge ? *config.ridge : default_ridge(dm);
  return DualProjector(std::move(dm), ridge);
}

Eigen::VectorXd iv_outcomes(const IvDataset& data) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i)) = data.samples[i].y;
  return y;
}

ResidualVector make_residuals(const Eigen::VectorXd& h, const Eigen::VectorXd& y, double alpha,
                              const LossConfig& config) {
  ResidualVector r;
  r.mode = config.mode;
  if (config.mode == ResidualMode::Hard) {
    r.w = (y.array() <= h.array()).cast<double>() - alpha;
  } else {
    r.temperature = config.smoothing_temperature;
    r.w = (smoothed_indicator((h - y).array(), config.smoothing_temperature) - alpha).matrix();
  }
  return r;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

}  // namespace

ResidualVector residuals(const IvDataset& data, const Eigen::VectorXd& beta, double alpha,
                         const LossConfig& config) {
  config.validate();
  const Eigen::MatrixXd f = hypothesis_design(data);
  if (beta.size() != f.cols()) throw ConfigError("beta dimension does not match the dataset setting");
  return make_residuals(f * beta, iv_outcomes(data), alpha, config);
}

IvLossProblem::IvLossProblem(const IvDataset& data, double alpha, const TestBasis& basis, const LossConfig& config)
    : features_(hypothesis_design(data)),
      y_(iv_outcomes(data)),
      alpha_(alpha),
      config_(config),
      projector_(make_projector(build_design_matrix(data, basis), config)) {
  check_alpha(alpha);
  config.validate();
}

ResidualVector IvLossProblem::residuals(const Eigen::VectorXd& beta) const {
  if (beta.size() != dim()) throw ConfigError("beta dimension does not match the dataset setting");
  return make_residuals(features_ * beta, y_, alpha_, config_);
}

InnerSolution IvLossProblem::inner(const Eigen::VectorXd& beta) const { return projector_.solve(residuals(beta).w); }

double IvLossProblem::loss(const Eigen::VectorXd& beta) const { return inner(beta).loss_value; }

double IvLossProblem::loss_and_gradient(const Eigen::VectorXd& beta, Eigen::VectorXd& grad) const {
  if (config_.mode != ResidualMode::Smoothed)
    throw UnsupportedModeError("loss gradient requires Smoothed residuals");
  if (beta.size() != dim()) throw ConfigError("beta dimension does not match the dataset setting");
  const double t = config_.smoothing_temperature;
  const Eigen::ArrayXd s = smoothed_indicator((features_ * beta - y_).array(), t);
  const InnerSolution sol = projector_.solve((s - alpha_).matrix());
  const Eigen::VectorXd sens = projector_.loss_sensitivity(sol);
  // dW_i/dbeta = t s_i (1 - s_i) phi_i
  const Eigen::VectorXd weights = (t * s * (1.0 - s)).matrix().cwiseProduct(sens);
  grad = features_.transpose() * weights;
  return sol.loss_value;
}

Eigen::VectorXd IvLossProblem::gradient(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd g;
  loss_and_gradient(beta, g);
  return g;
}

Eigen::MatrixXd IvLossProblem::hessian(const Eigen::VectorXd& beta) const {
  const Eigen::Index p = dim();
  Eigen::MatrixXd h(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(beta(j)));
    Eigen::VectorXd up = beta, down = beta;
    up(j) += step;
    down(j) -= step;
    h.col(j) = (gradient(up) - gradient(down)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd IvLossProblem::losses(const Eigen::MatrixXd& candidates) const {
  if (candidates.cols() != dim()) throw ConfigError("candidate width does not match hypothesis dimension");
  const Eigen::Index k = candidates.rows();
  Eigen::VectorXd out(k);
  for (Eigen::Index start = 0; start < k; start += kBatch) {
    const Eigen::Index len = std::min(kBatch, k - start);
    const Eigen::MatrixXd h = features_ * candidates.middleRows(start, len).transpose();
    Eigen::MatrixXd w;
    if (config_.mode == ResidualMode::Hard) {
      w = ((h.array().colwise() - y_.array()) >= 0.0).cast<double>() - alpha_;
    } else {
      w = (smoothed_indicator(h.array().colwise() - y_.array(), config_.smoothing_temperature) - alpha_).matrix();
    }
    out.segment(start, len) = projector_.values(w);
  }
  return out;
}

double empirical_loss(const IvDataset& data, const Eigen::VectorXd& beta, double alpha, const TestBasis& basis,
                      const LossConfig& config) {
  return IvLossProblem(data, alpha, basis, config).loss(beta);
}

Eigen::VectorXd loss_gradient(const IvDataset& data, const Eigen::VectorXd& beta, double alpha,
                              const TestBasis& basis, const LossConfig& config) {
  if (config.mode != ResidualMode::Smoothed) throw UnsupportedModeError("loss gradient requires Smoothed residuals");
  return IvLossProblem(data, alpha, basis, config).gradient(beta);
}

double excess_loss(const IvDataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_min, double alpha,
                   const TestBasis& basis, const LossConfig& config) {
  const IvLossProblem problem(data, alpha, basis, config);
  return std::max(0.0, problem.loss(beta) - problem.loss(beta_min));
}

// ---------------------------------------------------------------------------
// Negative-control loss

namespace {

Eigen::MatrixXd nc_h1_features(const NcDataset& data) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(data.size()), 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data.samples[i];
    f.row(static_cast<Eigen::Index>(i)) << s.x1, s.x2, s.a * s.x1, s.a * s.x2;
  }
  return f;
}

Eigen::VectorXd nc_outcomes(const NcDataset& data) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i)) = data.samples[i].y;
  return y;
}

}  // namespace

NcLossProblem::NcLossProblem(const NcDataset& data, double alpha, const TestBasis& exposure_basis,
                             const TestBasis& augmented_basis, const TestBasis& bridge, const LossConfig& config)
    : h1_features_(nc_h1_features(data)),
      bridge_obs_(build_design_matrix(nc_bridge_inputs(data, false), bridge).m),
      bridge_aug_(build_design_matrix(nc_bridge_inputs(data, true), bridge).m),
      y_(nc_outcomes(data)),
      alpha_(alpha),
      config_(config),
      exposure_(make_projector(build_design_matrix(nc_exposure_inputs(data), exposure_basis), config)),
      augmented_(make_projector(build_design_matrix(nc_augmented_inputs(data), augmented_basis), config)) {
  check_alpha(alpha);
  config.validate();
}

Eigen::VectorXd NcLossProblem::residual_one(const Eigen::VectorXd& h1_beta, const Eigen::VectorXd& h2_beta,
                                            Eigen::VectorXd* smoothing_slope) const {
  if (h1_beta.size() != h1_dim() || h2_beta.size() != h2_dim())
    throw ConfigError("NC parameter blocks have wrong dimensions");
  const Eigen::VectorXd h = h1_features_ * h1_beta;
  Eigen::VectorXd w;
  if (config_.mode == ResidualMode::Hard) {
    w = (y_.array() <= h.array()).cast<double>() - alpha_;
  } else {
    const double t = config_.smoothing_temperature;
    const Eigen::ArrayXd s = smoothed_indicator((h - y_).array(), t);
    w = (s - alpha_).matrix();
    if (smoothing_slope) *smoothing_slope = (t * s * (1.0 - s)).matrix();
  }
  return w - bridge_obs_ * h2_beta;
}

NcLossValue NcLossProblem::loss(const Eigen::VectorXd& h1_beta, const Eigen::VectorXd& h2_beta) const {
  NcLossValue v;
  v.l1 = exposure_.solve(residual_one(h1_beta, h2_beta, nullptr)).loss_value;
  v.l2 = augmented_.solve(bridge_aug_ * h2_beta).loss_value;
  return v;
}

NcLossValue NcLossProblem::loss(const Eigen::VectorXd& joint) const {
  if (joint.size() != dim()) throw ConfigError("joint NC parameter has wrong dimension");
  return loss(joint.head(h1_dim()), joint.tail(h2_dim()));
}

Eigen::VectorXd NcLossProblem::gradient(const Eigen::VectorXd& joint) const {
  if (config_.mode != ResidualMode::Smoothed)
    throw UnsupportedModeError("loss gradient requires Smoothed residuals");
  if (joint.size() != dim()) throw ConfigError("joint NC parameter has wrong dimension");
  const Eigen::VectorXd h1 = joint.head(h1_dim());
  const Eigen::VectorXd h2 = joint.tail(h2_dim());
  Eigen::VectorXd slope;
  const InnerSolution one = exposure_.solve(residual_one(h1, h2, &slope));
  const InnerSolution two = augmented_.solve(bridge_aug_ * h2);
  const Eigen::VectorXd sens_one = exposure_.loss_sensitivity(one);
  const Eigen::VectorXd sens_two = augmented_.loss_sensitivity(two);

  Eigen::VectorXd g(dim());
  g.head(h1_dim()) = h1_features_.transpose() * slope.cwiseProduct(sens_one);
  g.tail(h2_dim()) = bridge_aug_.transpose() * sens_two - bridge_obs_.transpose() * sens_one;
  return g;
}

Eigen::VectorXd NcLossProblem::losses(const Eigen::MatrixXd& candidates) const {
  if (candidates.cols() != dim()) throw ConfigError("candidate width does not match NC parameter dimension");
  const Eigen::Index k = candidates.rows();
  Eigen::VectorXd out(k);
  for (Eigen::Index start = 0; start < k; start += kBatch) {
    const Eigen::Index len = std::min(kBatch, k - start);
    const auto block = candidates.middleRows(start, len);
    const Eigen::MatrixXd h = h1_features_ * block.leftCols(h1_dim()).transpose();
    const Eigen::MatrixXd b2 = block.rightCols(h2_dim()).transpose();
    Eigen::MatrixXd w;
    if (config_.mode == ResidualMode::Hard) {
      w = ((h.array().colwise() - y_.array()) >= 0.0).cast<double>() - alpha_;
    } else {
      w = (smoothed_indicator(h.array().colwise() - y_.array(), config_.smoothing_temperature) - alpha_).matrix();
    }
    w -= bridge_obs_ * b2;
    out.segment(start, len) = exposure_.values(w) + augmented_.values(bridge_aug_ * b2);
  }
  return out;
}

NcLossValue nc_loss(const NcDataset& data, const Eigen::VectorXd& h1_beta, const Eigen::VectorXd& h2_beta,
                    double alpha, const TestBasis& exposure_basis, const TestBasis& augmented_basis,
                    const TestBasis& bridge, const LossConfig& config) {
  return NcLossProblem(data, alpha, exposure_basis, augmented_basis, bridge, config).loss(h1_beta, h2_beta);
}

}  // namespace qpl
