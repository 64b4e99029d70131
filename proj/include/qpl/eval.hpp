#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qpl/dgp.hpp"

namespace qpl {

/// Deterministic threshold policy: action 1 iff gate . x > 0, ties to 0.
struct LinearPolicy {
  Eigen::Vector2d gate = Eigen::Vector2d::Zero();

  int act(const Eigen::Vector2d& x) const { return gate.dot(x) > 0.0 ? 1 : 0; }

  /// Greedy policy of a linear hypothesis: gate = (b3, b4), or (b2, 0) in 1-D.
  static LinearPolicy greedy(const Eigen::VectorXd& beta);
};

/// Context law used for interventional values.
struct ContextDistribution {
  enum class Kind { BivariateGaussian, Univariate, Empirical };

  Kind kind = Kind::BivariateGaussian;
  double rho = 0.95;
  std::vector<Eigen::Vector2d> contexts;

  static ContextDistribution bivariate_gaussian(double rho);
  /// X ~ N(0,1) in the first coordinate, second coordinate 0.
  static ContextDistribution univariate();
  static ContextDistribution empirical(std::vector<Eigen::Vector2d> contexts);

  void validate() const;
};

struct ValueEstimate {
  enum class Method { ClosedForm, MonteCarlo };

  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::ClosedForm;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

/// E[phi(pi(X), X)] in the 4-vector layout, so that v(h, pi) = beta . mean
/// for every linear h. Exact for all three context laws.
Eigen::Vector4d policy_feature_mean(const LinearPolicy& policy, const ContextDistribution& dist);

/// v(h, pi) = E[h(pi(X), X)] for linear h and a linear threshold policy.
///
/// For centered Gaussian contexts the baseline term vanishes and
///   E[T 1{T' > 0}] = Cov(T, T') / (sd(T') sqrt(2 pi)),
/// with T = b3 X1 + b4 X2 and T' = g1 X1 + g2 X2. A zero gate gives 0.
/// For an empirical law the average is computed exactly.
ValueEstimate value_closed_form(const Eigen::VectorXd& beta, const LinearPolicy& policy,
                                const ContextDistribution& dist);

/// Sample mean of h(pi(x), x) over m context draws with its standard error.
ValueEstimate value_monte_carlo(const Eigen::VectorXd& beta, const LinearPolicy& policy,
                                const ContextDistribution& dist, std::size_t m, std::uint64_t seed);

/// v(beta_true, oracle) - v(beta_true, policy), with the oracle gate
/// (beta3*, beta4*) taken from the configuration.
double regret(const LinearPolicy& policy, const DgpConfig& dgp, const ContextDistribution& dist);
double regret(const LinearPolicy& policy, const Eigen::Vector4d& beta_true, const ContextDistribution& dist);

}  // namespace qpl
