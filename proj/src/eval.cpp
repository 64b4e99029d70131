#include "qpl/eval.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "qpl/error.hpp"
#include "qpl/features.hpp"
#include "qpl/rng.hpp"

namespace qpl {

LinearPolicy LinearPolicy::greedy(const Eigen::VectorXd& beta) {
  const Eigen::Vector4d b = as_four(beta);
  return LinearPolicy{Eigen::Vector2d(b(2), b(3))};
}

ContextDistribution ContextDistribution::bivariate_gaussian(double rho) {
  ContextDistribution d;
  d.kind = Kind::BivariateGaussian;
  d.rho = rho;
  d.validate();
  return d;
}

ContextDistribution ContextDistribution::univariate() {
  ContextDistribution d;
  d.kind = Kind::Univariate;
  d.rho = 0.0;
  return d;
}

ContextDistribution ContextDistribution::empirical(std::vector<Eigen::Vector2d> contexts) {
  ContextDistribution d;
  d.kind = Kind::Empirical;
  d.contexts = std::move(contexts);
  d.validate();
  return d;
}

void ContextDistribution::validate() const {
  if (kind == Kind::BivariateGaussian && !(rho > -1.0 && rho < 1.0))
    throw ConfigError("context correlation must lie in (-1,1)");
  if (kind == Kind::Empirical && contexts.empty()) throw ConfigError("empirical context law needs at least one point");
}

namespace {

double h_value(const Eigen::Vector4d& b, int a, const Eigen::Vector2d& x) {
  return b(0) * x(0) + b(1) * x(1) + a * (b(2) * x(0) + b(3) * x(1));
}

}  // namespace

Eigen::Vector4d policy_feature_mean(const LinearPolicy& policy, const ContextDistribution& dist) {
  dist.validate();
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  if (dist.kind == ContextDistribution::Kind::Empirical) {
    for (const auto& x : dist.contexts) {
      const int a = policy.act(x);
      mean += Eigen::Vector4d(x(0), x(1), a * x(0), a * x(1));
    }
    return mean / static_cast<double>(dist.contexts.size());
  }

  // Centered Gaussian contexts: E[X] = 0 and E[X 1{g.X > 0}] = S g / (sd(g.X) sqrt(2 pi)).
  const double rho = dist.kind == ContextDistribution::Kind::Univariate ? 0.0 : dist.rho;
  double g1 = policy.gate(0), g2 = policy.gate(1);
  if (dist.kind == ContextDistribution::Kind::Univariate) g2 = 0.0;
  const double var_gate = g1 * g1 + g2 * g2 + 2.0 * rho * g1 * g2;
  if (!(var_gate > 0.0)) return mean;
  const double scale = 1.0 / (std::sqrt(var_gate) * std::sqrt(2.0 * std::numbers::pi));
  mean(2) = (g1 + rho * g2) * scale;
  mean(3) = dist.kind == ContextDistribution::Kind::Univariate ? 0.0 : (g2 + rho * g1) * scale;
  return mean;
}

ValueEstimate value_closed_form(const Eigen::VectorXd& beta, const LinearPolicy& policy,
                                const ContextDistribution& dist) {
  ValueEstimate est;
  est.method = ValueEstimate::Method::ClosedForm;
  est.value = as_four(beta).dot(policy_feature_mean(policy, dist));
  return est;
}

ValueEstimate value_monte_carlo(const Eigen::VectorXd& beta, const LinearPolicy& policy,
                                const ContextDistribution& dist, std::size_t m, std::uint64_t seed) {
  dist.validate();
  if (m == 0) throw ConfigError("Monte Carlo draw count must be positive");
  const Eigen::Vector4d b = as_four(beta);
  Rng rng = make_rng(seed, Stream::MonteCarlo);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho_c = std::sqrt(1.0 - dist.rho * dist.rho);

  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    switch (dist.kind) {
      case ContextDistribution::Kind::BivariateGaussian: {
        const double g1 = normal(rng);
        const double g2 = normal(rng);
        x << g1, dist.rho * g1 + rho_c * g2;
        break;
      }
      case ContextDistribution::Kind::Univariate:
        x << normal(rng), 0.0;
        break;
      case ContextDistribution::Kind::Empirical: {
        std::uniform_int_distribution<std::size_t> pick(0, dist.contexts.size() - 1);
        x = dist.contexts[pick(rng)];
        break;
      }
    }
    const double v = h_value(b, policy.act(x), x);
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  ValueEstimate est;
  est.method = ValueEstimate::Method::MonteCarlo;
  est.value = mean;
  est.draws = m;
  est.seed = seed;
  est.std_error = std::sqrt(m2 / static_cast<double>(m)) / std::sqrt(static_cast<double>(m));
  return est;
}

double regret(const LinearPolicy& policy, const Eigen::Vector4d& beta_true, const ContextDistribution& dist) {
  const LinearPolicy oracle = LinearPolicy::greedy(beta_true);
  const Eigen::VectorXd b = beta_true;
  return value_closed_form(b, oracle, dist).value - value_closed_form(b, policy, dist).value;
}

double regret(const LinearPolicy& policy, const DgpConfig& dgp, const ContextDistribution& dist) {
  return regret(policy, dgp.beta_true, dist);
}

}  // namespace qpl
