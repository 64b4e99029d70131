#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qpl/dgp.hpp"
#include "qpl/eval.hpp"
#include "qpl/features.hpp"
#include "qpl/loss.hpp"

namespace qpl {

enum class CovarianceMode { Isotropic, InverseHessian };
enum class SelectionRule { FullObjective, ValueOnly };

struct FitConfig {
  double step_size = 0.05;
  /// Descent iterations (inner iterations for the alternating learner).
  std::size_t max_iters = 5000;
  double grad_tol = 1e-6;
  /// Nesterov momentum with function-value restart on top of the constant
  /// step. Off gives plain gradient descent.
  bool accelerate = true;
  /// Start descent from N(0, I) drawn from `seed` instead of the zero vector.
  bool random_init = false;

  /// lambda_n = lambda_scale * sqrt(n).
  double lambda_scale = 1.0;
  /// lambda_n = alternating_lambda_scale * sqrt(n) in fit_alternating.
  double alternating_lambda_scale = 1.6;
  /// Radius C1 of the ball ||beta||_2 <= C1 that fit_alternating projects
  /// onto. Its inner objective is linear in beta plus a bounded loss, so it
  /// has no minimizer without the bound. Infinity disables the projection.
  double alternating_norm_bound = 10.0;
  /// Number of random perturbations of the greedy center (the center itself
  /// is always scored in addition).
  std::size_t n_candidates = 10000;
  /// Candidate standard deviation r_scale / sqrt(n).
  double r_scale = 1.0;
  CovarianceMode covariance_mode = CovarianceMode::Isotropic;
  SelectionRule selection_rule = SelectionRule::FullObjective;
  /// Solution-set threshold e_n = e_n_scale * log(n) / n. Infinity admits all
  /// candidates.
  double e_n_scale = 4.0;
  std::size_t max_outer_iters = 20;
  /// Keep the NC bridge block pinned at zero.
  bool freeze_bridge = false;

  ContextDistribution context = ContextDistribution::bivariate_gaussian(0.95);
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitDiagnostics {
  std::size_t iterations = 0;
  bool converged = false;
  /// Scored candidates including the center.
  std::size_t candidates = 0;
  std::size_t solution_set_size = 0;
  /// Smoothed loss at the returned parameter.
  double loss_at_optimum = std::numeric_limits<double>::quiet_NaN();
  double center_score = std::numeric_limits<double>::quiet_NaN();
  double selected_score = std::numeric_limits<double>::quiet_NaN();
  std::size_t selected_index = 0;
  double lambda_n = 0.0;
  double e_n = 0.0;
  bool covariance_fallback = false;
  std::size_t outer_iterations = 0;
  /// Per-level coefficients (spectral-risk learner).
  std::vector<Eigen::VectorXd> level_betas;
  /// Bridge coefficients (NC learner).
  Eigen::VectorXd h2_beta;
};

struct FitResult {
  HypothesisParams beta;
  LinearPolicy policy;
  /// (iteration, objective) for every accepted descent step or outer loop.
  std::vector<std::pair<std::size_t, double>> objective_trace;
  FitDiagnostics diagnostics;
};

/// Minimize the smoothed loss by constant-step gradient descent and return the
/// greedy policy of the minimizer.
FitResult fit_greedy(const IvDataset& data, double alpha, const TestBasis& basis, const FitConfig& fit,
                     const LossConfig& loss);

/// Random-search approximation of inf_h { V(h) + lambda_n L_n(h) } around the
/// greedy estimate, V(h) being the value of h under its own greedy policy.
FitResult fit_pessimistic_regularized(const IvDataset& data, double alpha, const TestBasis& basis,
                                      const FitConfig& fit, const LossConfig& loss);

/// Sampled max-min over the loss sublevel set S = {L <= min L + e_n}.
FitResult fit_solution_set(const IvDataset& data, double alpha, const TestBasis& basis, const FitConfig& fit,
                           const LossConfig& loss);

/// Alternate closed-form test function, descent on v(h, pi) + lambda_n L_n(h)
/// for fixed per-sample pi, and the greedy per-sample policy update.
FitResult fit_alternating(const IvDataset& data, double alpha, const TestBasis& basis, const FitConfig& fit,
                          const LossConfig& loss, const LinearPolicy& policy_init);

/// Regularized pessimistic learner on the two-part NC loss over joint (h1, h2).
FitResult fit_nc_regularized(const NcDataset& data, double alpha, const TestBasis& exposure_basis,
                             const TestBasis& augmented_basis, const TestBasis& bridge, const FitConfig& fit,
                             const LossConfig& loss);

/// Pessimistic learner for a weighted sum of quantile levels.
FitResult fit_spectral_risk(const IvDataset& data, const std::vector<double>& alphas,
                            const std::vector<double>& weights, const TestBasis& basis, const FitConfig& fit,
                            const LossConfig& loss);

// ---------------------------------------------------------------------------
// Building blocks, exposed for the learners' property tests.

/// Scored random-search neighbourhood of a greedy center. Row 0 is the center.
struct CandidateSearch {
  Eigen::MatrixXd candidates;
  Eigen::VectorXd losses;
  /// V(beta_s): value of each candidate under its own greedy policy.
  Eigen::VectorXd values;
  bool covariance_fallback = false;
};

CandidateSearch search_candidates(const IvLossProblem& problem, const Eigen::VectorXd& center, const FitConfig& fit);

/// Indices s with losses(s) <= min(losses) + e_n, ascending.
std::vector<std::size_t> solution_set(const Eigen::VectorXd& losses, double e_n);

/// Index of the smallest score; ties go to the lowest index.
std::size_t argmin_score(const Eigen::VectorXd& scores);

}  // namespace qpl
