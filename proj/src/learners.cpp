#include "qpl/learners.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "qpl/error.hpp"
#include "qpl/rng.hpp"

namespace qpl {

void FitConfig::validate() const {
  if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
  if (max_iters == 0) throw ConfigError("max_iters must be positive");
  if (!(grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
  if (!(lambda_scale > 0.0) || !(alternating_lambda_scale > 0.0)) throw ConfigError("lambda scales must be positive");
  if (n_candidates == 0) throw ConfigError("n_candidates must be positive");
  if (!(r_scale > 0.0)) throw ConfigError("r_scale must be positive");
  if (!(e_n_scale >= 0.0)) throw ConfigError("e_n_scale must be nonnegative");
  if (max_outer_iters == 0) throw ConfigError("max_outer_iters must be positive");
  if (!(alternating_norm_bound > 0.0)) throw ConfigError("alternating_norm_bound must be positive");
  context.validate();
}

namespace {

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct DescentOutcome {
  Eigen::VectorXd x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::pair<std::size_t, double>> trace;
};

void check_finite(double f, const Eigen::VectorXd& g, std::size_t iteration) {
  if (!std::isfinite(f) || !g.allFinite())
    throw NumericalError("descent diverged at iteration " + std::to_string(iteration));
}

void project(Eigen::VectorXd& x, double radius) {
  const double norm = x.norm();
  if (norm > radius) x *= radius / norm;
}

// Norm of the projected-gradient step; the plain gradient norm without a bound.
double stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double step, double radius) {
  if (!std::isfinite(radius)) return g.norm();
  Eigen::VectorXd moved = x - step * g;
  project(moved, radius);
  return (x - moved).norm() / step;
}

// Constant-step gradient descent, projected onto the ball of `radius`. With
// `accelerate`, Nesterov momentum is restarted whenever a step would raise the
// objective by more than 1e-9, so every accepted step is monotone. A rejected
// plain step ends the descent.
DescentOutcome descend(const Objective& objective, Eigen::VectorXd x0, const FitConfig& fit,
                       double radius = std::numeric_limits<double>::infinity()) {
  DescentOutcome out;
  Eigen::VectorXd gx;
  project(x0, radius);
  double f = objective(x0, &gx);
  check_finite(f, gx, 0);
  out.trace.emplace_back(0, f);
  Eigen::VectorXd x = std::move(x0);
  if (stationarity(x, gx, fit.step_size, radius) < fit.grad_tol) {
    out.x = x;
    out.f = f;
    out.converged = true;
    return out;
  }

  Eigen::VectorXd y = x, gy, xn, gn;
  bool momentum = false;
  double t = 1.0;
  for (std::size_t it = 1; it <= fit.max_iters; ++it) {
    out.iterations = it;
    if (momentum) {
      const double fy = objective(y, &gy);
      check_finite(fy, gy, it);
    } else {
      gy = gx;
    }
    xn = y - fit.step_size * gy;
    project(xn, radius);
    const double fn = objective(xn, &gn);
    check_finite(fn, gn, it);
    if (fn > f + 1e-9) {
      if (momentum) {
        y = x;
        momentum = false;
        t = 1.0;
        continue;
      }
      break;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double coef = (t - 1.0) / tn;
    if (fit.accelerate && coef > 0.0) {
      y = xn + coef * (xn - x);
      project(y, radius);
      momentum = true;
    } else {
      y = xn;
      momentum = false;
    }
    x = xn;
    f = fn;
    gx = gn;
    t = fit.accelerate ? tn : 1.0;
    out.trace.emplace_back(it, f);
    if (stationarity(x, gx, fit.step_size, radius) < fit.grad_tol) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.f = f;
  return out;
}

Eigen::VectorXd initial_point(Eigen::Index dim, const FitConfig& fit, std::uint64_t salt) {
  if (!fit.random_init) return Eigen::VectorXd::Zero(dim);
  Rng rng = make_rng(derive_seed({fit.seed, salt}), Stream::Init);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(dim);
  for (Eigen::Index j = 0; j < dim; ++j) x(j) = normal(rng);
  return x;
}

Eigen::MatrixXd numeric_hessian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                const Eigen::VectorXd& at) {
  const Eigen::Index p = at.size();
  Eigen::MatrixXd h(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(at(j)));
    Eigen::VectorXd up = at, down = at;
    up(j) += step;
    down(j) -= step;
    h.col(j) = (grad(up) - grad(down)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

// Lower Cholesky factor of the candidate covariance. InverseHessian rescales
// H^{-1} so its mean variance matches the isotropic sigma^2; a Hessian that is
// not positive definite falls back to isotropic.
Eigen::MatrixXd candidate_factor(Eigen::Index p, double sigma, const FitConfig& fit,
                                 const std::function<Eigen::MatrixXd()>& hessian, bool& fallback) {
  fallback = false;
  const Eigen::MatrixXd iso = sigma * Eigen::MatrixXd::Identity(p, p);
  if (fit.covariance_mode == CovarianceMode::Isotropic) return iso;
  const Eigen::MatrixXd h = hessian();
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (!h.allFinite() || llt.info() != Eigen::Success) {
    fallback = true;
    return iso;
  }
  const Eigen::MatrixXd hinv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const double tr = hinv.trace();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    fallback = true;
    return iso;
  }
  const Eigen::MatrixXd cov = sigma * sigma * static_cast<double>(p) / tr * hinv;
  Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
  if (cov_llt.info() != Eigen::Success) {
    fallback = true;
    return iso;
  }
  return cov_llt.matrixL();
}

// Center in row 0 followed by n_candidates draws of center + L z.
Eigen::MatrixXd sample_around(const Eigen::VectorXd& center, const Eigen::MatrixXd& factor, const FitConfig& fit) {
  const Eigen::Index p = center.size();
  const auto rows = static_cast<Eigen::Index>(fit.n_candidates) + 1;
  Eigen::MatrixXd c(rows, p);
  c.row(0) = center.transpose();
  Rng rng = make_rng(fit.seed, Stream::Candidates);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(p);
  for (Eigen::Index s = 1; s < rows; ++s) {
    for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
    c.row(s) = (center + factor * z).transpose();
  }
  return c;
}

Eigen::VectorXd greedy_values(const Eigen::MatrixXd& candidates, const ContextDistribution& context) {
  Eigen::VectorXd v(candidates.rows());
  for (Eigen::Index s = 0; s < candidates.rows(); ++s) {
    const Eigen::VectorXd b = candidates.row(s).transpose();
    v(s) = as_four(b).dot(policy_feature_mean(LinearPolicy::greedy(b), context));
  }
  return v;
}

void require_smoothed(const LossConfig& loss) {
  if (loss.mode != ResidualMode::Smoothed) throw UnsupportedModeError("descent-based learners need Smoothed residuals");
}

FitResult greedy_on(const IvLossProblem& problem, const FitConfig& fit, std::uint64_t salt) {
  const Objective objective = [&problem](const Eigen::VectorXd& b, Eigen::VectorXd* g) {
    return problem.loss_and_gradient(b, *g);
  };
  DescentOutcome d = descend(objective, initial_point(problem.dim(), fit, salt), fit);
  FitResult r;
  r.beta.beta = d.x;
  r.policy = LinearPolicy::greedy(d.x);
  r.objective_trace = std::move(d.trace);
  r.diagnostics.iterations = d.iterations;
  r.diagnostics.converged = d.converged;
  r.diagnostics.loss_at_optimum = d.f;
  return r;
}

void check_dataset(std::size_t n) {
  if (n == 0) throw ConfigError("dataset is empty");
}

double lambda_for(double scale, Eigen::Index n) { return scale * std::sqrt(static_cast<double>(n)); }

}  // namespace

std::size_t argmin_score(const Eigen::VectorXd& scores) {
  std::size_t best = 0;
  for (Eigen::Index s = 1; s < scores.size(); ++s) {
    if (scores(s) < scores(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(s);
  }
  return best;
}

std::vector<std::size_t> solution_set(const Eigen::VectorXd& losses, double e_n) {
  std::vector<std::size_t> out;
  if (losses.size() == 0) return out;
  const double threshold = losses.minCoeff() + e_n;
  for (Eigen::Index s = 0; s < losses.size(); ++s) {
    if (losses(s) <= threshold) out.push_back(static_cast<std::size_t>(s));
  }
  return out;
}

CandidateSearch search_candidates(const IvLossProblem& problem, const Eigen::VectorXd& center, const FitConfig& fit) {
  CandidateSearch cs;
  const double sigma = fit.r_scale / std::sqrt(static_cast<double>(problem.n()));
  const Eigen::MatrixXd factor = candidate_factor(
      center.size(), sigma, fit, [&] { return problem.hessian(center); }, cs.covariance_fallback);
  cs.candidates = sample_around(center, factor, fit);
  cs.losses = problem.losses(cs.candidates);
  cs.values = greedy_values(cs.candidates, fit.context);
  return cs;
}

FitResult fit_greedy(const IvDataset& data, double alpha, const TestBasis& basis, const FitConfig& fit,
                     const LossConfig& loss) {
  fit.validate();
  check_dataset(data.size());
  require_smoothed(loss);
  const IvLossProblem problem(data, alpha, basis, loss);
  return greedy_on(problem, fit, 0);
}

FitResult fit_pessimistic_regularized(const IvDataset& data, double alpha, const TestBasis& basis,
                                      const FitConfig& fit, const LossConfig& loss) {
  fit.validate();
  check_dataset(data.size());
  require_smoothed(loss);
  const IvLossProblem problem(data, alpha, basis, loss);
  FitResult greedy = greedy_on(problem, fit, 0);

  const CandidateSearch cs = search_candidates(problem, greedy.beta.beta, fit);
  const double lambda_n = lambda_for(fit.lambda_scale, problem.n());
  const Eigen::VectorXd scores =
      fit.selection_rule == SelectionRule::FullObjective ? Eigen::VectorXd(cs.values + lambda_n * cs.losses) : cs.values;
  const std::size_t pick = argmin_score(scores);
  const auto row = static_cast<Eigen::Index>(pick);

  FitResult r;
  r.beta.beta = cs.candidates.row(row).transpose();
  r.policy = LinearPolicy::greedy(r.beta.beta);
  r.objective_trace = std::move(greedy.objective_trace);
  r.diagnostics = greedy.diagnostics;
  r.diagnostics.candidates = static_cast<std::size_t>(cs.candidates.rows());
  r.diagnostics.loss_at_optimum = cs.losses(row);
  r.diagnostics.center_score = scores(0);
  r.diagnostics.selected_score = scores(row);
  r.diagnostics.selected_index = pick;
  r.diagnostics.lambda_n = lambda_n;
  r.diagnostics.covariance_fallback = cs.covariance_fallback;
  return r;
}

FitResult fit_solution_set(const IvDataset& data, double alpha, const TestBasis& basis, const FitConfig& fit,
                           const LossConfig& loss) {
  fit.validate();
  check_dataset(data.size());
  require_smoothed(loss);
  const IvLossProblem problem(data, alpha, basis, loss);
  FitResult greedy = greedy_on(problem, fit, 0);
  const CandidateSearch cs = search_candidates(problem, greedy.beta.beta, fit);

  const double nn = static_cast<double>(problem.n());
  const double e_n = std::isinf(fit.e_n_scale) ? fit.e_n_scale : fit.e_n_scale * std::log(nn) / nn;
  const std::vector<std::size_t> members = solution_set(cs.losses, e_n);

  // v(beta_s, pi_j) = beta_s . E[phi(pi_j(X), X)]; worst case over S for each
  // candidate policy j, in column blocks.
  const Eigen::Index k = cs.candidates.rows();
  Eigen::MatrixXd set_betas(static_cast<Eigen::Index>(members.size()), 4);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Eigen::VectorXd b = cs.candidates.row(static_cast<Eigen::Index>(members[i])).transpose();
    set_betas.row(static_cast<Eigen::Index>(i)) = as_four(b).transpose();
  }
  Eigen::VectorXd worst(k);
  constexpr Eigen::Index kBlock = 512;
  Eigen::MatrixXd means(4, kBlock);
  for (Eigen::Index start = 0; start < k; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, k - start);
    for (Eigen::Index j = 0; j < len; ++j) {
      const Eigen::VectorXd b = cs.candidates.row(start + j).transpose();
      means.col(j) = policy_feature_mean(LinearPolicy::greedy(b), fit.context);
    }
    worst.segment(start, len) = (set_betas * means.leftCols(len)).colwise().minCoeff().transpose();
  }

  // Max-min; near-ties resolved toward the better-fitting candidate, then index.
  Eigen::Index pick = 0;
  for (Eigen::Index j = 1; j < k; ++j) {
    const double tol = 1e-12 * std::max(1.0, std::abs(worst(pick)));
    if (worst(j) > worst(pick) + tol || (std::abs(worst(j) - worst(pick)) <= tol && cs.losses(j) < cs.losses(pick)))
      pick = j;
  }

  FitResult r;
  r.beta.beta = cs.candidates.row(pick).transpose();
  r.policy = LinearPolicy::greedy(r.beta.beta);
  r.objective_trace = std::move(greedy.objective_trace);
  r.diagnostics = greedy.diagnostics;
  r.diagnostics.candidates = static_cast<std::size_t>(k);
  r.diagnostics.solution_set_size = members.size();
  r.diagnostics.e_n = e_n;
  r.diagnostics.loss_at_optimum = cs.losses(pick);
  r.diagnostics.selected_score = worst(pick);
  r.diagnostics.center_score = worst(0);
  r.diagnostics.selected_index = static_cast<std::size_t>(pick);
  r.diagnostics.covariance_fallback = cs.covariance_fallback;
  return r;
}

FitResult fit_alternating(const IvDataset& data, double alpha, const TestBasis& basis, const FitConfig& fit,
                          const LossConfig& loss, const LinearPolicy& policy_init) {
  fit.validate();
  check_dataset(data.size());
  require_smoothed(loss);
  const IvLossProblem problem(data, alpha, basis, loss);
  const double lambda_n = lambda_for(fit.alternating_lambda_scale, problem.n());
  const std::size_t n = data.size();

  std::vector<Eigen::Vector2d> contexts(n);
  for (std::size_t i = 0; i < n; ++i) contexts[i] = Eigen::Vector2d(data.samples[i].x1, data.samples[i].x2);
  std::vector<int> actions(n);
  for (std::size_t i = 0; i < n; ++i) actions[i] = policy_init.act(contexts[i]);

  Eigen::VectorXd beta = initial_point(problem.dim(), fit, 0);
  FitResult best;
  double best_objective = -std::numeric_limits<double>::infinity();
  FitResult r;
  bool converged = false;
  std::size_t outer = 0;
  std::vector<std::pair<std::size_t, double>> trace;

  while (outer < fit.max_outer_iters) {
    ++outer;
    // Empirical v(h, pi) = beta . mean_i phi(pi_i, x_i) under the current per-sample policy.
    Eigen::VectorXd phi_mean = Eigen::VectorXd::Zero(problem.dim());
    for (std::size_t i = 0; i < n; ++i) phi_mean += hypothesis_features(actions[i], contexts[i], data.setting);
    phi_mean /= static_cast<double>(n);

    const Objective objective = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g) {
      const double l = problem.loss_and_gradient(b, *g);
      *g = phi_mean + lambda_n * *g;
      return phi_mean.dot(b) + lambda_n * l;
    };
    const DescentOutcome d = descend(objective, beta, fit, fit.alternating_norm_bound);
    beta = d.x;
    trace.emplace_back(outer, d.f);

    // Per-context LP over a binary action: greedy assignment.
    const LinearPolicy greedy = LinearPolicy::greedy(beta);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = greedy.act(contexts[i]);
      if (a != actions[i]) ++changed;
      actions[i] = a;
    }

    r.beta.beta = beta;
    r.policy = greedy;
    r.diagnostics.iterations += d.iterations;
    r.diagnostics.loss_at_optimum = problem.loss(beta);
    r.diagnostics.selected_score = d.f;
    if (d.f > best_objective) {
      best_objective = d.f;
      best = r;
    }
    if (changed == 0) {
      converged = true;
      break;
    }
  }

  FitResult& out = converged ? r : best;
  out.objective_trace = std::move(trace);
  out.diagnostics.converged = converged;
  out.diagnostics.outer_iterations = outer;
  out.diagnostics.lambda_n = lambda_n;
  return out;
}

FitResult fit_nc_regularized(const NcDataset& data, double alpha, const TestBasis& exposure_basis,
                             const TestBasis& augmented_basis, const TestBasis& bridge, const FitConfig& fit,
                             const LossConfig& loss) {
  fit.validate();
  check_dataset(data.size());
  require_smoothed(loss);
  const NcLossProblem problem(data, alpha, exposure_basis, augmented_basis, bridge, loss);
  const Eigen::Index p1 = problem.h1_dim();
  const Eigen::Index p = fit.freeze_bridge ? p1 : problem.dim();

  // Optimization variable: the h1 block alone when the bridge is frozen.
  const auto to_joint = [&](const Eigen::VectorXd& v) {
    if (!fit.freeze_bridge) return v;
    Eigen::VectorXd j = Eigen::VectorXd::Zero(problem.dim());
    j.head(p1) = v;
    return j;
  };
  const auto grad_of = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const Eigen::VectorXd g = problem.gradient(to_joint(v));
    return fit.freeze_bridge ? Eigen::VectorXd(g.head(p1)) : g;
  };
  const Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g) {
    *g = grad_of(v);
    return problem.loss(to_joint(v)).total();
  };
  const DescentOutcome d = descend(objective, initial_point(p, fit, 0), fit);

  bool fallback = false;
  const double sigma = fit.r_scale / std::sqrt(static_cast<double>(problem.n()));
  const Eigen::MatrixXd factor =
      candidate_factor(p, sigma, fit, [&] { return numeric_hessian(grad_of, d.x); }, fallback);
  const Eigen::MatrixXd raw = sample_around(d.x, factor, fit);
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(raw.rows(), problem.dim());
  joint.leftCols(p) = raw;

  const Eigen::VectorXd losses = problem.losses(joint);
  const Eigen::VectorXd values = greedy_values(joint.leftCols(p1), fit.context);
  const double lambda_n = lambda_for(fit.lambda_scale, problem.n());
  const Eigen::VectorXd scores =
      fit.selection_rule == SelectionRule::FullObjective ? Eigen::VectorXd(values + lambda_n * losses) : values;
  const std::size_t pick = argmin_score(scores);
  const auto row = static_cast<Eigen::Index>(pick);

  FitResult r;
  r.beta.beta = joint.row(row).head(p1).transpose();
  r.policy = LinearPolicy::greedy(r.beta.beta);
  r.objective_trace = d.trace;
  r.diagnostics.iterations = d.iterations;
  r.diagnostics.converged = d.converged;
  r.diagnostics.candidates = static_cast<std::size_t>(joint.rows());
  r.diagnostics.loss_at_optimum = losses(row);
  r.diagnostics.center_score = scores(0);
  r.diagnostics.selected_score = scores(row);
  r.diagnostics.selected_index = pick;
  r.diagnostics.lambda_n = lambda_n;
  r.diagnostics.covariance_fallback = fallback;
  r.diagnostics.h2_beta = joint.row(row).tail(problem.h2_dim()).transpose();
  return r;
}

FitResult fit_spectral_risk(const IvDataset& data, const std::vector<double>& alphas,
                            const std::vector<double>& weights, const TestBasis& basis, const FitConfig& fit,
                            const LossConfig& loss) {
  fit.validate();
  if (alphas.empty()) throw ConfigError("at least one quantile level is required");
  if (alphas.size() != weights.size()) throw ConfigError("alphas and weights must have equal length");
  for (double w : weights)
    if (!std::isfinite(w)) throw ConfigError("weights must be finite");
  check_dataset(data.size());
  require_smoothed(loss);

  const std::size_t m = alphas.size();
  std::vector<IvLossProblem> problems;
  problems.reserve(m);
  for (double a : alphas) problems.emplace_back(data, a, basis, loss);
  const Eigen::Index q = problems.front().dim();

  Eigen::VectorXd center(q * static_cast<Eigen::Index>(m));
  FitDiagnostics greedy_diag;
  std::vector<std::pair<std::size_t, double>> trace;
  for (std::size_t i = 0; i < m; ++i) {
    FitResult g = greedy_on(problems[i], fit, i);
    center.segment(static_cast<Eigen::Index>(i) * q, q) = g.beta.beta;
    greedy_diag.iterations += g.diagnostics.iterations;
    if (i == 0) {
      greedy_diag.converged = g.diagnostics.converged;
      trace = std::move(g.objective_trace);
    } else {
      greedy_diag.converged = greedy_diag.converged && g.diagnostics.converged;
    }
  }

  bool fallback = false;
  const double sigma = fit.r_scale / std::sqrt(static_cast<double>(problems.front().n()));
  const auto stacked_hessian = [&] {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(center.size(), center.size());
    for (std::size_t i = 0; i < m; ++i) {
      const auto off = static_cast<Eigen::Index>(i) * q;
      h.block(off, off, q, q) = problems[i].hessian(center.segment(off, q));
    }
    return h;
  };
  const Eigen::MatrixXd factor = candidate_factor(center.size(), sigma, fit, stacked_hessian, fallback);
  const Eigen::MatrixXd cands = sample_around(center, factor, fit);

  const Eigen::Index k = cands.rows();
  Eigen::VectorXd weighted_value = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd total_loss = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < m; ++i) {
    const auto off = static_cast<Eigen::Index>(i) * q;
    const Eigen::MatrixXd block = cands.middleCols(off, q);
    weighted_value += weights[i] * greedy_values(block, fit.context);
    total_loss += problems[i].losses(block);
  }
  const double lambda_n = lambda_for(fit.lambda_scale, problems.front().n());
  const Eigen::VectorXd scores = fit.selection_rule == SelectionRule::FullObjective
                                     ? Eigen::VectorXd(weighted_value + lambda_n * total_loss)
                                     : weighted_value;
  const std::size_t pick = argmin_score(scores);
  const auto row = static_cast<Eigen::Index>(pick);

  FitResult r;
  Eigen::VectorXd aggregate = Eigen::VectorXd::Zero(q);
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::VectorXd b = cands.row(row).segment(static_cast<Eigen::Index>(i) * q, q).transpose();
    r.diagnostics.level_betas.push_back(b);
    aggregate += weights[i] * b;
  }
  r.beta.beta = aggregate;
  r.policy = LinearPolicy::greedy(aggregate);
  r.objective_trace = std::move(trace);
  r.diagnostics.iterations = greedy_diag.iterations;
  r.diagnostics.converged = greedy_diag.converged;
  r.diagnostics.candidates = static_cast<std::size_t>(k);
  r.diagnostics.loss_at_optimum = total_loss(row);
  r.diagnostics.center_score = scores(0);
  r.diagnostics.selected_score = scores(row);
  r.diagnostics.selected_index = pick;
  r.diagnostics.lambda_n = lambda_n;
  r.diagnostics.covariance_fallback = fallback;
  return r;
}

}  // namespace qpl
