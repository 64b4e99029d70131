#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qpl/dgp.hpp"
#include "qpl/features.hpp"
#include "qpl/learners.hpp"
#include "qpl/loss.hpp"

namespace qpl {

enum class Method { Greedy, Pessimistic, SolutionSet, Alternating, NcRegularized };

std::string method_name(Method m);
/// Accepts the CSV spelling: greedy, pessimistic, solution_set, alternating,
/// nc_regularized.
Method parse_method(const std::string& name);

struct ExperimentConfig {
  std::vector<std::size_t> n_grid;
  std::vector<double> alphas{0.15, 0.2, 0.25};
  std::vector<double> p_values{0.7, 0.8};
  std::vector<Method> methods{Method::Greedy, Method::Pessimistic};
  std::size_t replications = 200;
  std::uint64_t base_seed = 20240601;
  std::size_t workers = 1;
  /// A cell whose failed fraction exceeds this is reported as a numerical failure.
  double failure_budget = 0.1;

  /// rho, intercepts and beta_true are taken from here; n, alpha, p and seed
  /// are set per replication.
  DgpConfig dgp;
  /// Used for the nc_regularized method (kappa, noise levels).
  NcDgpConfig nc_dgp;
  FitConfig fit;
  LossConfig loss;
  BasisId basis = BasisId::Main13;

  std::string out_csv = "regret.csv";
  std::string out_plots;

  ExperimentConfig();

  /// n_grid = {250, 1000, 3000}, replications = 50.
  void apply_desk_preset();
  void validate() const;
};

struct CurveRow {
  std::string method;
  std::size_t n = 0;
  double alpha = 0.0;
  double p = 0.0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  /// Successful replications.
  std::size_t n_reps = 0;
  std::uint64_t base_seed = 0;
};

struct RegretCurve {
  std::vector<CurveRow> rows;
};

struct CellFailure {
  std::string method;
  std::size_t n = 0;
  double alpha = 0.0;
  double p = 0.0;
  std::size_t failures = 0;
  std::size_t attempted = 0;
  std::string first_error;
};

struct ExperimentResult {
  RegretCurve curve;
  /// Cells with at least one failed replication.
  std::vector<CellFailure> failures;
  bool budget_exceeded = false;
};

/// (completed jobs, total jobs); called from worker threads under a lock.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

/// Seed of the dataset for replication `rep` of a grid cell.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t alpha_index, std::size_t p_index, std::size_t n,
                               std::size_t rep);

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(const std::vector<double>& xs);

std::string format_csv(const RegretCurve& curve);
void write_csv(const RegretCurve& curve, const std::string& path);
RegretCurve parse_csv(const std::string& text);
RegretCurve read_csv(const std::string& path);
/// Rows ordered by (method, alpha, p, n).
void sort_rows(RegretCurve& curve);

/// SVG for the rows of one (alpha, p) panel.
std::string render_svg(const std::vector<CurveRow>& rows, double alpha, double p);
/// File name used for a panel, e.g. regret_alpha0.15_p0.7.svg.
std::string svg_file_name(double alpha, double p);
/// One SVG per (alpha, p) in `dir` (created if missing). Returns the paths
/// written, in (alpha, p) order. Empty curve -> ConfigError.
std::vector<std::string> plot_curves(const RegretCurve& curve, const std::string& dir);

/// Flat `key = value` text; `#` starts a comment. Duplicate keys -> ConfigError.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> load_key_values(const std::string& path);
/// Applies recognized experiment keys; unknown keys -> ConfigError.
void apply_experiment_keys(const std::map<std::string, std::string>& kv, ExperimentConfig& config);

enum class DataKind { Iv, Nc, Appendix };

struct DataGenConfig {
  DataKind kind = DataKind::Iv;
  DgpConfig dgp;
  NcDgpConfig nc;
  /// Appendix design: fraction of noise-score samples and the jump size.
  double p_noise = 0.3;
  double gamma = 8.0;
};

void apply_datagen_keys(const std::map<std::string, std::string>& kv, DataGenConfig& config);
/// Writes the requested dataset as CSV.
void generate_to_csv(const DataGenConfig& config, const std::string& path);

}  // namespace qpl
