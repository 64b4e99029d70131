#include "qpl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "qpl/error.hpp"
#include "qpl/eval.hpp"
#include "qpl/format.hpp"
#include "qpl/rng.hpp"

namespace qpl {

std::string method_name(Method m) {
  switch (m) {
    case Method::Greedy: return "greedy";
    case Method::Pessimistic: return "pessimistic";
    case Method::SolutionSet: return "solution_set";
    case Method::Alternating: return "alternating";
    case Method::NcRegularized: return "nc_regularized";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Greedy, Method::Pessimistic, Method::SolutionSet, Method::Alternating,
                   Method::NcRegularized}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

ExperimentConfig::ExperimentConfig() {
  for (std::size_t n = 100; n <= 3000; n += 50) n_grid.push_back(n);
  fit.context = ContextDistribution::bivariate_gaussian(dgp.rho);
}

void ExperimentConfig::apply_desk_preset() {
  n_grid = {250, 1000, 3000};
  replications = 50;
}

void ExperimentConfig::validate() const {
  if (replications == 0) throw ConfigError("replications must be positive");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (n_grid.empty() || alphas.empty() || p_values.empty() || methods.empty())
    throw ConfigError("n_grid, alphas, p_values and methods must be nonempty");
  for (std::size_t n : n_grid)
    if (n < 2) throw ConfigError("sample sizes must be at least 2");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alphas must lie in (0,1)");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p values must lie in [0,1]");
  if (!(failure_budget >= 0.0 && failure_budget <= 1.0)) throw ConfigError("failure_budget must lie in [0,1]");
  if (basis == BasisId::Custom) throw ConfigError("the harness supports the main13 and appendix10 bases");
  dgp.validate();
  fit.validate();
  loss.validate();
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t alpha_index, std::size_t p_index, std::size_t n,
                               std::size_t rep) {
  return derive_seed({base_seed, alpha_index, p_index, n, rep});
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

struct Cell {
  std::size_t alpha_index, p_index, n_index;
};

struct Outcome {
  double regret = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

TestBasis make_basis(BasisId id) { return id == BasisId::Appendix10 ? TestBasis::appendix10() : TestBasis::main13(); }

double run_one(const ExperimentConfig& cfg, Method method, const IvDataset* iv, std::uint64_t data_seed,
               std::size_t n, double alpha, const TestBasis& basis) {
  FitConfig fit = cfg.fit;
  fit.seed = derive_seed({data_seed, static_cast<std::uint64_t>(method) + 1});
  FitResult r;
  switch (method) {
    case Method::Greedy: r = fit_greedy(*iv, alpha, basis, fit, cfg.loss); break;
    case Method::Pessimistic: r = fit_pessimistic_regularized(*iv, alpha, basis, fit, cfg.loss); break;
    case Method::SolutionSet: r = fit_solution_set(*iv, alpha, basis, fit, cfg.loss); break;
    case Method::Alternating: r = fit_alternating(*iv, alpha, basis, fit, cfg.loss, LinearPolicy{}); break;
    case Method::NcRegularized: {
      NcDgpConfig nc = cfg.nc_dgp;
      nc.n = n;
      nc.alpha = alpha;
      nc.rho = cfg.dgp.rho;
      nc.beta_true = cfg.dgp.beta_true;
      nc.seed = data_seed;
      const NcDataset data = generate_nc_dataset(nc);
      r = fit_nc_regularized(data, alpha, nc_exposure_basis(), nc_augmented_basis(), nc_bridge_features(), fit,
                             cfg.loss);
      break;
    }
  }
  const double g = regret(r.policy, cfg.dgp.beta_true, fit.context);
  if (!std::isfinite(g)) throw NumericalError("non-finite regret");
  return g;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const TestBasis basis = make_basis(config.basis);

  std::vector<Cell> cells;
  for (std::size_t ai = 0; ai < config.alphas.size(); ++ai)
    for (std::size_t pi = 0; pi < config.p_values.size(); ++pi)
      for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) cells.push_back({ai, pi, ni});

  const std::size_t reps = config.replications;
  const std::size_t n_methods = config.methods.size();
  const std::size_t total_jobs = cells.size() * reps;
  // Slot (job, method); job = cell * reps + rep.
  std::vector<Outcome> slots(total_jobs * n_methods);

  const bool needs_iv = std::any_of(config.methods.begin(), config.methods.end(),
                                    [](Method m) { return m != Method::NcRegularized; });

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::size_t done = 0;

  const auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total_jobs) return;
      const Cell& cell = cells[job / reps];
      const std::size_t rep = job % reps;
      const std::size_t n = config.n_grid[cell.n_index];
      const double alpha = config.alphas[cell.alpha_index];
      const double p = config.p_values[cell.p_index];
      const std::uint64_t seed = replication_seed(config.base_seed, cell.alpha_index, cell.p_index, n, rep);

      IvDataset iv;
      std::string data_error;
      if (needs_iv) {
        try {
          DgpConfig dgp = config.dgp;
          dgp.n = n;
          dgp.alpha = alpha;
          dgp.p_structured = p;
          dgp.seed = seed;
          iv = generate_iv_dataset(dgp);
        } catch (const std::exception& e) {
          data_error = e.what();
        }
      }
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        Outcome& out = slots[job * n_methods + mi];
        const Method method = config.methods[mi];
        if (method != Method::NcRegularized && !data_error.empty()) {
          out.error = data_error;
          continue;
        }
        try {
          out.regret = run_one(config, method, &iv, seed, n, alpha, basis);
          out.ok = true;
        } catch (const std::exception& e) {
          out.error = e.what();
        }
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(++done, total_jobs);
      }
    }
  };

  const std::size_t n_threads = std::min(config.workers, std::max<std::size_t>(total_jobs, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Sequential reduction in (cell, rep) order.
  ExperimentResult result;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& cell = cells[ci];
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      std::vector<double> values;
      CellFailure failure;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const Outcome& out = slots[(ci * reps + rep) * n_methods + mi];
        if (out.ok) {
          values.push_back(out.regret);
        } else {
          if (failure.failures == 0) failure.first_error = out.error;
          ++failure.failures;
        }
      }
      CurveRow row;
      row.method = method_name(config.methods[mi]);
      row.n = config.n_grid[cell.n_index];
      row.alpha = config.alphas[cell.alpha_index];
      row.p = config.p_values[cell.p_index];
      row.n_reps = values.size();
      row.base_seed = config.base_seed;
      if (values.empty()) {
        row.mean_regret = std::numeric_limits<double>::quiet_NaN();
      } else {
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean_regret = sum / static_cast<double>(values.size());
      }
      row.std_regret = sample_std(values);
      result.curve.rows.push_back(row);

      if (failure.failures > 0) {
        failure.method = row.method;
        failure.n = row.n;
        failure.alpha = row.alpha;
        failure.p = row.p;
        failure.attempted = reps;
        if (static_cast<double>(failure.failures) > config.failure_budget * static_cast<double>(reps))
          result.budget_exceeded = true;
        result.failures.push_back(std::move(failure));
      }
    }
  }
  sort_rows(result.curve);
  return result;
}

void sort_rows(RegretCurve& curve) {
  std::stable_sort(curve.rows.begin(), curve.rows.end(), [](const CurveRow& a, const CurveRow& b) {
    return std::tie(a.method, a.alpha, a.p, a.n) < std::tie(b.method, b.alpha, b.p, b.n);
  });
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr const char* kCsvHeader = "method,n,alpha,p,mean_regret,std_regret,n_reps,base_seed";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t == "nan" || t == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("invalid number for " + what + ": '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError("invalid integer for " + what + ": '" + s + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::string format_csv(const RegretCurve& curve) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const CurveRow& r : curve.rows) {
    out += r.method + ',' + std::to_string(r.n) + ',' + fmt17(r.alpha) + ',' + fmt17(r.p) + ',' + fmt17(r.mean_regret) +
           ',' + fmt17(r.std_regret) + ',' + std::to_string(r.n_reps) + ',' + std::to_string(r.base_seed) + '\n';
  }
  return out;
}

void write_csv(const RegretCurve& curve, const std::string& path) { write_file(path, format_csv(curve)); }

RegretCurve parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) throw ConfigError("unexpected CSV header");
  RegretCurve curve;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 8) throw ConfigError("CSV row must have 8 fields: '" + line + "'");
    CurveRow r;
    r.method = trim(f[0]);
    r.n = static_cast<std::size_t>(to_u64(f[1], "n"));
    r.alpha = to_double(f[2], "alpha");
    r.p = to_double(f[3], "p");
    r.mean_regret = to_double(f[4], "mean_regret");
    r.std_regret = to_double(f[5], "std_regret");
    r.n_reps = static_cast<std::size_t>(to_u64(f[6], "n_reps"));
    r.base_seed = to_u64(f[7], "base_seed");
    curve.rows.push_back(r);
  }
  return curve;
}

RegretCurve read_csv(const std::string& path) { return parse_csv(read_file(path)); }

// ---------------------------------------------------------------------------
// Key-value configuration

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }
  return kv;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
  return parse_key_values(read_file(path));
}

namespace {

std::vector<std::string> list_of(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& s : split(v, ',')) {
    const std::string t = trim(s);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + s + "'");
}

Eigen::Vector4d to_beta(const std::string& s, const std::string& key) {
  const auto parts = list_of(s);
  if (parts.size() != 4) throw ConfigError(key + " needs four comma-separated values");
  Eigen::Vector4d b;
  for (int j = 0; j < 4; ++j) b(j) = to_double(parts[static_cast<std::size_t>(j)], key);
  return b;
}

}  // namespace

void apply_experiment_keys(const std::map<std::string, std::string>& kv, ExperimentConfig& c) {
  // Preset first so explicit keys override it.
  if (auto it = kv.find("preset"); it != kv.end()) {
    if (it->second != "desk") throw ConfigError("unknown preset '" + it->second + "'");
    c.apply_desk_preset();
  }
  for (const auto& [key, value] : kv) {
    if (key == "preset") continue;
    if (key == "n_grid") {
      c.n_grid.clear();
      for (const auto& s : list_of(value)) c.n_grid.push_back(static_cast<std::size_t>(to_u64(s, key)));
    } else if (key == "alphas") {
      c.alphas.clear();
      for (const auto& s : list_of(value)) c.alphas.push_back(to_double(s, key));
    } else if (key == "p_values") {
      c.p_values.clear();
      for (const auto& s : list_of(value)) c.p_values.push_back(to_double(s, key));
    } else if (key == "methods") {
      c.methods.clear();
      for (const auto& s : list_of(value)) c.methods.push_back(parse_method(s));
    } else if (key == "replications") {
      c.replications = static_cast<std::size_t>(to_u64(value, key));
    } else if (key == "base_seed" || key == "seed") {
      c.base_seed = to_u64(value, key);
    } else if (key == "workers") {
      c.workers = static_cast<std::size_t>(to_u64(value, key));
    } else if (key == "failure_budget") {
      c.failure_budget = to_double(value, key);
    } else if (key == "rho") {
      c.dgp.rho = to_double(value, key);
      c.fit.context = ContextDistribution::bivariate_gaussian(c.dgp.rho);
    } else if (key == "b_plus") {
      c.dgp.b_plus = to_double(value, key);
    } else if (key == "b_minus") {
      c.dgp.b_minus = to_double(value, key);
    } else if (key == "beta_true") {
      c.dgp.beta_true = to_beta(value, key);
    } else if (key == "kappa") {
      c.nc_dgp.kappa = to_double(value, key);
    } else if (key == "step_size") {
      c.fit.step_size = to_double(value, key);
    } else if (key == "max_iters") {
      c.fit.max_iters = static_cast<std::size_t>(to_u64(value, key));
    } else if (key == "grad_tol") {
      c.fit.grad_tol = to_double(value, key);
    } else if (key == "accelerate") {
      c.fit.accelerate = to_bool(value, key);
    } else if (key == "lambda_scale") {
      c.fit.lambda_scale = to_double(value, key);
    } else if (key == "alternating_lambda_scale") {
      c.fit.alternating_lambda_scale = to_double(value, key);
    } else if (key == "alternating_norm_bound") {
      c.fit.alternating_norm_bound = to_double(value, key);
    } else if (key == "n_candidates") {
      c.fit.n_candidates = static_cast<std::size_t>(to_u64(value, key));
    } else if (key == "r_scale") {
      c.fit.r_scale = to_double(value, key);
    } else if (key == "covariance_mode") {
      if (value == "isotropic") c.fit.covariance_mode = CovarianceMode::Isotropic;
      else if (value == "inverse_hessian") c.fit.covariance_mode = CovarianceMode::InverseHessian;
      else throw ConfigError("covariance_mode must be isotropic or inverse_hessian");
    } else if (key == "e_n_scale") {
      c.fit.e_n_scale = to_double(value, key);
    } else if (key == "max_outer_iters") {
      c.fit.max_outer_iters = static_cast<std::size_t>(to_u64(value, key));
    } else if (key == "smoothing_temperature") {
      c.loss.smoothing_temperature = to_double(value, key);
    } else if (key == "ridge") {
      c.loss.ridge = to_double(value, key);
    } else if (key == "basis") {
      if (value == "main13") c.basis = BasisId::Main13;
      else if (value == "appendix10") c.basis = BasisId::Appendix10;
      else throw ConfigError("basis must be main13 or appendix10");
    } else if (key == "out_csv") {
      c.out_csv = value;
    } else if (key == "out_plots") {
      c.out_plots = value;
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
}

void apply_datagen_keys(const std::map<std::string, std::string>& kv, DataGenConfig& c) {
  for (const auto& [key, value] : kv) {
    if (key == "data") {
      if (value == "iv") c.kind = DataKind::Iv;
      else if (value == "nc") c.kind = DataKind::Nc;
      else if (value == "appendix") c.kind = DataKind::Appendix;
      else throw ConfigError("data must be iv, nc or appendix");
    } else if (key == "n") {
      c.dgp.n = c.nc.n = static_cast<std::size_t>(to_u64(value, key));
    } else if (key == "alpha") {
      c.dgp.alpha = c.nc.alpha = to_double(value, key);
    } else if (key == "p" || key == "p_structured") {
      c.dgp.p_structured = to_double(value, key);
    } else if (key == "seed" || key == "base_seed") {
      c.dgp.seed = c.nc.seed = to_u64(value, key);
    } else if (key == "rho") {
      c.dgp.rho = c.nc.rho = to_double(value, key);
    } else if (key == "b_plus") {
      c.dgp.b_plus = to_double(value, key);
    } else if (key == "b_minus") {
      c.dgp.b_minus = to_double(value, key);
    } else if (key == "beta_true") {
      c.dgp.beta_true = c.nc.beta_true = to_beta(value, key);
    } else if (key == "kappa") {
      c.nc.kappa = to_double(value, key);
    } else if (key == "p_noise") {
      c.p_noise = to_double(value, key);
    } else if (key == "gamma") {
      c.gamma = to_double(value, key);
    } else {
      throw ConfigError("unknown data generation key '" + key + "'");
    }
  }
}

void generate_to_csv(const DataGenConfig& c, const std::string& path) {
  switch (c.kind) {
    case DataKind::Iv: write_iv_csv(generate_iv_dataset(c.dgp), path); break;
    case DataKind::Nc: write_nc_csv(generate_nc_dataset(c.nc), path); break;
    case DataKind::Appendix:
      write_iv_csv(generate_appendix_dataset(c.dgp.n, c.dgp.alpha, c.p_noise, c.gamma, c.dgp.seed), path);
      break;
  }
}

}  // namespace qpl
