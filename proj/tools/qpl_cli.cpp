// qpl: run the regret experiment grid, re-plot a results CSV, or dump a
// synthetic dataset.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpl/error.hpp"
#include "qpl/harness.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kNumerical = 3 };

int run_command(const std::string& config_path, bool desk, const std::vector<std::string>& methods,
                const std::string& out_csv, const std::string& out_plots, std::size_t workers,
                const std::string& seed, bool quiet) {
  qpl::ExperimentConfig cfg;
  if (!config_path.empty()) qpl::apply_experiment_keys(qpl::load_key_values(config_path), cfg);
  if (desk) cfg.apply_desk_preset();
  if (!methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(qpl::parse_method(m));
  }
  if (!out_csv.empty()) cfg.out_csv = out_csv;
  if (!out_plots.empty()) cfg.out_plots = out_plots;
  if (workers > 0) cfg.workers = workers;
  if (!seed.empty()) qpl::apply_experiment_keys({{"base_seed", seed}}, cfg);

  qpl::ProgressFn progress;
  if (!quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 10 == 0) std::fprintf(stderr, "\r%zu/%zu replications", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const qpl::ExperimentResult result = qpl::run_experiment(cfg, progress);
  qpl::write_csv(result.curve, cfg.out_csv);
  if (!cfg.out_plots.empty()) qpl::plot_curves(result.curve, cfg.out_plots);

  for (const auto& f : result.failures) {
    std::fprintf(stderr, "cell method=%s n=%zu alpha=%g p=%g: %zu/%zu replications failed (%s)\n", f.method.c_str(),
                 f.n, f.alpha, f.p, f.failures, f.attempted, f.first_error.c_str());
  }
  if (result.budget_exceeded) {
    std::fprintf(stderr, "error: failure budget exceeded\n");
    return kNumerical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile-optimal offline policy learning experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the regret experiment grid");
  std::string config_path, out_csv, out_plots, seed;
  std::vector<std::string> methods;
  bool desk = false, quiet = false;
  std::size_t workers = 0;
  std::string preset;
  run->add_option("--config", config_path, "Key-value configuration file");
  run->add_option("--preset", preset, "Named preset (desk)")->check(CLI::IsMember({"desk"}));
  run->add_option("--methods", methods, "Comma-separated methods")->delimiter(',');
  run->add_option("--out-csv", out_csv, "Summary CSV path");
  run->add_option("--out-plots", out_plots, "Directory for SVG plots");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed");
  run->add_flag("--quiet", quiet, "No progress output");

  auto* plot = app.add_subcommand("plot", "Render SVG plots from a results CSV");
  std::string in_csv, out_dir;
  plot->add_option("--in-csv", in_csv, "Results CSV")->required();
  plot->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  std::string gen_config, gen_out;
  gen->add_option("--config", gen_config, "Key-value configuration file")->required();
  gen->add_option("--out", gen_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      desk = preset == "desk";
      return run_command(config_path, desk, methods, out_csv, out_plots, workers, seed, quiet);
    }
    if (*plot) {
      for (const auto& path : qpl::plot_curves(qpl::read_csv(in_csv), out_dir)) std::cout << path << '\n';
      return kOk;
    }
    if (*gen) {
      qpl::DataGenConfig cfg;
      qpl::apply_datagen_keys(qpl::load_key_values(gen_config), cfg);
      qpl::generate_to_csv(cfg, gen_out);
      return kOk;
    }
  } catch (const qpl::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const qpl::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const qpl::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const qpl::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
