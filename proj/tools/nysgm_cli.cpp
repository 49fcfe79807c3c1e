// nysgm: command-line harness for Nystrom stochastic gradient experiments.
//
//   nysgm gen-data   --n 100 --seed 1 --out data.csv
//   nysgm train      --n 100 --m 10 --eta 0.00125 --iters 3000 --out trajectory.csv
//   nysgm experiment [--config run.cfg] [flags] --out results/
//   nysgm cv         --grid 0.005,0.00125,0.0003125 --m 10 --out cv.csv
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nysgm/data.hpp"
#include "nysgm/error.hpp"
#include "nysgm/experiment.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Flags shared by train/experiment/cv. Each maps onto a config-file key.
struct CommonFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::string> landmark_counts;

  void add_to(CLI::App& app, bool with_cv) {
    app.add_option("--config", config_path, "key=value config file; flags override it");
    add_value(app, "--n", "n", "toy sample size");
    add_value(app, "--csv", "csv", "training data CSV (switches source to csv)");
    add_value(app, "--eval-csv", "eval_csv", "evaluation CSV for csv sources");
    app.add_option("--m", landmark_counts, "subsampling level (repeatable or comma list)")
        ->delimiter(',');
    add_value(app, "--trials", "trials", "number of trials");
    add_value(app, "--seed", "seed", "base seed; trial k uses seed + k");
    add_value(app, "--eta", "eta", "step size eta_1");
    add_value(app, "--theta", "theta", "step-size decay exponent");
    add_value(app, "--batch", "batch", "mini-batch size b");
    add_value(app, "--iters", "iters", "iterations T (default: --epochs passes)");
    add_value(app, "--epochs", "epochs", "epochs to run when --iters is not given");
    add_value(app, "--stride", "stride", "iterations between snapshots (default one epoch)");
    add_value(app, "--regime", "regime", "thm1_I, thm1_II, cor1_I, cor1_II, cor1_III, cor1_IV");
    add_value(app, "--zeta", "zeta", "source exponent in [0, 1/2]");
    add_value(app, "--gamma", "gamma", "capacity exponent in [0, 1]");
    add_value(app, "--kernel", "kernel", "gaussian, linear or polynomial");
    add_value(app, "--sigma", "sigma", "gaussian bandwidth");
    add_value(app, "--degree", "degree", "polynomial degree");
    add_value(app, "--offset", "offset", "polynomial offset");
    add_value(app, "--kappa", "kappa", "kernel bound for non-gaussian kernels");
    add_value(app, "--landmarks", "landmarks", "first_m or uniform");
    add_value(app, "--storage", "storage", "precompute or on_the_fly");
    add_value(app, "--rtol", "rtol", "relative eigenvalue cutoff for the factor");
    add_value(app, "--eval-points", "eval_points", "evaluation points for the toy source");
    add_value(app, "--eval-mode", "eval_mode", "grid or random");
    add_value(app, "--target", "target", "noisy or noiseless");
    add_value(app, "--threads", "threads", "worker threads (0 = all cores)");
    add_value(app, "--out", "out", "output path");
    if (with_cv) {
      add_value(app, "--grid", "grid", "comma-separated candidate step sizes");
      add_value(app, "--val-frac", "val_frac", "validation fraction in (0,1)");
      add_value(app, "--trunc", "trunc", "truncation level M");
    }
  }

  void add_value(CLI::App& app, const std::string& flag, const std::string& key,
                 const std::string& help) {
    app.add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  nysgm::ExperimentConfig resolve() const {
    nysgm::ExperimentConfig config = nysgm::toy_preset();
    std::map<std::string, std::string> merged;
    if (!config_path.empty()) merged = nysgm::read_config_file(config_path);
    for (const auto& [k, v] : values) merged[k] = v;
    if (!landmark_counts.empty()) {
      std::string joined;
      for (const auto& m : landmark_counts) joined += (joined.empty() ? "" : ",") + m;
      merged["m"] = joined;
    }
    // A regime supplies its own subsampling level unless one is given explicitly.
    if (merged.count("regime") && merged["regime"] != "none" && !merged.count("m"))
      config.landmark_counts.clear();
    for (const auto& [k, v] : merged) nysgm::apply_config_entry(config, k, v);
    return config;
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nystrom stochastic gradient methods for kernel least squares"};
  app.require_subcommand(1);

  std::size_t gen_n = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "write a toy dataset as CSV");
  gen->add_option("--n", gen_n, "sample size")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  CommonFlags train_flags, experiment_flags, cv_flags;
  auto* train = app.add_subcommand("train", "single training run; writes a trajectory CSV");
  train_flags.add_to(*train, false);
  auto* experiment = app.add_subcommand("experiment", "multi-trial experiment over subsampling levels");
  experiment_flags.add_to(*experiment, false);
  auto* cv = app.add_subcommand("cv", "hold-out selection of the step size");
  cv_flags.add_to(*cv, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      nysgm::save_csv(nysgm::gen_toy(gen_n, gen_seed), gen_out);
      std::cout << "wrote " << gen_n << " rows to " << gen_out << '\n';
    } else if (*train) {
      const auto config = train_flags.resolve();
      std::vector<std::string> warnings;
      const auto rows = nysgm::run_train(config, &warnings);
      print_warnings(warnings);
      nysgm::write_text_file(config.out, nysgm::format_raw_csv(rows));
      std::cout << "wrote " << rows.size() << " snapshots to " << config.out.string() << '\n';
    } else if (*experiment) {
      const auto config = experiment_flags.resolve();
      const auto report = nysgm::run_experiment(config);
      print_warnings(report.warnings);
      nysgm::write_report(report, config.out);
      std::cout << "m,best_mean_gen_error\n";
      std::vector<std::size_t> seen;
      for (const auto& row : report.aggregate) {
        if (!seen.empty() && seen.back() == row.m) continue;
        seen.push_back(row.m);
        std::cout << row.m << ',' << report.best_mean_error(row.m) << '\n';
      }
      std::cout << "wrote " << (config.out / "raw.csv").string() << " and "
                << (config.out / "aggregate.csv").string() << '\n';
    } else if (*cv) {
      const auto config = cv_flags.resolve();
      const auto report = nysgm::run_cv(config);
      const std::string table = nysgm::format_cv_csv(report);
      nysgm::write_text_file(config.out, table);
      std::cout << table << "chosen eta: " << report.chosen_eta << '\n';
    }
  } catch (const nysgm::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nysgm::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
