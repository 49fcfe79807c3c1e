#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nysgm/data.hpp"
#include "nysgm/eval.hpp"
#include "nysgm/kernel.hpp"
#include "nysgm/nystrom.hpp"
#include "nysgm/regime.hpp"
#include "nysgm/sgm.hpp"

namespace nysgm {

enum class DataSource { toy, csv };

/// Everything needed to replay an experiment. Mirrors the keys of the
/// key=value config file (see apply_config_entry).
struct ExperimentConfig {
  DataSource source = DataSource::toy;
  std::size_t n = 100;
  std::filesystem::path csv_path;
  std::filesystem::path eval_csv_path;  // csv source only; defaults to the training data

  KernelSpec kernel = KernelSpec::gaussian(0.2);
  std::vector<std::size_t> landmark_counts;  // empty with a regime: use the regime's m
  LandmarkStrategy landmark_strategy = LandmarkStrategy::first_m;
  double rtol = kDefaultRankTolerance;

  std::optional<Regime> regime;
  double zeta = 0.5;
  double gamma = 1.0;
  RegimeMultipliers multipliers;

  // Explicit schedule; ignored for fields a regime sets.
  double eta = 1.0 / 800.0;
  double theta = 0.0;
  std::size_t batch_size = 1;
  std::size_t iterations = 0;  // 0 selects `epochs` passes, ceil(epochs * n / b)
  double epochs = 30.0;
  std::size_t snapshot_stride = 0;
  StorageStrategy storage = StorageStrategy::precompute_cross_gram;

  std::size_t trials = 50;
  std::uint64_t seed = 0;
  std::size_t eval_points = 2000;
  EvalMode eval_mode = EvalMode::grid;
  TargetMode target = TargetMode::noiseless_f_rho;
  std::size_t threads = 0;  // 0 = hardware concurrency

  std::filesystem::path out = "results";

  // cv only
  std::vector<double> cv_grid;
  double validation_fraction = 0.3;
  double truncation = 1.0;

  /// Throws InputError naming the offending field.
  void validate() const;
};

/// The toy preset: n=100, gaussian sigma=0.2, b=1, eta=1/(8n), m in {2,...,12},
/// 50 trials, 2000 noiseless-target evaluation points, 30 epochs.
ExperimentConfig toy_preset();

/// Applies one key=value pair. Throws InputError on unknown keys or bad values.
void apply_config_entry(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses a flat key=value file ('#' starts a comment, blank lines ignored).
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

struct ResolvedSchedule {
  double eta = 0.0;
  double theta = 0.0;
  std::size_t batch_size = 1;
  std::size_t iterations = 1;
  std::vector<std::size_t> landmark_counts;
};

/// Applies the regime (if any) and the epochs default for a sample of size n.
ResolvedSchedule resolve_schedule(const ExperimentConfig& config, std::size_t n);

struct RawRow {
  std::size_t m = 0;
  std::size_t trial = 0;
  std::size_t snapshot_iter = 0;
  double epochs = 0.0;
  double paper_passes = 0.0;
  double emp_risk = 0.0;
  double gen_error = 0.0;
};

struct AggregateRow {
  std::size_t m = 0;
  std::size_t snapshot_iter = 0;
  double epochs = 0.0;
  double paper_passes = 0.0;
  double mean_gen_error = 0.0;
  double std_gen_error = 0.0;  // sample (n-1) convention; 0 for one trial
  double mean_emp_risk = 0.0;
};

struct ExperimentReport {
  std::vector<RawRow> raw;              // sorted by (m, trial, snapshot_iter)
  std::vector<AggregateRow> aggregate;  // sorted by (m, snapshot_iter)
  std::vector<std::string> warnings;

  /// min over snapshots of the mean generalization error for landmark count m.
  double best_mean_error(std::size_t m) const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Deterministic reduction of raw rows into per-(m, snapshot) statistics.
std::vector<AggregateRow> aggregate_rows(const std::vector<RawRow>& raw);

std::string format_raw_csv(const std::vector<RawRow>& rows);
std::string format_aggregate_csv(const std::vector<AggregateRow>& rows);

/// Writes raw.csv and aggregate.csv into `dir` (created if missing).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

struct CvReportRow {
  double eta = 0.0;
  double validation_mse = 0.0;
  double test_error = 0.0;
  bool chosen = false;
};

struct CvReport {
  double chosen_eta = 0.0;
  std::vector<CvReportRow> rows;
};

/// Splits the data (toy: fresh sample with seed; csv: file) into train and
/// validation parts, uses the first entry of landmark_counts, and reports each
/// grid candidate's validation MSE and test error on the evaluation set.
CvReport run_cv(const ExperimentConfig& config);
std::string format_cv_csv(const CvReport& report);

/// Single training run on trial 0's data with the first landmark count.
/// Rows have trial = 0.
std::vector<RawRow> run_train(const ExperimentConfig& config, std::vector<std::string>* warnings);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace nysgm
