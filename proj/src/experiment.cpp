#include "nysgm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "nysgm/error.hpp"
#include "nysgm/rng.hpp"

namespace nysgm {

namespace {

// Child-seed streams derived from a trial seed.
constexpr std::uint64_t kIndexStream = 0;
constexpr std::uint64_t kLandmarkStream = 1;
constexpr std::uint64_t kEvalPointStream = 2;
constexpr std::uint64_t kEvalNoiseStream = 3;
constexpr std::uint64_t kSplitStream = 4;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw InputError("config '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = trim(text.substr(start, comma - start));
    if (!item.empty()) values.push_back(parse_value<T>(key, item));
    start = comma + 1;
  }
  return values;
}

std::string format_number(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

struct TrialInputs {
  Dataset train;
  Matrix eval_points;
  Vector eval_targets;
};

std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial) {
  return config.seed + trial;
}

TrialInputs make_trial_inputs(const ExperimentConfig& config, std::size_t trial,
                              const Dataset* csv_data, const Dataset* csv_eval) {
  TrialInputs inputs;
  const std::uint64_t seed = trial_seed(config, trial);
  if (config.source == DataSource::toy) {
    inputs.train = gen_toy(config.n, seed);
    EvalSet eval = eval_grid(config.eval_points, config.eval_mode, derive_seed(seed, kEvalPointStream));
    inputs.eval_points = std::move(eval.points);
    inputs.eval_targets = std::move(eval.targets);
    if (config.target == TargetMode::noisy_y) {
      Rng noise(derive_seed(seed, kEvalNoiseStream));
      for (Eigen::Index i = 0; i < inputs.eval_targets.size(); ++i) inputs.eval_targets(i) += noise.normal();
    }
  } else {
    inputs.train = *csv_data;
    const Dataset& eval = csv_eval ? *csv_eval : *csv_data;
    inputs.eval_points = eval.X;
    if (config.target == TargetMode::noiseless_f_rho) {
      if (!eval.f_true) throw InputError("target=noiseless needs an ftrue column in the evaluation data");
      inputs.eval_targets = *eval.f_true;
    } else {
      inputs.eval_targets = eval.y;
    }
  }
  return inputs;
}

struct Job {
  std::size_t m = 0;
  std::size_t trial = 0;
};

struct JobResult {
  std::vector<RawRow> rows;
  std::vector<std::string> warnings;
};

JobResult run_job(const ExperimentConfig& config, const ResolvedSchedule& schedule, const Job& job,
                  const TrialInputs& inputs) {
  const std::uint64_t seed = trial_seed(config, job.trial);
  const auto n = static_cast<std::size_t>(inputs.train.n());
  Rng landmark_rng(derive_seed(seed, kLandmarkStream));
  auto indices = select_landmarks(n, job.m, config.landmark_strategy, landmark_rng);
  auto factor = std::make_shared<const NystromFactor>(
      build_factor(config.kernel, inputs.train.X, std::move(indices), config.rtol));

  TrainConfig train_config;
  train_config.eta1 = schedule.eta;
  train_config.theta = schedule.theta;
  train_config.batch_size = schedule.batch_size;
  train_config.iterations = schedule.iterations;
  train_config.seed = derive_seed(seed, kIndexStream);
  train_config.snapshot_stride = config.snapshot_stride;
  train_config.storage = config.storage;
  Trajectory trajectory = train(train_config, inputs.train, config.kernel, factor);

  // Predictions are K_{x, landmarks} R c; the kernel blocks are shared across snapshots.
  const Matrix train_block = feature_matrix(config.kernel, *factor, inputs.train.X);
  const Matrix eval_block = feature_matrix(config.kernel, *factor, inputs.eval_points);

  JobResult result;
  result.warnings = std::move(trajectory.warnings);
  for (const Snapshot& snap : trajectory.snapshots) {
    const PassCount passes = pass_count(snap.iteration, schedule.batch_size, n, job.m);
    RawRow row;
    row.m = job.m;
    row.trial = job.trial;
    row.snapshot_iter = snap.iteration;
    row.epochs = passes.epochs;
    row.paper_passes = passes.paper_passes;
    row.emp_risk = mean_squared_error(train_block * snap.coefficients, inputs.train.y);
    row.gen_error = mean_squared_error(eval_block * snap.coefficients, inputs.eval_targets);
    result.rows.push_back(row);
  }
  return result;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < threads; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Dataset load_source(const ExperimentConfig& config) {
  if (config.source == DataSource::toy) return gen_toy(config.n, trial_seed(config, 0));
  return load_csv(config.csv_path);
}

}  // namespace

ExperimentConfig toy_preset() {
  ExperimentConfig config;
  config.source = DataSource::toy;
  config.n = 100;
  config.kernel = KernelSpec::gaussian(0.2);
  config.landmark_counts = {2, 4, 6, 8, 10, 12};
  config.batch_size = 1;
  config.eta = 1.0 / (8.0 * 100.0);
  config.epochs = 30.0;
  config.trials = 50;
  config.eval_points = 2000;
  config.target = TargetMode::noiseless_f_rho;
  return config;
}

void ExperimentConfig::validate() const {
  if (source == DataSource::toy && n < 1) throw InputError("n: must be >= 1");
  if (source == DataSource::csv && csv_path.empty()) throw InputError("csv: path required for csv source");
  kernel.validate();
  if (trials < 1) throw InputError("trials: must be >= 1");
  if (!regime && landmark_counts.empty()) throw InputError("m: at least one landmark count required");
  for (const std::size_t m : landmark_counts) {
    if (m == 0) throw InputError("m: landmark counts must be >= 1");
    if (source == DataSource::toy && m > n)
      throw InputError("m: landmark count " + std::to_string(m) + " exceeds n=" + std::to_string(n));
  }
  if (!regime) {
    if (!(eta >= 0.0) || eta * kernel.kappa * kernel.kappa > 1.0)
      throw InputError("eta: must satisfy 0 <= eta * kappa^2 <= 1");
    if (!(theta >= 0.0 && theta < 1.0)) throw InputError("theta: must lie in [0, 1)");
    if (batch_size < 1) throw InputError("batch: must be >= 1");
  }
  if (iterations == 0 && !(epochs > 0.0)) throw InputError("epochs: must be positive");
  if (eval_points < 1) throw InputError("eval_points: must be >= 1");
  if (!(rtol > 0.0)) throw InputError("rtol: must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw InputError("val_frac: must lie in (0, 1)");
  if (!(truncation > 0.0)) throw InputError("trunc: must be positive");
  if (out.empty()) throw InputError("out: path required");
}

void apply_config_entry(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const std::string k(key);
  if (key == "source") {
    if (value == "toy") c.source = DataSource::toy;
    else if (value == "csv") c.source = DataSource::csv;
    else throw InputError("source: expected toy or csv");
  } else if (key == "n") {
    c.n = parse_value<std::size_t>(k, value);
  } else if (key == "csv") {
    c.csv_path = std::string(value);
    c.source = DataSource::csv;
  } else if (key == "eval_csv") {
    c.eval_csv_path = std::string(value);
  } else if (key == "kernel") {
    const double kappa = c.kernel.kappa;
    c.kernel.family = parse_kernel_family(value);
    c.kernel.kappa = c.kernel.family == KernelFamily::gaussian ? 1.0 : kappa;
  } else if (key == "sigma") {
    c.kernel.sigma = parse_value<double>(k, value);
  } else if (key == "degree") {
    c.kernel.degree = parse_value<int>(k, value);
  } else if (key == "offset") {
    c.kernel.offset = parse_value<double>(k, value);
  } else if (key == "kappa") {
    c.kernel.kappa = parse_value<double>(k, value);
  } else if (key == "m") {
    c.landmark_counts = parse_list<std::size_t>(k, value);
  } else if (key == "landmarks") {
    c.landmark_strategy = parse_landmark_strategy(value);
  } else if (key == "rtol") {
    c.rtol = parse_value<double>(k, value);
  } else if (key == "regime") {
    if (value == "none") c.regime.reset();
    else c.regime = parse_regime(value);
  } else if (key == "zeta") {
    c.zeta = parse_value<double>(k, value);
  } else if (key == "gamma") {
    c.gamma = parse_value<double>(k, value);
  } else if (key == "c_eta") {
    c.multipliers.eta = parse_value<double>(k, value);
  } else if (key == "c_b") {
    c.multipliers.batch = parse_value<double>(k, value);
  } else if (key == "c_T") {
    c.multipliers.iterations = parse_value<double>(k, value);
  } else if (key == "c_m") {
    c.multipliers.landmarks = parse_value<double>(k, value);
  } else if (key == "eta") {
    c.eta = parse_value<double>(k, value);
  } else if (key == "theta") {
    c.theta = parse_value<double>(k, value);
  } else if (key == "batch") {
    c.batch_size = parse_value<std::size_t>(k, value);
  } else if (key == "iters") {
    c.iterations = parse_value<std::size_t>(k, value);
  } else if (key == "epochs") {
    c.epochs = parse_value<double>(k, value);
  } else if (key == "stride") {
    c.snapshot_stride = parse_value<std::size_t>(k, value);
  } else if (key == "storage") {
    c.storage = parse_storage_strategy(value);
  } else if (key == "trials") {
    c.trials = parse_value<std::size_t>(k, value);
  } else if (key == "seed") {
    c.seed = parse_value<std::uint64_t>(k, value);
  } else if (key == "eval_points") {
    c.eval_points = parse_value<std::size_t>(k, value);
  } else if (key == "eval_mode") {
    c.eval_mode = parse_eval_mode(value);
  } else if (key == "target") {
    c.target = parse_target_mode(value);
  } else if (key == "threads") {
    c.threads = parse_value<std::size_t>(k, value);
  } else if (key == "out") {
    c.out = std::string(value);
  } else if (key == "grid") {
    c.cv_grid = parse_list<double>(k, value);
  } else if (key == "val_frac") {
    c.validation_fraction = parse_value<double>(k, value);
  } else if (key == "trunc") {
    c.truncation = parse_value<double>(k, value);
  } else {
    throw InputError("unknown config key '" + k + "'");
  }
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    entries[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return entries;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ResolvedSchedule resolve_schedule(const ExperimentConfig& config, std::size_t n) {
  ResolvedSchedule s;
  s.eta = config.eta;
  s.theta = config.theta;
  s.batch_size = config.batch_size;
  s.landmark_counts = config.landmark_counts;
  std::size_t iterations = config.iterations;
  if (config.regime) {
    RegimeParams params;
    params.zeta = config.zeta;
    params.gamma = config.gamma;
    params.regime = *config.regime;
    params.multipliers = config.multipliers;
    const Schedule regime = regime_schedule(params, n);
    s.eta = regime.eta;
    s.theta = regime.theta;
    s.batch_size = regime.batch_size;
    if (iterations == 0) iterations = regime.iterations;
    if (s.landmark_counts.empty()) s.landmark_counts = {regime.landmarks};
  }
  if (iterations == 0)
    iterations = static_cast<std::size_t>(
        std::ceil(config.epochs * static_cast<double>(n) / static_cast<double>(s.batch_size) - 1e-9));
  s.iterations = std::max<std::size_t>(1, iterations);
  return s;
}

double ExperimentReport::best_mean_error(std::size_t m) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : aggregate)
    if (row.m == m) best = std::min(best, row.mean_gen_error);
  if (!std::isfinite(best)) throw InputError("no aggregate rows for m=" + std::to_string(m));
  return best;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<RawRow>& raw) {
  std::vector<RawRow> sorted = raw;
  std::sort(sorted.begin(), sorted.end(), [](const RawRow& a, const RawRow& b) {
    return std::tie(a.m, a.snapshot_iter, a.trial) < std::tie(b.m, b.snapshot_iter, b.trial);
  });
  std::vector<AggregateRow> out;
  for (std::size_t lo = 0; lo < sorted.size();) {
    std::size_t hi = lo;
    while (hi < sorted.size() && sorted[hi].m == sorted[lo].m &&
           sorted[hi].snapshot_iter == sorted[lo].snapshot_iter)
      ++hi;
    const double count = static_cast<double>(hi - lo);
    double sum_err = 0.0, sum_risk = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      sum_err += sorted[i].gen_error;
      sum_risk += sorted[i].emp_risk;
    }
    const double mean = sum_err / count;
    double ss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) ss += (sorted[i].gen_error - mean) * (sorted[i].gen_error - mean);
    AggregateRow row;
    row.m = sorted[lo].m;
    row.snapshot_iter = sorted[lo].snapshot_iter;
    row.epochs = sorted[lo].epochs;
    row.paper_passes = sorted[lo].paper_passes;
    row.mean_gen_error = mean;
    row.std_gen_error = hi - lo > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    row.mean_emp_risk = sum_risk / count;
    out.push_back(row);
    lo = hi;
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::optional<Dataset> csv_data, csv_eval;
  std::size_t n = config.n;
  if (config.source == DataSource::csv) {
    csv_data = load_csv(config.csv_path);
    n = static_cast<std::size_t>(csv_data->n());
    if (!config.eval_csv_path.empty()) csv_eval = load_csv(config.eval_csv_path);
  }
  const ResolvedSchedule schedule = resolve_schedule(config, n);
  for (const std::size_t m : schedule.landmark_counts)
    if (m == 0 || m > n)
      throw InputError("m: landmark count " + std::to_string(m) + " must lie in [1, n=" +
                       std::to_string(n) + "]");

  std::vector<Job> jobs;
  for (const std::size_t m : schedule.landmark_counts)
    for (std::size_t trial = 0; trial < config.trials; ++trial) jobs.push_back({m, trial});

  // Trial inputs depend only on the trial, so they are shared across landmark counts.
  std::vector<TrialInputs> inputs(config.trials);
  parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    inputs[trial] = make_trial_inputs(config, trial, csv_data ? &*csv_data : nullptr,
                                      csv_eval ? &*csv_eval : nullptr);
  });
  std::vector<JobResult> results(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
    results[j] = run_job(config, schedule, jobs[j], inputs[jobs[j].trial]);
  });

  ExperimentReport report;
  for (auto& result : results) {
    report.raw.insert(report.raw.end(), result.rows.begin(), result.rows.end());
    for (auto& w : result.warnings)
      if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end())
        report.warnings.push_back(std::move(w));
  }
  std::sort(report.raw.begin(), report.raw.end(), [](const RawRow& a, const RawRow& b) {
    return std::tie(a.m, a.trial, a.snapshot_iter) < std::tie(b.m, b.trial, b.snapshot_iter);
  });
  report.aggregate = aggregate_rows(report.raw);
  return report;
}

std::string format_raw_csv(const std::vector<RawRow>& rows) {
  std::string out = "m,trial,snapshot_iter,epochs,paper_passes,emp_risk,gen_error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.m) + ',' + std::to_string(r.trial) + ',' + std::to_string(r.snapshot_iter) +
           ',' + format_number(r.epochs) + ',' + format_number(r.paper_passes) + ',' +
           format_number(r.emp_risk) + ',' + format_number(r.gen_error) + '\n';
  }
  return out;
}

std::string format_aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "m,snapshot_iter,epochs,paper_passes,mean_gen_error,std_gen_error,mean_emp_risk\n";
  for (const auto& r : rows) {
    out += std::to_string(r.m) + ',' + std::to_string(r.snapshot_iter) + ',' + format_number(r.epochs) +
           ',' + format_number(r.paper_passes) + ',' + format_number(r.mean_gen_error) + ',' +
           format_number(r.std_gen_error) + ',' + format_number(r.mean_emp_risk) + '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_text_file(dir / "raw.csv", format_raw_csv(report.raw));
  write_text_file(dir / "aggregate.csv", format_aggregate_csv(report.aggregate));
}

std::vector<RawRow> run_train(const ExperimentConfig& config, std::vector<std::string>* warnings) {
  ExperimentConfig single = config;
  single.trials = 1;
  if (!single.landmark_counts.empty()) single.landmark_counts.resize(1);
  ExperimentReport report = run_experiment(single);
  if (warnings) *warnings = std::move(report.warnings);
  return report.raw;
}

CvReport run_cv(const ExperimentConfig& config) {
  config.validate();
  if (config.cv_grid.empty()) throw InputError("grid: cross-validation grid is empty");
  const Dataset data = load_source(config);
  const auto n = static_cast<std::size_t>(data.n());
  const auto validation_count = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(n)));
  if (validation_count < 1 || validation_count >= n)
    throw InputError("val_frac: split leaves an empty train or validation part");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(derive_seed(config.seed, kSplitStream));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[split_rng.index(i + 1)]);
  const std::vector<std::size_t> validation_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(validation_count));
  const std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(validation_count), order.end());
  const Dataset train_data = data.subset(train_idx);
  const Dataset validation_data = data.subset(validation_idx);
  const std::size_t n_train = train_idx.size();

  const ResolvedSchedule schedule = resolve_schedule(config, n_train);
  const std::size_t m = schedule.landmark_counts.empty() ? n_train : schedule.landmark_counts.front();
  if (m == 0 || m > n_train) throw InputError("m: landmark count exceeds the training split");
  Rng landmark_rng(derive_seed(config.seed, kLandmarkStream));
  auto factor = std::make_shared<const NystromFactor>(build_factor(
      config.kernel, train_data.X, select_landmarks(n_train, m, config.landmark_strategy, landmark_rng),
      config.rtol));

  TrainConfig tc;
  tc.batch_size = schedule.batch_size;
  tc.iterations = schedule.iterations;
  tc.seed = derive_seed(config.seed, kIndexStream);
  tc.snapshot_stride = config.snapshot_stride;
  tc.storage = config.storage;

  CvConfig cv{config.cv_grid, config.truncation};
  const CvResult selection = cross_validate_step_size(cv, train_data, validation_data, config.kernel, factor, tc);

  // Test set: toy draws a fresh evaluation grid; csv uses eval_csv or the validation part.
  Matrix test_points;
  Vector test_targets;
  if (config.source == DataSource::toy) {
    TrialInputs inputs = make_trial_inputs(config, 0, nullptr, nullptr);
    test_points = std::move(inputs.eval_points);
    test_targets = std::move(inputs.eval_targets);
  } else {
    const Dataset test = config.eval_csv_path.empty() ? validation_data : load_csv(config.eval_csv_path);
    test_points = test.X;
    if (config.target == TargetMode::noiseless_f_rho) {
      if (!test.f_true) throw InputError("target=noiseless needs an ftrue column in the test data");
      test_targets = *test.f_true;
    } else {
      test_targets = test.y;
    }
  }

  const auto stream = draw_index_stream(n_train, tc.batch_size * tc.iterations, tc.seed);
  CvReport report;
  report.chosen_eta = selection.chosen_eta;
  for (const CvRow& row : selection.rows) {
    TrainConfig candidate = tc;
    candidate.eta1 = row.eta;
    const Vector raw = train_with_stream(candidate, train_data, config.kernel, factor, stream)
                           .final_predictor()
                           .predict_all(test_points);
    const Vector clipped = raw.unaryExpr([&](double v) { return truncate(v, config.truncation); });
    report.rows.push_back({row.eta, row.validation_mse, mean_squared_error(clipped, test_targets),
                           row.eta == selection.chosen_eta});
  }
  return report;
}

std::string format_cv_csv(const CvReport& report) {
  std::string out = "eta,validation_mse,test_error,chosen\n";
  for (const auto& r : report.rows)
    out += format_number(r.eta) + ',' + format_number(r.validation_mse) + ',' +
           format_number(r.test_error) + ',' + (r.chosen ? "1" : "0") + '\n';
  return out;
}

}  // namespace nysgm
