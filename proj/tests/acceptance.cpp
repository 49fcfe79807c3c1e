// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nysgm/eval.hpp"
#include "nysgm/experiment.hpp"
#include "nysgm/nystrom.hpp"
#include "nysgm/regime.hpp"
#include "nysgm/sgm.hpp"
#include "oracles.hpp"

using namespace nysgm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::shared_ptr<const NystromFactor> first_m_factor(const KernelSpec& k, const Dataset& d, std::size_t m) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  return std::make_shared<const NystromFactor>(build_factor(k, d.X, idx));
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c, d);
  return buffer;
}

std::vector<std::size_t> snapshot_iterations(const Trajectory& t) {
  std::vector<std::size_t> at;
  for (const auto& s : t.snapshots) at.push_back(s.iteration);
  return at;
}

// 1. Coefficient form vs functional form of the projected update.
Outcome equivalence() {
  const auto k = KernelSpec::gaussian(0.2);
  Rng pick(2718);
  double worst = 0.0;
  for (int problem = 0; problem < 25; ++problem) {
    const std::size_t n = 2 + pick.index(19);
    const std::size_t m = 1 + pick.index(std::min<std::size_t>(n, 10));
    const Dataset d = gen_toy(n, 500 + static_cast<std::uint64_t>(problem));
    const auto f = first_m_factor(k, d, m);
    TrainConfig config;
    config.eta1 = 0.5;
    config.batch_size = 1 + pick.index(4);
    config.iterations = 50;
    config.snapshot_stride = 5;
    const auto stream = draw_index_stream(n, config.batch_size * 50, 900 + static_cast<std::uint64_t>(problem));
    const Trajectory traj = train_with_stream(config, d, k, f, stream);
    const Matrix probe = eval_grid(50).points;
    const auto oracle = testing::functional_nysgm_predictions(d, k, f->landmarks, config.eta1, config.batch_size,
                                                              stream, probe, snapshot_iterations(traj));
    for (std::size_t s = 0; s < oracle.size(); ++s)
      worst = std::max(worst, (traj.predictor(s).predict_all(probe) - oracle[s]).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("max |coef - functional| = %.3e (tol 1e-10, 25 problems)", worst)};
}

// 2. m = n on distinct points reduces to classic SGM.
Outcome classic_reduction() {
  const auto k = KernelSpec::gaussian(0.2);
  Dataset d = gen_toy(10, 31);
  for (Eigen::Index i = 0; i < 10; ++i) d.X(i, 0) = (static_cast<double>(i) + 0.5) / 10.0;
  const auto f = first_m_factor(k, d, 10);
  TrainConfig config;
  config.eta1 = 0.5;
  config.batch_size = 2;
  config.iterations = 50;
  config.snapshot_stride = 5;
  const auto stream = draw_index_stream(10, 100, 77);
  const Trajectory traj = train_with_stream(config, d, k, f, stream);
  const Matrix probe = eval_grid(100).points;
  const auto oracle = testing::plain_sgm_predictions(d, k, 0.5, 2, stream, probe, snapshot_iterations(traj));
  double worst = 0.0;
  for (std::size_t s = 0; s < oracle.size(); ++s)
    worst = std::max(worst, (traj.predictor(s).predict_all(probe) - oracle[s]).cwiseAbs().maxCoeff());
  return {f->rank == 10 && worst <= 1e-8,
          fmt("rank %.0f, max |nysgm - sgm| = %.3e over %.0f snapshots (tol 1e-8)", static_cast<double>(f->rank),
              worst, static_cast<double>(oracle.size()))};
}

// 3. K (R R^T) K = K on random PSD matrices.
Outcome pseudo_inverse() {
  Rng rng(161);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.index(12));
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(m)));
    const Matrix K = testing::random_psd(m, r, rng);
    const FactorCore f = factor(K);
    worst = std::max(worst, (K * (f.R * f.R.transpose()) * K - K).norm() / K.norm());
  }
  return {worst <= 1e-8, fmt("max relative residual %.3e over 100 matrices (tol 1e-8)", worst)};
}

// 4. Mean of f_T over index streams equals the batch iteration g_T.
Outcome unbiasedness() {
  const auto k = KernelSpec::gaussian(0.2);
  const Dataset d = gen_toy(8, 4242);
  const auto f = first_m_factor(k, d, 4);
  TrainConfig config;
  config.eta1 = 0.1;
  config.batch_size = 1;
  config.iterations = 10;
  const Matrix probe = eval_grid(5).points;
  const Vector g = batch_sample_iteration(config, d, k, f).final_predictor().predict_all(probe);

  constexpr int kStreams = 10000;
  Vector sum = Vector::Zero(5), sum_sq = Vector::Zero(5);
  for (int s = 0; s < kStreams; ++s) {
    config.seed = derive_seed(17, static_cast<std::uint64_t>(s));
    const Vector p = train(config, d, k, f).final_predictor().predict_all(probe);
    sum += p;
    sum_sq += p.cwiseProduct(p);
  }
  const Vector mean = sum / kStreams;
  double worst_z = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double var = (sum_sq(i) - kStreams * mean(i) * mean(i)) / (kStreams - 1);
    const double se = std::sqrt(std::max(var, 0.0) / kStreams);
    worst_z = std::max(worst_z, std::abs(mean(i) - g(i)) / se);
  }
  return {worst_z <= 3.0, fmt("max |mean f_T - g_T| / SE = %.2f at 5 probes (tol 3)", worst_z)};
}

std::string preset_aggregate_csv(ExperimentReport* out) {
  ExperimentReport report = run_experiment(toy_preset());
  std::string csv = format_aggregate_csv(report.aggregate);
  if (out) *out = std::move(report);
  return csv;
}

// 5. Toy experiment reproduction.
Outcome toy_reproduction(std::string* csv) {
  ExperimentReport report;
  *csv = preset_aggregate_csv(&report);
  bool in_band = true;
  std::string detail = "best mean gen error:";
  for (std::size_t m : {2, 4, 6, 8, 10, 12}) {
    const double best = report.best_mean_error(m);
    detail += fmt(" m=%.0f:%.4f", static_cast<double>(m), best);
    if (m >= 8 && !(best >= 0.18 && best <= 0.45)) in_band = false;
  }
  const double ratio = report.best_mean_error(2) / report.best_mean_error(12);
  const bool separated = ratio > 1.3;
  detail += std::string("; (a) m>=8 in [0.18,0.45]: ") + (in_band ? "yes" : "NO");
  detail += fmt("; (b) best(2)/best(12) = %.3f (> 1.3)", ratio);
  return {in_band && separated, detail};
}

// 6. Error decreases with n under the thm1_II regime.
Outcome rate_scaling() {
  const auto k = KernelSpec::gaussian(0.2);
  const EvalSet eval = eval_grid(2000);
  std::vector<double> medians;
  std::string detail = "median best excess error:";
  for (std::size_t n : {64, 256, 1024}) {
    RegimeParams params;
    params.regime = Regime::thm1_II;
    const Schedule s = regime_schedule(params, n);
    std::vector<double> best(10);
    for (std::size_t trial = 0; trial < 10; ++trial) {
      const Dataset d = gen_toy(n, 10000 + 100 * n + trial);
      const auto f = first_m_factor(k, d, s.landmarks);
      TrainConfig config;
      config.eta1 = s.eta;
      config.batch_size = s.batch_size;
      config.iterations = s.iterations;
      config.snapshot_stride = std::max<std::size_t>(1, s.iterations / 32);
      config.seed = derive_seed(n, trial);
      const Trajectory traj = train(config, d, k, f);
      const Matrix block = feature_matrix(k, *f, eval.points);
      double b = 1e300;
      for (const auto& snap : traj.snapshots)
        b = std::min(b, mean_squared_error(block * snap.coefficients, eval.targets));
      best[trial] = b;
    }
    std::sort(best.begin(), best.end());
    const double median = 0.5 * (best[4] + best[5]);
    medians.push_back(median);
    detail += fmt(" n=%.0f(m=%.0f):%.5f", static_cast<double>(n), static_cast<double>(s.landmarks), median);
  }
  const double ratio = medians[1] / medians[2];
  const bool decreasing = medians[0] > medians[1] && medians[1] > medians[2];
  detail += fmt("; ratio 256/1024 = %.3f (in [1.2, 4.0])", ratio);
  return {decreasing && ratio >= 1.2 && ratio <= 4.0, detail};
}

// 7. KRR baseline.
Outcome krr_baseline() {
  const auto k = KernelSpec::gaussian(0.2);
  const EvalSet eval = eval_grid(2000);
  const std::vector<double> lambdas{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  double worst_residual = 0.0, total = 0.0;
  constexpr int kTrials = 50;
  for (int trial = 0; trial < kTrials; ++trial) {
    const Dataset train = gen_toy(100, static_cast<std::uint64_t>(trial));
    const Dataset validation = gen_toy(100, 70000 + static_cast<std::uint64_t>(trial));
    double best_val = 1e300, best_gen = 0.0;
    for (double lambda : lambdas) {
      const KrrModel model = krr_solve(train, k, lambda);
      Matrix system = gram(k, train.X, train.X);
      system.diagonal().array() += 100.0 * lambda;
      worst_residual = std::max(worst_residual, (system * model.alpha() - train.y).norm() / train.y.norm());
      const double val = mean_squared_error(model.predict_all(validation.X), validation.y);
      if (val < best_val) {
        best_val = val;
        best_gen = mean_squared_error(model.predict_all(eval.points), eval.targets);
      }
    }
    total += best_gen;
  }
  const double mean_gen = total / kTrials;
  return {worst_residual <= 1e-8 && mean_gen >= 0.18 && mean_gen <= 0.45,
          fmt("max relative residual %.2e (tol 1e-8); mean gen error of validated KRR %.4f (band [0.18, 0.45])",
              worst_residual, mean_gen)};
}

// 8. Hold-out step-size selection.
Outcome cross_validation() {
  const auto k = KernelSpec::gaussian(0.2);
  const EvalSet test = eval_grid(2000);
  const double n = 100.0;
  const CvConfig cv{{1.0 / (2 * n), 1.0 / (8 * n), 1.0 / (32 * n)}, 1.0};
  double worst_ratio = 0.0;
  int chosen_best = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset train = gen_toy(100, 300 + static_cast<std::uint64_t>(rep));
    const Dataset validation = gen_toy(100, 800 + static_cast<std::uint64_t>(rep));
    const auto f = first_m_factor(k, train, 12);
    TrainConfig config;
    config.iterations = 3000;
    config.seed = derive_seed(55, static_cast<std::uint64_t>(rep));
    const CvResult r = cross_validate_step_size(cv, train, validation, k, f, config);
    const auto stream = draw_index_stream(100, 3000, config.seed);
    double grid_best = 1e300, chosen = 0.0;
    for (double eta : cv.grid) {
      TrainConfig c = config;
      c.eta1 = eta;
      const Vector p = train_with_stream(c, train, k, f, stream)
                           .final_predictor()
                           .predict_all(test.points)
                           .unaryExpr([&](double v) { return truncate(v, cv.truncation); });
      const double err = mean_squared_error(p, test.targets);
      grid_best = std::min(grid_best, err);
      if (eta == r.chosen_eta) chosen = err;
    }
    worst_ratio = std::max(worst_ratio, chosen / grid_best);
    chosen_best += chosen == grid_best;
  }
  return {worst_ratio <= 2.0, fmt("worst test(chosen)/test(grid best) = %.3f over 10 reps (tol 2); grid best chosen %.0f/10",
                                  worst_ratio, chosen_best)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  std::string first_csv;
  const std::vector<Criterion> criteria{
      {"C1 coefficient/functional equivalence", 1.0, equivalence},
      {"C2 reduction to classic SGM at m = n", 1.0, classic_reduction},
      {"C3 pseudo-inverse property of the factor", 1.0, pseudo_inverse},
      {"C4 unbiasedness over index streams", 30.0, unbiasedness},
      {"C5 toy experiment reproduction", 120.0, [&] { return toy_reproduction(&first_csv); }},
      {"C6 rate scaling under thm1_II", 300.0, rate_scaling},
      {"C7 KRR baseline", 10.0, krr_baseline},
      {"C8 hold-out step-size selection", 60.0, cross_validation},
      {"C9 byte-identical aggregate CSV on rerun", 120.0,
       [&] {
         const std::string again = preset_aggregate_csv(nullptr);
         const bool same = !first_csv.empty() && again == first_csv;
         return Outcome{same, fmt("%.0f bytes, identical: ", static_cast<double>(again.size())) +
                                  (same ? "yes" : "no")};
       }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    failures += !pass;
    std::printf("[%s] %s: %s; %.2fs (budget %.0fs)\n", pass ? "PASS" : "FAIL", c.name, outcome.detail.c_str(),
                seconds, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
