#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nysgm/data.hpp"
#include "nysgm/kernel.hpp"
#include "nysgm/nystrom.hpp"
#include "nysgm/sgm.hpp"
#include "nysgm/types.hpp"

namespace nysgm {

using PredictFn = std::function<double(PointRef)>;

enum class TargetMode { noisy_y, noiseless_f_rho };

TargetMode parse_target_mode(std::string_view name);
std::string to_string(TargetMode mode);

struct RiskReport {
  double empirical_risk = 0.0;
  double generalization_error = 0.0;
  TargetMode target_mode = TargetMode::noiseless_f_rho;
};

double mean_squared_error(const Vector& predictions, const Vector& targets);

/// (1/n) sum (p(x_i) - y_i)^2 over the sample.
double empirical_risk(const PredictFn& predictor, const Dataset& data);

/// Mean of (p(x) - target(x))^2 over the evaluation points.
double generalization_error(const PredictFn& predictor, const Matrix& eval_points,
                            const Vector& targets);

/// Full-batch projected iteration g_{t+1} = g_t - eta_t P (T_x g_t - S_x^* y)
/// in coefficient form. Deterministic; snapshots follow the same stride rule
/// as train (batch_size and seed in `config` are ignored).
Trajectory batch_sample_iteration(const TrainConfig& config, const Dataset& data,
                                  const KernelSpec& kernel,
                                  std::shared_ptr<const NystromFactor> factor);

/// Exact kernel ridge regression: alpha = (K_nn + n lambda I)^-1 y.
class KrrModel {
 public:
  KrrModel(KernelSpec kernel, Matrix X, Vector alpha, double lambda);

  double operator()(PointRef x) const;
  Vector predict_all(const Matrix& X) const;

  const Vector& alpha() const { return alpha_; }
  double lambda() const { return lambda_; }

 private:
  KernelSpec kernel_;
  Matrix X_;
  Vector alpha_;
  double lambda_;
};

/// Throws InputError for lambda < 0 and NumericalError when the system is
/// singular (relative residual above 1e-8).
KrrModel krr_solve(const Dataset& data, const KernelSpec& kernel, double lambda);

/// Clamps value to [-M, M].
double truncate(double value, double M);

struct CvConfig {
  std::vector<double> grid;  // candidate constant step sizes, each in (0, kappa^2]
  double truncation = 1.0;   // M
};

struct CvRow {
  double eta = 0.0;
  double validation_mse = 0.0;
};

struct CvResult {
  double chosen_eta = 0.0;
  std::vector<CvRow> rows;  // in grid order
  PredictFn model;          // x -> truncate(f_{chosen}(x), M)
  Trajectory trajectory;    // of the chosen candidate
};

/// Hold-out selection of a constant step size. Every candidate is trained with
/// the same index stream (drawn from `config_template.seed`) and scored by the
/// validation MSE of its truncated final iterate. Ties go to the smaller step.
CvResult cross_validate_step_size(const CvConfig& cv, const Dataset& train_data,
                                  const Dataset& validation_data, const KernelSpec& kernel,
                                  std::shared_ptr<const NystromFactor> factor,
                                  const TrainConfig& config_template);

}  // namespace nysgm
