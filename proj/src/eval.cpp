#include "nysgm/eval.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "nysgm/error.hpp"

namespace nysgm {

TargetMode parse_target_mode(std::string_view name) {
  if (name == "noisy" || name == "noisy_y") return TargetMode::noisy_y;
  if (name == "noiseless" || name == "noiseless_f_rho") return TargetMode::noiseless_f_rho;
  throw InputError("unknown target mode '" + std::string(name) + "'");
}

std::string to_string(TargetMode mode) {
  return mode == TargetMode::noisy_y ? "noisy" : "noiseless";
}

double mean_squared_error(const Vector& predictions, const Vector& targets) {
  if (predictions.size() != targets.size()) throw InputError("mse: length mismatch");
  if (predictions.size() == 0) throw InputError("mse: empty input");
  return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

double empirical_risk(const PredictFn& predictor, const Dataset& data) {
  if (data.n() == 0) throw InputError("empirical_risk: empty data");
  data.validate();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double r = predictor(data.X.row(i)) - data.y(i);
    sum += r * r;
  }
  return sum / static_cast<double>(data.n());
}

double generalization_error(const PredictFn& predictor, const Matrix& eval_points,
                            const Vector& targets) {
  if (eval_points.rows() != targets.size())
    throw InputError("generalization_error: points and targets differ in length");
  if (targets.size() == 0) throw InputError("generalization_error: no evaluation points");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const double r = predictor(eval_points.row(i)) - targets(i);
    sum += r * r;
  }
  return sum / static_cast<double>(targets.size());
}

Trajectory batch_sample_iteration(const TrainConfig& config, const Dataset& data,
                                  const KernelSpec& kernel,
                                  std::shared_ptr<const NystromFactor> factor) {
  data.validate();
  kernel.validate();
  if (!factor) throw InputError("batch_sample_iteration: missing factor");
  if (factor->landmarks.cols() != data.dim())
    throw InputError("batch_sample_iteration: factor dimension differs from the data");
  Trajectory trajectory;
  trajectory.warnings = config.validate(kernel.kappa);
  const auto n = static_cast<std::size_t>(data.n());
  const Matrix phi = feature_matrix(kernel, *factor, data.X);  // n x rank
  const std::size_t stride = config.stride_for(n);
  trajectory.kernel = kernel;
  trajectory.factor = factor;
  trajectory.batch_size = config.batch_size;
  trajectory.samples = n;

  Vector coefficients = Vector::Zero(factor->rank);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    const Vector residual = phi * coefficients - data.y;
    coefficients.noalias() -= (config.step_size(t) * inv_n) * (phi.transpose() * residual);
    if (t % stride == 0 || t == config.iterations) trajectory.snapshots.push_back({t, coefficients});
  }
  return trajectory;
}

KrrModel::KrrModel(KernelSpec kernel, Matrix X, Vector alpha, double lambda)
    : kernel_(kernel), X_(std::move(X)), alpha_(std::move(alpha)), lambda_(lambda) {}

double KrrModel::operator()(PointRef x) const {
  if (x.size() != X_.cols()) throw InputError("krr predict: dimension mismatch");
  double value = 0.0;
  for (Eigen::Index i = 0; i < X_.rows(); ++i) value += alpha_(i) * eval_kernel(kernel_, x, X_.row(i));
  return value;
}

Vector KrrModel::predict_all(const Matrix& X) const { return gram(kernel_, X, X_) * alpha_; }

KrrModel krr_solve(const Dataset& data, const KernelSpec& kernel, double lambda) {
  data.validate();
  kernel.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("krr_solve: lambda must be >= 0");
  const double n = static_cast<double>(data.n());
  Matrix system = gram(kernel, data.X, data.X);
  system.diagonal().array() += n * lambda;
  Eigen::LDLT<Matrix> ldlt(system);
  if (ldlt.info() != Eigen::Success) throw NumericalError("krr_solve: factorization failed");
  Vector alpha = ldlt.solve(data.y);
  const double y_norm = data.y.norm();
  const double residual = (system * alpha - data.y).norm();
  if (!alpha.allFinite() || residual > 1e-8 * std::max(y_norm, 1e-300))
    throw NumericalError("krr_solve: system is singular to working precision");
  return KrrModel(kernel, data.X, std::move(alpha), lambda);
}

double truncate(double value, double M) {
  if (value > M) return M;
  if (value < -M) return -M;
  return value;
}

CvResult cross_validate_step_size(const CvConfig& cv, const Dataset& train_data,
                                  const Dataset& validation_data, const KernelSpec& kernel,
                                  std::shared_ptr<const NystromFactor> factor,
                                  const TrainConfig& config_template) {
  if (cv.grid.empty()) throw InputError("cross-validation grid is empty");
  if (!(cv.truncation > 0.0)) throw InputError("truncation level M must be positive");
  const double kappa_sq = kernel.kappa * kernel.kappa;
  for (const double eta : cv.grid)
    if (!(eta > 0.0 && eta <= kappa_sq))
      throw InputError("cross-validation candidates must lie in (0, kappa^2]");
  validation_data.validate();

  const auto stream =
      draw_index_stream(static_cast<std::size_t>(train_data.n()),
                        config_template.batch_size * config_template.iterations, config_template.seed);
  CvResult result;
  std::size_t best = 0;
  for (std::size_t k = 0; k < cv.grid.size(); ++k) {
    TrainConfig config = config_template;
    config.eta1 = cv.grid[k];
    config.theta = 0.0;
    Trajectory trajectory = train_with_stream(config, train_data, kernel, factor, stream);
    const Vector raw = trajectory.final_predictor().predict_all(validation_data.X);
    const Vector clipped = raw.unaryExpr([&](double v) { return truncate(v, cv.truncation); });
    const double mse = mean_squared_error(clipped, validation_data.y);
    result.rows.push_back({cv.grid[k], mse});
    const CvRow& incumbent = result.rows[best];
    if (k == 0 || mse < incumbent.validation_mse ||
        (mse == incumbent.validation_mse && cv.grid[k] < incumbent.eta)) {
      best = k;
      result.trajectory = std::move(trajectory);
    }
  }
  result.chosen_eta = result.rows[best].eta;
  auto predictor = std::make_shared<Predictor>(result.trajectory.final_predictor());
  const double M = cv.truncation;
  result.model = [predictor, M](PointRef x) { return truncate((*predictor)(x), M); };
  return result;
}

}  // namespace nysgm
