#include "nysgm/sgm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nysgm/error.hpp"
#include "nysgm/rng.hpp"

namespace nysgm {

StorageStrategy parse_storage_strategy(std::string_view name) {
  if (name == "precompute_cross_gram" || name == "precompute")
    return StorageStrategy::precompute_cross_gram;
  if (name == "on_the_fly") return StorageStrategy::on_the_fly;
  throw InputError("unknown storage strategy '" + std::string(name) + "'");
}

std::string to_string(StorageStrategy strategy) {
  return strategy == StorageStrategy::precompute_cross_gram ? "precompute_cross_gram"
                                                            : "on_the_fly";
}

double TrainConfig::step_size(std::size_t t) const {
  if (theta == 0.0) return eta1;
  return eta1 * std::pow(static_cast<double>(t), -theta);
}

std::size_t TrainConfig::stride_for(std::size_t n) const {
  if (snapshot_stride > 0) return snapshot_stride;
  return (n + batch_size - 1) / batch_size;
}

std::vector<std::string> TrainConfig::validate(double kappa) const {
  if (!(eta1 >= 0.0) || !std::isfinite(eta1)) throw InputError("eta1 must be >= 0");
  if (!(theta >= 0.0 && theta < 1.0)) throw InputError("theta must lie in [0, 1)");
  if (batch_size == 0) throw InputError("batch size must be >= 1");
  if (iterations == 0) throw InputError("iterations T must be >= 1");
  const double scaled = eta1 * kappa * kappa;
  if (scaled > 1.0) throw InputError("eta1 * kappa^2 must be <= 1");
  std::vector<std::string> warnings;
  if (scaled > 0.5) {
    std::ostringstream msg;
    msg << "eta1 * kappa^2 = " << scaled << " exceeds 1/2; convergence guarantees assume <= 1/2";
    warnings.push_back(msg.str());
  }
  return warnings;
}

Predictor::Predictor(KernelSpec kernel, std::shared_ptr<const NystromFactor> factor,
                     Vector coefficients)
    : kernel_(kernel), factor_(std::move(factor)), coefficients_(std::move(coefficients)) {
  if (!factor_) throw InputError("predictor needs a factor");
  if (coefficients_.size() != factor_->rank)
    throw InputError("predictor coefficients do not match the factor rank");
}

double Predictor::operator()(PointRef x) const {
  if (x.size() != factor_->landmarks.cols()) throw InputError("predict: dimension mismatch");
  return feature(kernel_, *factor_, x).dot(coefficients_);
}

Vector Predictor::predict_all(const Matrix& X) const {
  if (X.cols() != factor_->landmarks.cols()) throw InputError("predict: dimension mismatch");
  return feature_matrix(kernel_, *factor_, X) * coefficients_;
}

PrecomputedFeatures::PrecomputedFeatures(const KernelSpec& kernel, const NystromFactor& factor,
                                         const Matrix& X)
    : features_(feature_matrix(kernel, factor, X)) {}

void PrecomputedFeatures::feature(std::size_t i, Eigen::Ref<Vector> out) const {
  out = features_.row(static_cast<Eigen::Index>(i)).transpose();
}

OnTheFlyFeatures::OnTheFlyFeatures(const KernelSpec& kernel, std::shared_ptr<const NystromFactor> factor,
                                   const Matrix& X)
    : kernel_(kernel), factor_(std::move(factor)), X_(X) {
  if (!factor_) throw InputError("feature provider needs a factor");
}

void OnTheFlyFeatures::feature(std::size_t i, Eigen::Ref<Vector> out) const {
  feature_into(kernel_, *factor_, X_.row(static_cast<Eigen::Index>(i)), out);
}

std::unique_ptr<FeatureProvider> make_feature_provider(StorageStrategy strategy, const KernelSpec& kernel,
                                                       std::shared_ptr<const NystromFactor> factor,
                                                       const Matrix& X) {
  if (strategy == StorageStrategy::precompute_cross_gram)
    return std::make_unique<PrecomputedFeatures>(kernel, *factor, X);
  return std::make_unique<OnTheFlyFeatures>(kernel, std::move(factor), X);
}

namespace {

// Shared by step() and the training loop; `phi` and `gradient` are rank-length scratch.
void apply_step(Vector& coefficients, double eta, const Vector& y, const FeatureProvider& features,
                std::span<const std::size_t> batch, Vector& phi, Vector& gradient) {
  gradient.setZero();
  for (const std::size_t i : batch) {
    features.feature(i, phi);
    const double residual = phi.dot(coefficients) - y(static_cast<Eigen::Index>(i));
    gradient.noalias() += residual * phi;
  }
  coefficients.noalias() -= (eta / static_cast<double>(batch.size())) * gradient;
}

void check_indices(std::span<const std::size_t> indices, std::size_t n) {
  for (const std::size_t i : indices)
    if (i >= n)
      throw InputError("sample index " + std::to_string(i) + " out of range for n=" +
                       std::to_string(n));
}

}  // namespace

ModelState step(const ModelState& state, const TrainConfig& config, const Vector& y,
                const FeatureProvider& features, std::span<const std::size_t> batch_indices) {
  if (batch_indices.empty()) throw InputError("step: empty batch");
  check_indices(batch_indices, std::min(features.samples(), static_cast<std::size_t>(y.size())));
  ModelState next{state.coefficients, state.t + 1};
  Vector phi(state.coefficients.size());
  Vector gradient(state.coefficients.size());
  apply_step(next.coefficients, config.step_size(state.t), y, features, batch_indices, phi, gradient);
  return next;
}

Predictor Trajectory::predictor(std::size_t snapshot) const {
  if (snapshot >= snapshots.size()) throw InputError("trajectory: snapshot index out of range");
  return Predictor(kernel, factor, snapshots[snapshot].coefficients);
}

std::vector<std::size_t> draw_index_stream(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n == 0) throw InputError("index stream needs n >= 1");
  Rng rng(seed);
  std::vector<std::size_t> stream(count);
  for (auto& j : stream) j = rng.index(n);
  return stream;
}

Trajectory train(const TrainConfig& config, const Dataset& data, const KernelSpec& kernel,
                 std::shared_ptr<const NystromFactor> factor) {
  if (config.iterations == 0) throw InputError("iterations T must be >= 1");
  if (config.batch_size == 0) throw InputError("batch size must be >= 1");
  const auto stream = draw_index_stream(static_cast<std::size_t>(data.n()),
                                        config.batch_size * config.iterations, config.seed);
  return train_with_stream(config, data, kernel, std::move(factor), stream);
}

Trajectory train_with_stream(const TrainConfig& config, const Dataset& data,
                             const KernelSpec& kernel, std::shared_ptr<const NystromFactor> factor,
                             std::span<const std::size_t> index_stream) {
  data.validate();
  kernel.validate();
  if (!factor) throw InputError("train: missing factor");
  if (factor->landmarks.cols() != data.dim())
    throw InputError("train: factor dimension differs from the data");
  Trajectory trajectory;
  trajectory.warnings = config.validate(kernel.kappa);
  const auto n = static_cast<std::size_t>(data.n());
  const std::size_t b = config.batch_size;
  const std::size_t T = config.iterations;
  if (index_stream.size() != b * T)
    throw InputError("train: index stream length must equal b * T");
  check_indices(index_stream, n);

  const auto features = make_feature_provider(config.storage, kernel, factor, data.X);
  const std::size_t stride = config.stride_for(n);
  trajectory.kernel = kernel;
  trajectory.factor = factor;
  trajectory.batch_size = b;
  trajectory.samples = n;
  trajectory.snapshots.reserve(T / stride + 1);

  Vector coefficients = Vector::Zero(factor->rank);
  Vector phi(factor->rank);
  Vector gradient(factor->rank);
  for (std::size_t t = 1; t <= T; ++t) {
    apply_step(coefficients, config.step_size(t), data.y, *features, index_stream.subspan((t - 1) * b, b),
               phi, gradient);
    if (t % stride == 0 || t == T) trajectory.snapshots.push_back({t, coefficients});
  }
  return trajectory;
}

PassCount pass_count(std::size_t t, std::size_t batch_size, std::size_t n, std::size_t m) {
  const std::size_t processed = batch_size * t;
  PassCount count;
  count.epochs = static_cast<double>(processed) / static_cast<double>(n);
  count.paper_passes = static_cast<double>((processed + m - 1) / m);
  return count;
}

}  // namespace nysgm
