#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nysgm/data.hpp"
#include "nysgm/kernel.hpp"
#include "nysgm/nystrom.hpp"
#include "nysgm/types.hpp"

namespace nysgm {

enum class StorageStrategy { precompute_cross_gram, on_the_fly };

StorageStrategy parse_storage_strategy(std::string_view name);
std::string to_string(StorageStrategy strategy);

/// Training parameters. The step size at iteration t (1-based) is eta1 * t^-theta.
struct TrainConfig {
  double eta1 = 0.1;
  double theta = 0.0;
  std::size_t batch_size = 1;
  std::size_t iterations = 1;
  std::uint64_t seed = 0;
  /// Steps between recorded snapshots; 0 selects one epoch, ceil(n / b).
  std::size_t snapshot_stride = 0;
  StorageStrategy storage = StorageStrategy::precompute_cross_gram;

  double step_size(std::size_t t) const;
  std::size_t stride_for(std::size_t n) const;

  /// Throws InputError if eta1 < 0, eta1 * kappa^2 > 1, theta outside [0,1),
  /// or batch_size/iterations are zero. Returns human-readable warnings
  /// (eta1 * kappa^2 > 1/2).
  std::vector<std::string> validate(double kappa) const;
};

/// Coefficient vector b_t over the factor's rank space at iteration t (1-based).
struct ModelState {
  Vector coefficients;
  std::size_t t = 1;

  static ModelState initial(Eigen::Index rank) { return {Vector::Zero(rank), 1}; }
};

/// f(x) = K_{x, landmarks} R c = phi(x) . c.
class Predictor {
 public:
  Predictor(KernelSpec kernel, std::shared_ptr<const NystromFactor> factor, Vector coefficients);

  double operator()(PointRef x) const;
  Vector predict_all(const Matrix& X) const;

  const Vector& coefficients() const { return coefficients_; }
  const NystromFactor& factor() const { return *factor_; }
  const KernelSpec& kernel() const { return kernel_; }

 private:
  KernelSpec kernel_;
  std::shared_ptr<const NystromFactor> factor_;
  Vector coefficients_;
};

/// Supplies feature rows phi(x_i) = R^T K_{landmarks, x_i} for the training inputs.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual void feature(std::size_t i, Eigen::Ref<Vector> out) const = 0;
  virtual std::size_t samples() const = 0;
};

/// Stores all n feature rows up front: O(n * rank) memory.
class PrecomputedFeatures final : public FeatureProvider {
 public:
  PrecomputedFeatures(const KernelSpec& kernel, const NystromFactor& factor, const Matrix& X);
  void feature(std::size_t i, Eigen::Ref<Vector> out) const override;
  std::size_t samples() const override { return static_cast<std::size_t>(features_.rows()); }

 private:
  Matrix features_;
};

/// Evaluates kernel entries on demand: O(m * rank + nd) memory.
class OnTheFlyFeatures final : public FeatureProvider {
 public:
  OnTheFlyFeatures(const KernelSpec& kernel, std::shared_ptr<const NystromFactor> factor, const Matrix& X);
  void feature(std::size_t i, Eigen::Ref<Vector> out) const override;
  std::size_t samples() const override { return static_cast<std::size_t>(X_.rows()); }

 private:
  KernelSpec kernel_;
  std::shared_ptr<const NystromFactor> factor_;
  Matrix X_;
};

std::unique_ptr<FeatureProvider> make_feature_provider(StorageStrategy strategy, const KernelSpec& kernel,
                                                       std::shared_ptr<const NystromFactor> factor,
                                                       const Matrix& X);

/// One NySGM update in coefficient form:
///   b_{t+1} = b_t - (eta_t / b) R^T sum_{i in batch} (K_i K_i^T R b_t - y_i K_i)
/// where K_i = K_{landmarks, x_i}; evaluated as b_t - (eta_t / b) sum (phi_i . b_t - y_i) phi_i.
/// Throws InputError on an out-of-range index.
ModelState step(const ModelState& state, const TrainConfig& config, const Vector& y,
                const FeatureProvider& features,
                std::span<const std::size_t> batch_indices);

struct Snapshot {
  std::size_t iteration = 0;  // steps completed; the model is f_{iteration+1}
  Vector coefficients;
};

struct Trajectory {
  KernelSpec kernel;
  std::shared_ptr<const NystromFactor> factor;
  std::size_t batch_size = 1;
  std::size_t samples = 0;
  std::vector<Snapshot> snapshots;
  std::vector<std::string> warnings;

  Predictor predictor(std::size_t snapshot) const;
  Predictor final_predictor() const { return predictor(snapshots.size() - 1); }
};

/// j_1, ..., j_count drawn i.i.d. uniform on [0, n) with replacement.
std::vector<std::size_t> draw_index_stream(std::size_t n, std::size_t count, std::uint64_t seed);

/// Runs `config.iterations` steps starting from b_1 = 0, drawing the index
/// stream from `config.seed`. Snapshots are recorded every stride steps and at T.
Trajectory train(const TrainConfig& config, const Dataset& data, const KernelSpec& kernel,
                 std::shared_ptr<const NystromFactor> factor);

/// As train, but replays a caller-provided index stream of length b * T.
/// Batch t uses stream entries [b(t-1), bt).
Trajectory train_with_stream(const TrainConfig& config, const Dataset& data,
                             const KernelSpec& kernel, std::shared_ptr<const NystromFactor> factor,
                             std::span<const std::size_t> index_stream);

struct PassCount {
  double epochs = 0.0;       // bt / n
  double paper_passes = 0.0; // ceil(bt / m)
};

PassCount pass_count(std::size_t t, std::size_t batch_size, std::size_t n, std::size_t m);

}  // namespace nysgm
