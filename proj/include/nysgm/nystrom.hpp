#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nysgm/kernel.hpp"
#include "nysgm/rng.hpp"
#include "nysgm/types.hpp"

namespace nysgm {

inline constexpr double kDefaultRankTolerance = 1e-10;

enum class LandmarkStrategy { first_m, uniform_without_replacement };

LandmarkStrategy parse_landmark_strategy(std::string_view name);
std::string to_string(LandmarkStrategy strategy);

/// Picks m distinct training indices. first_m ignores the generator.
std::vector<std::size_t> select_landmarks(std::size_t n, std::size_t m, LandmarkStrategy strategy,
                                          Rng& rng);

/// R with R R^T equal to the pseudo-inverse of K_mm at numerical rank `rank`.
struct FactorCore {
  Matrix R;  // m x rank
  Eigen::Index rank = 0;
  double rtol = kDefaultRankTolerance;
};

/// Eigendecomposes the symmetric PSD matrix K_mm = Q diag(lambda) Q^T and keeps
/// eigenpairs with lambda_i > rtol * lambda_max, giving R = Q_kept diag(lambda^-1/2).
///
/// Throws InputError if K_mm is not square or is asymmetric beyond 1e-12 absolute,
/// DegenerateError if no eigenvalue survives the cutoff. The eigensolve runs in
/// long double; build_factor also forms K_mm in long double.
FactorCore factor(const Matrix& K_mm, double rtol = kDefaultRankTolerance);

/// Landmark set plus the factor of its Gram matrix. Immutable once built.
struct NystromFactor {
  std::vector<std::size_t> landmark_indices;
  Matrix landmarks;  // m x d
  Matrix R;          // m x rank
  Eigen::Index rank = 0;
  double rtol = kDefaultRankTolerance;

  std::size_t size() const { return landmark_indices.size(); }
};

NystromFactor build_factor(const KernelSpec& kernel, const Matrix& X,
                           std::vector<std::size_t> landmark_indices,
                           double rtol = kDefaultRankTolerance);

/// Feature map phi(x) = R^T K_{landmarks, x}, so that f(x) = phi(x) . c.
/// Kernel entries and the product are evaluated in long double, matching
/// build_factor: near the rank cutoff, double rounding of either moves predictions
/// by ~1e-9.
void feature_into(const KernelSpec& kernel, const NystromFactor& factor, PointRef x,
                  Eigen::Ref<Vector> out);
Vector feature(const KernelSpec& kernel, const NystromFactor& factor, PointRef x);

/// Row i is phi(X.row(i))^T; n x rank.
Matrix feature_matrix(const KernelSpec& kernel, const NystromFactor& factor, const Matrix& X);

}  // namespace nysgm
