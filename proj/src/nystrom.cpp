#include "nysgm/nystrom.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "nysgm/error.hpp"

namespace nysgm {

namespace {

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Kernel entries, the eigendecomposition and the feature products all run in
// long double. With eigenvalues kept down to rtol * lambda_max, rounding the
// Gram entries to double alone moves predictions by ~1e-9 on clustered gaussian
// landmarks; m is small, so the extra precision is cheap.
FactorCore factor_extended(const MatrixL& K_mm, double rtol) {
  if (K_mm.rows() == 0 || K_mm.rows() != K_mm.cols())
    throw InputError("factor: K_mm must be square with m >= 1");
  if (!(rtol > 0.0)) throw InputError("factor: rtol must be positive");
  if ((K_mm - K_mm.transpose()).cwiseAbs().maxCoeff() > 1e-12L)
    throw InputError("factor: K_mm is not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixL> eig(K_mm);
  if (eig.info() != Eigen::Success) throw NumericalError("factor: eigendecomposition failed");
  // Eigenvalues come back in increasing order.
  const auto& lambda = eig.eigenvalues();
  const long double lambda_max = lambda(lambda.size() - 1);
  if (!(lambda_max > 0.0L)) throw DegenerateError("factor: K_mm has rank 0");

  const long double cutoff = static_cast<long double>(rtol) * lambda_max;
  Eigen::Index first_kept = 0;
  while (first_kept < lambda.size() && !(lambda(first_kept) > cutoff)) ++first_kept;
  const Eigen::Index rank = lambda.size() - first_kept;

  FactorCore core;
  core.rank = rank;
  core.rtol = rtol;
  core.R.resize(K_mm.rows(), rank);
  // Largest eigenpair first.
  for (Eigen::Index k = 0; k < rank; ++k) {
    const Eigen::Index src = lambda.size() - 1 - k;
    core.R.col(k) = (eig.eigenvectors().col(src) / std::sqrt(lambda(src))).cast<double>();
  }
  return core;
}

}  // namespace

LandmarkStrategy parse_landmark_strategy(std::string_view name) {
  if (name == "first_m" || name == "first") return LandmarkStrategy::first_m;
  if (name == "uniform_without_replacement" || name == "uniform")
    return LandmarkStrategy::uniform_without_replacement;
  throw InputError("unknown landmark strategy '" + std::string(name) + "'");
}

std::string to_string(LandmarkStrategy strategy) {
  return strategy == LandmarkStrategy::first_m ? "first_m" : "uniform_without_replacement";
}

std::vector<std::size_t> select_landmarks(std::size_t n, std::size_t m, LandmarkStrategy strategy,
                                          Rng& rng) {
  if (m == 0 || m > n)
    throw InputError("landmark count m=" + std::to_string(m) + " must be in [1, n=" +
                     std::to_string(n) + "]");
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  if (strategy == LandmarkStrategy::uniform_without_replacement) {
    // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
    for (std::size_t i = 0; i < m; ++i) std::swap(indices[i], indices[i + rng.index(n - i)]);
  }
  indices.resize(m);
  return indices;
}

FactorCore factor(const Matrix& K_mm, double rtol) {
  return factor_extended(K_mm.cast<long double>(), rtol);
}

NystromFactor build_factor(const KernelSpec& kernel, const Matrix& X,
                           std::vector<std::size_t> landmark_indices, double rtol) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (landmark_indices.empty() || landmark_indices.size() > n)
    throw InputError("build_factor: need 1 <= m <= n landmarks");
  NystromFactor f;
  f.landmarks.resize(static_cast<Eigen::Index>(landmark_indices.size()), X.cols());
  for (std::size_t k = 0; k < landmark_indices.size(); ++k) {
    if (landmark_indices[k] >= n) throw InputError("build_factor: landmark index out of range");
    f.landmarks.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(landmark_indices[k]));
  }
  const Eigen::Index m = f.landmarks.rows();
  MatrixL K_mm(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      K_mm(i, j) = eval_kernel_extended(kernel, f.landmarks.row(i), f.landmarks.row(j));
  FactorCore core = factor_extended(K_mm, rtol);
  f.landmark_indices = std::move(landmark_indices);
  f.R = std::move(core.R);
  f.rank = core.rank;
  f.rtol = core.rtol;
  return f;
}

void feature_into(const KernelSpec& kernel, const NystromFactor& factor, PointRef x,
                  Eigen::Ref<Vector> out) {
  if (x.size() != factor.landmarks.cols()) throw InputError("feature: dimension mismatch");
  if (out.size() != factor.rank) throw InputError("feature: output size must equal the rank");
  const Eigen::Index m = factor.landmarks.rows();
  thread_local std::vector<long double> column;
  column.resize(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j)
    column[static_cast<std::size_t>(j)] = eval_kernel_extended(kernel, factor.landmarks.row(j), x);
  for (Eigen::Index r = 0; r < factor.rank; ++r) {
    long double sum = 0.0L;
    for (Eigen::Index j = 0; j < m; ++j)
      sum += static_cast<long double>(factor.R(j, r)) * column[static_cast<std::size_t>(j)];
    out(r) = static_cast<double>(sum);
  }
}

Vector feature(const KernelSpec& kernel, const NystromFactor& factor, PointRef x) {
  Vector out(factor.rank);
  feature_into(kernel, factor, x, out);
  return out;
}

Matrix feature_matrix(const KernelSpec& kernel, const NystromFactor& factor, const Matrix& X) {
  if (X.cols() != factor.landmarks.cols()) throw InputError("feature: dimension mismatch");
  Matrix out(X.rows(), factor.rank);
  Vector row(factor.rank);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    feature_into(kernel, factor, X.row(i), row);
    out.row(i) = row.transpose();
  }
  return out;
}

}  // namespace nysgm
