#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's coefficient-form code paths.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nysgm/data.hpp"
#include "nysgm/kernel.hpp"
#include "nysgm/types.hpp"

namespace nysgm::testing {

// Classic (unprojected) SGM: f = sum_i a_i K(., x_i) over all n samples.
// Returns predictions at `probe` after every step listed in `record_at`.
inline std::vector<Vector> plain_sgm_predictions(const Dataset& data, const KernelSpec& kernel,
                                                 double eta, std::size_t batch,
                                                 std::span<const std::size_t> stream,
                                                 const Matrix& probe,
                                                 const std::vector<std::size_t>& record_at) {
  const Eigen::Index n = data.n();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = eval_kernel(kernel, data.X.row(i), data.X.row(j));
  Matrix K_probe(probe.rows(), n);
  for (Eigen::Index p = 0; p < probe.rows(); ++p)
    for (Eigen::Index j = 0; j < n; ++j) K_probe(p, j) = eval_kernel(kernel, probe.row(p), data.X.row(j));

  Vector a = Vector::Zero(n);
  std::vector<Vector> out;
  std::size_t next_record = 0;
  const std::size_t T = stream.size() / batch;
  for (std::size_t t = 1; t <= T; ++t) {
    Vector delta = Vector::Zero(n);
    for (std::size_t k = 0; k < batch; ++k) {
      const auto j = static_cast<Eigen::Index>(stream[(t - 1) * batch + k]);
      const double fj = K.row(j).dot(a);
      delta(j) += (fj - data.y(j));
    }
    a -= (eta / static_cast<double>(batch)) * delta;
    if (next_record < record_at.size() && record_at[next_record] == t) {
      out.push_back(K_probe * a);
      ++next_record;
    }
  }
  return out;
}

// Functional form of the projected update: f = sum_k c_k K(., landmark_k),
//   c <- c - (eta/b) sum_j (f(x_j) - y_j) K_mm^+ K_{landmarks, x_j}
// with the pseudo-inverse taken from an SVD instead of an eigendecomposition.
// Runs in long double: this route amplifies rounding by cond(K_mm), which for
// clustered gaussian landmarks exceeds what double precision can absorb at 1e-10.
inline std::vector<Vector> functional_nysgm_predictions(
    const Dataset& data, const KernelSpec& kernel, const Matrix& landmarks, double eta,
    std::size_t batch, std::span<const std::size_t> stream, const Matrix& probe,
    const std::vector<std::size_t>& record_at, double rtol = 1e-10) {
  using Real = long double;
  using MatrixL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  if (kernel.family != KernelFamily::gaussian) throw std::invalid_argument("oracle supports gaussian only");
  const Real two_sigma_sq = Real(2) * Real(kernel.sigma) * Real(kernel.sigma);
  auto k = [&](PointRef a, PointRef b) {
    Real sq = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const Real diff = Real(a[i]) - Real(b[i]);
      sq += diff * diff;
    }
    return std::exp(-sq / two_sigma_sq);
  };

  const Eigen::Index m = landmarks.rows();
  MatrixL K_mm(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) K_mm(i, j) = k(landmarks.row(i), landmarks.row(j));
  Eigen::JacobiSVD<MatrixL> svd(K_mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorL s = svd.singularValues();
  VectorL s_inv = VectorL::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i)
    if (s(i) > Real(rtol) * s(0)) s_inv(i) = Real(1) / s(i);
  const MatrixL pinv = svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();

  auto column = [&](PointRef x) {
    VectorL col(m);
    for (Eigen::Index i = 0; i < m; ++i) col(i) = k(landmarks.row(i), x);
    return col;
  };
  MatrixL K_probe(probe.rows(), m);
  for (Eigen::Index p = 0; p < probe.rows(); ++p) K_probe.row(p) = column(probe.row(p)).transpose();

  VectorL c = VectorL::Zero(m);
  std::vector<Vector> out;
  std::size_t next_record = 0;
  const std::size_t T = stream.size() / batch;
  for (std::size_t t = 1; t <= T; ++t) {
    VectorL delta = VectorL::Zero(m);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto j = static_cast<Eigen::Index>(stream[(t - 1) * batch + b]);
      const VectorL kj = column(data.X.row(j));
      delta += (kj.dot(c) - Real(data.y(j))) * (pinv * kj);
    }
    c -= (Real(eta) / Real(batch)) * delta;
    if (next_record < record_at.size() && record_at[next_record] == t) {
      out.push_back((K_probe * c).template cast<double>());
      ++next_record;
    }
  }
  return out;
}

// Random symmetric PSD matrix A A^T with A of size m x r.
template <typename Gen>
Matrix random_psd(Eigen::Index m, Eigen::Index r, Gen& gen) {
  Matrix A(m, r);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < r; ++j) A(i, j) = gen.normal();
  Matrix K = A * A.transpose();
  return 0.5 * (K + K.transpose());
}

}  // namespace nysgm::testing
