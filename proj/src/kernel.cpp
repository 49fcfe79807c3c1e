#include "nysgm/kernel.hpp"

#include <cmath>

#include "nysgm/error.hpp"

namespace nysgm {

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "linear") return KernelFamily::linear;
  if (name == "polynomial") return KernelFamily::polynomial;
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::linear: return "linear";
    case KernelFamily::polynomial: return "polynomial";
  }
  return "unknown";
}

KernelSpec KernelSpec::gaussian(double sigma) {
  KernelSpec spec;
  spec.family = KernelFamily::gaussian;
  spec.sigma = sigma;
  spec.kappa = 1.0;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::linear(double kappa) {
  KernelSpec spec;
  spec.family = KernelFamily::linear;
  spec.kappa = kappa;
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::polynomial(int degree, double offset, double kappa) {
  KernelSpec spec;
  spec.family = KernelFamily::polynomial;
  spec.degree = degree;
  spec.offset = offset;
  spec.kappa = kappa;
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw InputError("kernel kappa must be >= 1");
  switch (family) {
    case KernelFamily::gaussian:
      if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InputError("gaussian kernel needs sigma > 0");
      if (kappa != 1.0) throw InputError("gaussian kernel has kappa = 1");
      break;
    case KernelFamily::polynomial:
      if (degree < 1) throw InputError("polynomial kernel needs degree >= 1");
      if (!std::isfinite(offset)) throw InputError("polynomial offset must be finite");
      break;
    case KernelFamily::linear:
      break;
  }
}

namespace {

template <typename Real>
Real kernel_value(const KernelSpec& spec, PointRef x, PointRef x_prime) {
  if (x.size() != x_prime.size() || x.size() == 0)
    throw InputError("kernel arguments must share a dimension d >= 1");
  switch (spec.family) {
    case KernelFamily::gaussian: {
      Real sq = 0;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const Real diff = Real(x[k]) - Real(x_prime[k]);
        sq += diff * diff;
      }
      return std::exp(-sq / (Real(2) * Real(spec.sigma) * Real(spec.sigma)));
    }
    case KernelFamily::linear: {
      Real dot = 0;
      for (Eigen::Index k = 0; k < x.size(); ++k) dot += Real(x[k]) * Real(x_prime[k]);
      return dot;
    }
    case KernelFamily::polynomial: {
      Real dot = 0;
      for (Eigen::Index k = 0; k < x.size(); ++k) dot += Real(x[k]) * Real(x_prime[k]);
      return std::pow(dot + Real(spec.offset), spec.degree);
    }
  }
  return 0;
}

}  // namespace

double eval_kernel(const KernelSpec& spec, PointRef x, PointRef x_prime) {
  return kernel_value<double>(spec, x, x_prime);
}

long double eval_kernel_extended(const KernelSpec& spec, PointRef x, PointRef x_prime) {
  return kernel_value<long double>(spec, x, x_prime);
}

Matrix gram(const KernelSpec& spec, const Matrix& X, const Matrix& X_prime) {
  if (X.rows() == 0 || X_prime.rows() == 0) throw InputError("gram: empty point list");
  if (X.cols() != X_prime.cols()) throw InputError("gram: point dimensions differ");
  Matrix G(X.rows(), X_prime.rows());
  for (Eigen::Index j = 0; j < X_prime.rows(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) G(i, j) = eval_kernel(spec, X.row(i), X_prime.row(j));
  return G;
}

}  // namespace nysgm
