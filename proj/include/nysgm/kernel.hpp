#pragma once

#include <string>
#include <string_view>

#include "nysgm/types.hpp"

namespace nysgm {

enum class KernelFamily { gaussian, linear, polynomial };

KernelFamily parse_kernel_family(std::string_view name);
std::string to_string(KernelFamily family);

/// Kernel family, its parameters, and a bound kappa with K(x,x) <= kappa^2.
///
/// gaussian:   exp(-|x-x'|^2 / (2 sigma^2)), kappa fixed to 1
/// linear:     <x, x'>
/// polynomial: (<x, x'> + offset)^degree
///
/// For linear and polynomial kernels kappa is a user-declared bound on the
/// input domain; it only enters step-size validation.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double sigma = 1.0;
  int degree = 2;
  double offset = 1.0;
  double kappa = 1.0;

  static KernelSpec gaussian(double sigma);
  static KernelSpec linear(double kappa);
  static KernelSpec polynomial(int degree, double offset, double kappa);

  /// Throws InputError when an invariant is violated.
  void validate() const;
};

double eval_kernel(const KernelSpec& spec, PointRef x, PointRef x_prime);
/// Same value in long double; used where Gram entries feed an ill-conditioned solve.
long double eval_kernel_extended(const KernelSpec& spec, PointRef x, PointRef x_prime);

/// Kernel matrix [K(X_i, X'_j)] for point sets stored as rows.
Matrix gram(const KernelSpec& spec, const Matrix& X, const Matrix& X_prime);

}  // namespace nysgm
