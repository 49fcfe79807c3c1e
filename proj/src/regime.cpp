#include "nysgm/regime.hpp"

#include <algorithm>
#include <cmath>

#include "nysgm/error.hpp"

namespace nysgm {

Regime parse_regime(std::string_view name) {
  if (name == "thm1_I") return Regime::thm1_I;
  if (name == "thm1_II") return Regime::thm1_II;
  if (name == "cor1_I") return Regime::cor1_I;
  if (name == "cor1_II") return Regime::cor1_II;
  if (name == "cor1_III") return Regime::cor1_III;
  if (name == "cor1_IV") return Regime::cor1_IV;
  throw InputError("unknown regime '" + std::string(name) + "'");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::thm1_I: return "thm1_I";
    case Regime::thm1_II: return "thm1_II";
    case Regime::cor1_I: return "cor1_I";
    case Regime::cor1_II: return "cor1_II";
    case Regime::cor1_III: return "cor1_III";
    case Regime::cor1_IV: return "cor1_IV";
  }
  return "unknown";
}

namespace {

// ceil that ignores floating-point noise just above an integer (e.g. pow(100, 0.5)).
std::size_t ceil_count(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) x = nearest;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(x)));
}

}  // namespace

Schedule regime_schedule(const RegimeParams& params, std::size_t n) {
  if (n < 3) throw InputError("regime_schedule: n must be >= 3");
  if (!(params.zeta >= 0.0 && params.zeta <= 0.5))
    throw InputError("regime_schedule: zeta must lie in [0, 1/2]");
  if (!(params.gamma >= 0.0 && params.gamma <= 1.0))
    throw InputError("regime_schedule: gamma must lie in [0, 1]");
  const auto& c = params.multipliers;
  if (!(c.eta > 0.0 && c.batch > 0.0 && c.iterations > 0.0 && c.landmarks > 0.0))
    throw InputError("regime_schedule: multipliers must be positive");

  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  const double sqrt_n = std::sqrt(nn);
  const double denom = 2.0 * params.zeta + params.gamma + 1.0;
  const double fast = std::pow(nn, 1.0 / denom);  // n^{1/(2 zeta + gamma + 1)}

  Schedule s;
  double landmarks = 0.0;
  switch (params.regime) {
    case Regime::thm1_I:
      s.eta = c.eta / log_n;
      s.batch_size = ceil_count(sqrt_n);
      s.iterations = ceil_count(sqrt_n);
      landmarks = sqrt_n * log_n;
      break;
    case Regime::thm1_II:
      s.eta = c.eta / sqrt_n;
      s.batch_size = 1;
      s.iterations = n;
      landmarks = sqrt_n * log_n;
      break;
    case Regime::cor1_I:
      s.eta = c.eta * std::pow(nn, -(2.0 * params.zeta + 1.0) / denom);
      s.batch_size = 1;
      s.iterations = ceil_count(c.iterations * std::pow(nn, (2.0 * params.zeta + 2.0) / denom));
      landmarks = fast * log_n;
      break;
    case Regime::cor1_II:
      s.eta = c.eta / log_n;
      s.batch_size = ceil_count(c.batch * std::pow(nn, (2.0 * params.zeta + 1.0) / denom));
      s.iterations = ceil_count(c.iterations * fast * log_n);
      landmarks = fast * log_n;
      break;
    case Regime::cor1_III:
      s.eta = c.eta / nn;
      s.batch_size = 1;
      s.iterations = ceil_count(c.iterations * fast * nn);
      landmarks = fast * log_n;
      break;
    case Regime::cor1_IV:
      s.eta = c.eta / sqrt_n;
      s.batch_size = ceil_count(c.batch * sqrt_n);
      s.iterations = ceil_count(c.iterations * fast * sqrt_n);
      landmarks = fast * log_n;
      break;
  }
  s.theta = 0.0;
  s.landmarks = std::min(n, ceil_count(c.landmarks * landmarks));
  return s;
}

}  // namespace nysgm
