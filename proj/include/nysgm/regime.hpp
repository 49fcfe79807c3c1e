#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace nysgm {

/// Parameter regimes with guaranteed optimal rates. thm1_* need no regularity
/// inputs; cor1_* are driven by the source exponent zeta and capacity gamma
/// (gamma = 1 gives the capacity-independent case).
enum class Regime { thm1_I, thm1_II, cor1_I, cor1_II, cor1_III, cor1_IV };

Regime parse_regime(std::string_view name);
std::string to_string(Regime regime);

/// Constants hidden by the asymptotic relations. Each multiplies the matching
/// quantity before rounding; quantities the regimes fix exactly (b = 1,
/// T = n, b = T = ceil(sqrt n)) ignore their multiplier.
struct RegimeMultipliers {
  double eta = 1.0;
  double batch = 1.0;
  double iterations = 1.0;
  double landmarks = 1.0;
};

struct RegimeParams {
  double zeta = 0.5;
  double gamma = 1.0;
  Regime regime = Regime::thm1_I;
  RegimeMultipliers multipliers;
};

struct Schedule {
  double eta = 0.0;
  double theta = 0.0;
  std::size_t batch_size = 1;
  std::size_t iterations = 1;
  std::size_t landmarks = 1;  // capped at n
};

/// Throws InputError for n < 3, zeta outside [0, 1/2], gamma outside [0, 1],
/// or non-positive multipliers. Logs are natural; integer quantities round up.
Schedule regime_schedule(const RegimeParams& params, std::size_t n);

}  // namespace nysgm
