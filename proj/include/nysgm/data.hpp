#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "nysgm/types.hpp"

namespace nysgm {

/// Training sample: inputs as rows of X, responses y, and optionally the
/// noiseless targets the responses were generated from.
struct Dataset {
  Matrix X;
  Vector y;
  std::optional<Vector> f_true;
  std::optional<std::uint64_t> seed;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }

  /// Throws InputError on empty data, shape mismatch, or non-finite responses.
  void validate() const;

  /// Rows `indices` of this dataset (seed provenance is dropped).
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Regression function of the toy problem: |x - 1/2| - 1/2.
double toy_regression_function(double x);

/// x_i ~ U[0,1], y_i = f(x_i) + N(0,1), drawn in the order x_1, w_1, x_2, w_2, ...
Dataset gen_toy(std::size_t n, std::uint64_t seed);

enum class EvalMode { grid, random };

EvalMode parse_eval_mode(std::string_view name);

struct EvalSet {
  Matrix points;   // count x 1
  Vector targets;  // regression function values at the points
};

/// `grid` places points at cell midpoints (i + 1/2) / count; `random` draws them
/// uniformly from [0,1] with `seed`.
EvalSet eval_grid(std::size_t count, EvalMode mode = EvalMode::grid, std::uint64_t seed = 0);

/// CSV with header x0..x{d-1}, y and optional ftrue. Columns may appear in any order.
/// Throws IoError if the file cannot be opened and ParseError (with line number) on
/// malformed content.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text);

/// Writes with 17 significant digits so that load_csv(save_csv(d)) == d.
void save_csv(const Dataset& data, const std::filesystem::path& path);
std::string format_csv(const Dataset& data);

}  // namespace nysgm
