#include "nysgm/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "nysgm/error.hpp"
#include "nysgm/rng.hpp"

namespace nysgm {

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw InputError("dataset needs n >= 1 and d >= 1");
  if (y.size() != X.rows()) throw InputError("dataset: y length differs from the number of rows");
  if (!y.allFinite()) throw InputError("dataset: y has non-finite values");
  if (f_true && f_true->size() != X.rows())
    throw InputError("dataset: ftrue length differs from the number of rows");
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  const auto count = static_cast<Eigen::Index>(indices.size());
  out.X.resize(count, X.cols());
  out.y.resize(count);
  if (f_true) out.f_true = Vector(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto i = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(k)]);
    if (i >= X.rows()) throw InputError("dataset subset index out of range");
    out.X.row(k) = X.row(i);
    out.y(k) = y(i);
    if (f_true) (*out.f_true)(k) = (*f_true)(i);
  }
  return out;
}

double toy_regression_function(double x) { return std::abs(x - 0.5) - 0.5; }

Dataset gen_toy(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("gen_toy: n must be >= 1");
  Rng rng(seed);
  Dataset data;
  const auto rows = static_cast<Eigen::Index>(n);
  data.X.resize(rows, 1);
  data.y.resize(rows);
  Vector f(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = rng.uniform01();
    const double noise = rng.normal();
    data.X(i, 0) = x;
    f(i) = toy_regression_function(x);
    data.y(i) = f(i) + noise;
  }
  data.f_true = std::move(f);
  data.seed = seed;
  return data;
}

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "grid") return EvalMode::grid;
  if (name == "random") return EvalMode::random;
  throw InputError("unknown eval mode '" + std::string(name) + "'");
}

EvalSet eval_grid(std::size_t count, EvalMode mode, std::uint64_t seed) {
  if (count == 0) throw InputError("eval_grid: count must be >= 1");
  EvalSet set;
  const auto rows = static_cast<Eigen::Index>(count);
  set.points.resize(rows, 1);
  set.targets.resize(rows);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = mode == EvalMode::grid
                         ? (static_cast<double>(i) + 0.5) / static_cast<double>(count)
                         : rng.uniform01();
    set.points(i, 0) = x;
    set.targets(i) = toy_regression_function(x);
  }
  return set;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view cell, std::size_t line) {
  cell = trim(cell);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end)
    throw ParseError(line, "non-numeric cell '" + std::string(cell) + "'");
  return value;
}

}  // namespace

Dataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      lines.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }
  // Trailing blank lines are allowed; blank lines elsewhere are not.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "missing header");

  std::string_view header = trim(lines[0]);
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  const auto names = split_fields(header);
  int y_column = -1, ftrue_column = -1;
  std::size_t features = 0;
  std::vector<int> feature_of(names.size(), -1);
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string_view name = trim(names[c]);
    if (name == "y") {
      if (y_column >= 0) throw ParseError(1, "duplicate column 'y'");
      y_column = static_cast<int>(c);
    } else if (name == "ftrue") {
      if (ftrue_column >= 0) throw ParseError(1, "duplicate column 'ftrue'");
      ftrue_column = static_cast<int>(c);
    } else if (name.size() > 1 && name[0] == 'x') {
      int k = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec != std::errc() || ptr != name.data() + name.size() || k < 0)
        throw ParseError(1, "bad column name '" + std::string(name) + "'");
      feature_of[c] = k;
      ++features;
    } else {
      throw ParseError(1, "unknown column '" + std::string(name) + "'");
    }
  }
  if (y_column < 0) throw ParseError(1, "missing column 'y'");
  if (features == 0) throw ParseError(1, "no feature columns x0..x{d-1}");
  {
    std::vector<bool> seen(features, false);
    for (int k : feature_of) {
      if (k < 0) continue;
      if (static_cast<std::size_t>(k) >= features || seen[static_cast<std::size_t>(k)])
        throw ParseError(1, "feature columns must be exactly x0..x" + std::to_string(features - 1));
      seen[static_cast<std::size_t>(k)] = true;
    }
  }

  const auto rows = static_cast<Eigen::Index>(lines.size() - 1);
  if (rows == 0) throw ParseError(2, "no data rows");
  Dataset data;
  data.X.resize(rows, static_cast<Eigen::Index>(features));
  data.y.resize(rows);
  if (ftrue_column >= 0) data.f_true = Vector(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const auto cells = split_fields(lines[static_cast<std::size_t>(r) + 1]);
    if (cells.size() != names.size())
      throw ParseError(line_no, "expected " + std::to_string(names.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_number(cells[c], line_no);
      if (static_cast<int>(c) == y_column) {
        data.y(r) = v;
      } else if (static_cast<int>(c) == ftrue_column) {
        (*data.f_true)(r) = v;
      } else {
        data.X(r, feature_of[c]) = v;
      }
    }
  }
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string format_csv(const Dataset& data) {
  data.validate();
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index k = 0; k < data.dim(); ++k) out << 'x' << k << ',';
  out << 'y';
  if (data.f_true) out << ",ftrue";
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index k = 0; k < data.dim(); ++k) out << data.X(i, k) << ',';
    out << data.y(i);
    if (data.f_true) out << ',' << (*data.f_true)(i);
    out << '\n';
  }
  return out.str();
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  const std::string text = format_csv(data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace nysgm
