#include "mlab/grid.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

double parse_number(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw PreconditionError("malformed " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> geometric_grid(double start, double ratio, std::size_t count) {
  if (!(start > 0.0)) throw PreconditionError("grid start must be positive");
  if (!(ratio > 1.0)) throw PreconditionError("grid ratio must exceed 1");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(start * std::pow(ratio, static_cast<double>(i)));
  return out;
}

std::vector<double> geometric_range(double start, double ratio, double stop) {
  if (!(start > 0.0)) throw PreconditionError("grid start must be positive");
  if (!(ratio > 1.0)) throw PreconditionError("grid ratio must exceed 1");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = start * std::pow(ratio, static_cast<double>(i));
    if (v > stop) break;
    out.push_back(v);
  }
  if (start <= stop && (out.empty() || out.back() < stop)) out.push_back(stop);
  return out;
}

std::vector<double> parse_grid(std::string_view spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw PreconditionError("grid must be start:ratio:count");
  const double start = parse_number(spec.substr(0, c1), "grid start");
  const double ratio = parse_number(spec.substr(c1 + 1, c2 - c1 - 1), "grid ratio");
  const double count = parse_number(spec.substr(c2 + 1), "grid count");
  if (count < 1.0 || count != std::floor(count)) throw PreconditionError("grid is empty");
  return geometric_grid(start, ratio, static_cast<std::size_t>(count));
}

std::vector<double> parse_points(std::string_view spec) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const auto piece = spec.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_number(piece, "point"));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw PreconditionError("point list is empty");
  return out;
}

}  // namespace mlab
