#pragma once

#include <string_view>
#include <vector>

namespace mlab {

/// start, start*ratio, ... (count points).  Requires start > 0, ratio > 1.
std::vector<double> geometric_grid(double start, double ratio, std::size_t count);

/// Geometric points from start while <= stop, with stop appended if missed.
std::vector<double> geometric_range(double start, double ratio, double stop);

/// Parses `start:ratio:count`.  Throws PreconditionError on malformed input
/// or an empty grid.
std::vector<double> parse_grid(std::string_view spec);

/// Parses `a,b,c`.  Throws PreconditionError on malformed input or an empty list.
std::vector<double> parse_points(std::string_view spec);

}  // namespace mlab
