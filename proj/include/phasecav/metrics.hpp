#pragma once

#include <limits>
#include <vector>

#include "phasecav/geometry.hpp"

namespace phasecav {

/// Returned for distances to an empty set.
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Exact squared Euclidean distance transform on a w x h lattice, in lattice
/// units: for every point, the squared distance to the nearest marked point
/// (Felzenszwalb-Huttenlocher lower envelope of parabolas, one pass per axis).
/// Points with no marked point anywhere get kInfiniteDistance.
std::vector<double> squared_distance_transform(const CellMask& marked, int w, int h);

/// Cells whose averaged phase value exceeds c.
CellMask threshold_set(const Grid& grid, const NodalField& v, double c);

/// Hausdorff distance between two cell masks viewed as sets of cell centres,
/// in physical length. 0 when both are empty, kInfiniteDistance when exactly
/// one is.
double hausdorff_distance(const Grid& grid, const CellMask& a, const CellMask& b);

double symmetric_difference_area(const Grid& grid, const CellMask& a, const CellMask& b);

/// Distance from every node to the closure of the marked cells (a union of
/// closed squares), in physical length.
std::vector<double> node_distance_to_cells(const Grid& grid, const CellMask& cells);

}  // namespace phasecav
