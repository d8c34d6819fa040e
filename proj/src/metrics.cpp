#include "phasecav/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace phasecav {

namespace {

constexpr double kFar = 1e20;

// One-dimensional squared distance transform of the sampled function f.
void transform_1d(const double* f, int n, int stride, double* out, std::vector<int>& v, std::vector<double>& z,
                  std::vector<double>& tmp) {
  tmp.resize(n);
  for (int q = 0; q < n; ++q) tmp[q] = f[q * stride];
  v.resize(n);
  z.resize(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kFar * 10;
  z[1] = kFar * 10;
  for (int q = 1; q < n; ++q) {
    double s = ((tmp[q] + double(q) * q) - (tmp[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((tmp[q] + double(q) * q) - (tmp[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar * 10;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q * stride] = d * d + tmp[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const CellMask& marked, int w, int h) {
  std::vector<double> d(static_cast<std::size_t>(w) * h);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = marked[k] ? 0.0 : kFar;
  std::vector<int> v;
  std::vector<double> z, tmp;
  std::vector<double> col(d.size());
  for (int i = 0; i < w; ++i) transform_1d(d.data() + i, h, w, col.data() + i, v, z, tmp);
  for (int j = 0; j < h; ++j) transform_1d(col.data() + j * w, w, 1, d.data() + j * w, v, z, tmp);
  for (auto& x : d)
    if (x >= kFar * 0.5) x = kInfiniteDistance;
  return d;
}

CellMask threshold_set(const Grid& grid, const NodalField& v, double c) {
  CellMask out(grid.num_cells(), 0);
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    double s = 0.0;
    for (int n : grid.cell_nodes(cell)) s += v[n];
    out[cell] = 0.25 * s > c;
  }
  return out;
}

double hausdorff_distance(const Grid& grid, const CellMask& a, const CellMask& b) {
  const bool any_a = std::any_of(a.begin(), a.end(), [](auto x) { return x != 0; });
  const bool any_b = std::any_of(b.begin(), b.end(), [](auto x) { return x != 0; });
  if (!any_a && !any_b) return 0.0;
  if (any_a != any_b) return kInfiniteDistance;
  const auto da = squared_distance_transform(a, grid.nx(), grid.ny());
  const auto db = squared_distance_transform(b, grid.nx(), grid.ny());
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k]) worst = std::max(worst, db[k]);
    if (b[k]) worst = std::max(worst, da[k]);
  }
  return std::sqrt(worst) * grid.h();
}

double symmetric_difference_area(const Grid& grid, const CellMask& a, const CellMask& b) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) n += (a[k] != 0) != (b[k] != 0);
  return static_cast<double>(n) * grid.h() * grid.h();
}

std::vector<double> node_distance_to_cells(const Grid& grid, const CellMask& cells) {
  // The nearest point of a closed grid square to a lattice node is one of the
  // square's corners, so a node-lattice transform is exact.
  const CellMask nodes = nodes_of_cells(grid, cells);
  auto d = squared_distance_transform(nodes, grid.nx() + 1, grid.ny() + 1);
  for (auto& x : d) x = std::sqrt(x) * grid.h();
  return d;
}

}  // namespace phasecav
