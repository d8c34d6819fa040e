#pragma once

// Bilinear element helpers on a square cell of side h. Local node order is
// (0,0), (1,0), (1,1), (0,1).

#include <array>
#include <cmath>

namespace phasecav::q1 {

/// Element stiffness of the Laplacian; independent of h in two dimensions.
inline constexpr std::array<std::array<double, 4>, 4> kStiffness = {{
    {4.0 / 6, -1.0 / 6, -2.0 / 6, -1.0 / 6},
    {-1.0 / 6, 4.0 / 6, -1.0 / 6, -2.0 / 6},
    {-2.0 / 6, -1.0 / 6, 4.0 / 6, -1.0 / 6},
    {-1.0 / 6, -2.0 / 6, -1.0 / 6, 4.0 / 6},
}};

/// 2x2 Gauss abscissae on [0,1]; each point carries weight h^2/4.
inline const std::array<double, 2> kGauss = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

/// Gradient of the local shape functions at local coordinates (s,t).
inline std::array<std::array<double, 2>, 4> shape_gradients(double s, double t, double h) {
  return {{{-(1 - t) / h, -(1 - s) / h}, {(1 - t) / h, -s / h}, {t / h, s / h}, {-t / h, (1 - s) / h}}};
}

inline std::array<double, 4> shape_values(double s, double t) {
  return {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
}

inline std::array<double, 2> gradient(const std::array<double, 4>& u, double s, double t, double h) {
  const auto g = shape_gradients(s, t, h);
  std::array<double, 2> out{0.0, 0.0};
  for (int a = 0; a < 4; ++a) {
    out[0] += u[a] * g[a][0];
    out[1] += u[a] * g[a][1];
  }
  return out;
}

/// u^T K_e v, the exact integral of grad(u).grad(v) over the cell.
inline double energy(const std::array<double, 4>& u, const std::array<double, 4>& v) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += u[a] * kStiffness[a][b] * v[b];
  return s;
}

}  // namespace phasecav::q1
