#pragma once

#include <cstdint>
#include <string>

#include "phasecav/elliptic.hpp"
#include "phasecav/geometry.hpp"

namespace phasecav {

/// Boundary current f on gamma~ (per edge) and voltage g on gamma (per loop
/// node, i.e. the start node of each edge), with the noise level they carry.
struct CauchyData {
  NeumannData f;
  std::vector<double> g;
  double epsilon = 0.0;
  double rho = 1.0;
  std::uint64_t seed = 0;

  /// Throws unless both data have zero mean on their segments.
  void validate(const Grid& grid) const;
  /// g scattered to a nodal vector (zero off gamma).
  NodalField g_nodal(const Grid& grid) const;
};

struct GroundTruth {
  CavityShape cavity;
  CellMask retained;  // cells of G_K0
  NodalField u0;      // zero on nodes not touching G_K0
  CauchyData data;
};

/// Applied current patterns: `dipole_x:A` (+A right, -A left), `dipole_y:A`
/// (+A top, -A bottom), `cosine:k:A` (A cos(2 pi k s / perimeter) along the
/// loop) and `strip` (sqrt(2) cos(pi x) on the bottom side). Values are taken
/// at edge midpoints, restricted to gamma~ and made mean-free there.
NeumannData make_flux(const Grid& grid, const std::string& pattern);

/// Laplace problem on the retained cells with flux f0 on gamma~ and no flux
/// across every other boundary of G_K0; extended by zero and normalised to a
/// zero gamma mean. g0 is the trace on gamma.
GroundTruth solve_direct_cavity(const Grid& grid, const CavityShape& cavity, const NeumannData& f0,
                                const SolverOptions& opts = {});

/// Adds mean-free Gaussian perturbations scaled to L2 norm rho*epsilon on both
/// f (over gamma~) and g (over gamma). Deterministic per seed.
CauchyData add_noise(const Grid& grid, const CauchyData& data, double epsilon, double rho, std::uint64_t seed);

/// Restriction of data generated on a grid refined by 2 in each direction:
/// flux averaged over the two fine edges, voltage by full weighting along the
/// boundary.
CauchyData restrict_data(const Grid& fine, const CauchyData& data, const Grid& coarse);
/// Injection of a nodal field from a twice finer grid.
NodalField restrict_nodal(const Grid& fine, const NodalField& u, const Grid& coarse);

/// Separated solution on D x (0,T), D = (0,1), with f(x) = sqrt(2) cos(lambda x)
/// applied at y = 0 and an insulating sheet at y = 2 (zero above it).
double analytic_strip_solution(double lambda, double T, double x, double y);

}  // namespace phasecav
