#pragma once

#include <array>
#include <optional>
#include <vector>

#include "phasecav/geometry.hpp"

namespace phasecav {

/// Per-cell conductivity with its guaranteed bounds.
struct WeightField {
  CellField w;
  double floor = 0.0;
  double cap = 0.0;

  static WeightField constant(const Grid& grid, double value);
  /// Throws unless 0 < floor <= w <= cap cellwise.
  void validate() const;
};

/// Boundary current density, one value per boundary edge in loop order.
/// Zero outside gamma~.
struct NeumannData {
  std::vector<double> f;

  double integral(const Grid& grid) const;
  double l2_norm(const Grid& grid) const;
  /// Throws if the data is supported off gamma~ or does not have zero mean.
  void validate(const Grid& grid) const;
};

/// Symmetric nine-point matrix on the node lattice. Entry k of a row couples
/// node (i,j) with node (i+dx, j+dy), k = 3*(dy+1) + (dx+1).
class StencilMatrix {
 public:
  StencilMatrix() = default;
  StencilMatrix(int nx, int ny) : nx_(nx), ny_(ny), rows_(static_cast<std::size_t>(nx + 1) * (ny + 1)) {
    for (auto& r : rows_) r.fill(0.0);
  }

  int size() const { return static_cast<int>(rows_.size()); }
  double entry(int row, int col) const;
  double diagonal(int row) const { return rows_[row][4]; }
  const std::array<double, 9>& row(int r) const { return rows_[r]; }
  std::array<double, 9>& row(int r) { return rows_[r]; }

  void apply(const NodalField& x, NodalField& y) const;
  NodalField apply(const NodalField& x) const;
  /// Adds alpha * K_e scattered into the nodes of cell c.
  void add_cell(const Grid& grid, int c, double alpha);
  void scale(double s);

 private:
  int nx_ = 0, ny_ = 0;
  std::vector<std::array<double, 9>> rows_;
};

/// Stiffness matrix with the nodes it actually couples. The constant vector
/// on the active nodes spans its kernel.
struct LinearSystem {
  StencilMatrix matrix;
  CellMask active_nodes;
};

struct SolverOptions {
  double tol = 1e-10;  // relative residual
  int max_iterations = 200000;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // relative, on the kernel-orthogonal complement
};

/// Raised when the iteration limit is reached; carries the achieved residual.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual) : Error("solver", what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Q1 stiffness with per-cell constant coefficient w. Cells outside
/// `active_cells` (when given) are left out entirely.
LinearSystem assemble(const Grid& grid, const WeightField& w, const CellMask* active_cells = nullptr);
LinearSystem assemble_cells(const Grid& grid, const CellField& w, const CellMask* active_cells = nullptr);

/// Jacobi-preconditioned CG. With `deflate`, residuals and preconditioned
/// residuals are kept orthogonal to the constants on the active nodes, so the
/// singular pure-Neumann system is solved on the complement. `x` is the
/// initial guess on entry.
SolveStats pcg(const LinearSystem& sys, const NodalField& rhs, NodalField& x, bool deflate,
               const SolverOptions& opts);

/// Consistent load vector of the boundary flux (edge-wise constant f).
NodalField neumann_load(const Grid& grid, const NeumannData& f);

/// Shifts u on the active nodes so that the trapezoid integral over gamma is 0.
void normalize_gamma_mean(const Grid& grid, NodalField& u, const CellMask* active_nodes = nullptr);
double gamma_mean(const Grid& grid, const NodalField& u);

/// Solves the pure-Neumann system and applies the gamma normalisation.
/// Inactive nodes are set to 0.
NodalField solve_neumann(const Grid& grid, const LinearSystem& sys, const NodalField& rhs,
                         const SolverOptions& opts, const NodalField* warm_start = nullptr,
                         SolveStats* stats = nullptr);

/// div(w grad u) = 0, w du/dn = f, with the gamma mean of u equal to zero.
NodalField solve_weighted_neumann(const Grid& grid, const WeightField& w, const NeumannData& f,
                                  const SolverOptions& opts = {});

enum class Segment { Gamma, GammaTilde };

struct BoundaryTrace {
  std::vector<int> nodes;
  std::vector<double> values;
  std::vector<double> weights;  // trapezoid weights of the segment integral
};

BoundaryTrace boundary_trace(const Grid& grid, const NodalField& u, Segment segment);

/// sqrt(int w |grad u|^2), integrated exactly per cell.
double energy_seminorm(const Grid& grid, const NodalField& u, const WeightField& w);
double energy_seminorm(const Grid& grid, const NodalField& u, const CellField& w);

/// R^2 int_{B_R} w|grad u|^2 / int_{B_2R} w u^2, by 2x2 Gauss points inside
/// the balls. Empty optional when the denominator is negligible.
std::optional<double> caccioppoli_ratio(const Grid& grid, const NodalField& u, const CellField& w,
                                        double cx, double cy, double radius);

}  // namespace phasecav
