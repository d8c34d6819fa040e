#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace phasecav {

/// Base class of every error raised by the library. `stage()` names the
/// processing stage that failed so front ends can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

using NodalField = std::vector<double>;
using CellField = std::vector<double>;
using CellMask = std::vector<std::uint8_t>;

enum class Side { Bottom, Right, Top, Left };

std::string to_string(Side s);
Side side_from_string(const std::string& s);

/// Portion of one side of the rectangle, parametrised by t in [0,1]
/// (x/width on bottom and top, y/height on left and right).
struct BoundaryInterval {
  Side side = Side::Bottom;
  double from = 0.0;
  double to = 1.0;
};

std::vector<BoundaryInterval> whole_boundary();

struct DomainSpec {
  double width = 1.0;
  double height = 1.0;
  std::vector<BoundaryInterval> gamma = whole_boundary();
  std::vector<BoundaryInterval> gamma_tilde = whole_boundary();
  /// Standoff distance; the inner band has width delta/2, the outer band 3*delta/4.
  double delta = 0.1;

  void validate() const;
};

struct BoundaryEdge {
  int node_a = 0;  // counter-clockwise start
  int node_b = 0;
  int cell = 0;
  Side side = Side::Bottom;
  double t_a = 0.0;    // side parameter of node_a
  double t_mid = 0.0;  // side parameter of the midpoint
  bool in_gamma = false;
  bool in_gamma_tilde = false;
};

/// Uniform grid of square cells covering the rectangle. Nodes are numbered
/// row by row (`j*(nx+1)+i`), cells likewise (`j*nx+i`). The boundary loop
/// runs counter-clockwise from the origin; loop position k is both edge k
/// and the start node of edge k.
class Grid {
 public:
  Grid(const DomainSpec& spec, int nx, int ny, double h);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double width() const { return spec_.width; }
  double height() const { return spec_.height; }
  const DomainSpec& spec() const { return spec_; }

  int num_nodes() const { return (nx_ + 1) * (ny_ + 1); }
  int num_cells() const { return nx_ * ny_; }
  int node(int i, int j) const { return j * (nx_ + 1) + i; }
  int cell(int i, int j) const { return j * nx_ + i; }
  double node_x(int n) const { return (n % (nx_ + 1)) * h_; }
  double node_y(int n) const { return (n / (nx_ + 1)) * h_; }
  double cell_cx(int c) const { return ((c % nx_) + 0.5) * h_; }
  double cell_cy(int c) const { return ((c / nx_) + 0.5) * h_; }
  /// Nodes of cell c in the order (0,0), (1,0), (1,1), (0,1).
  std::array<int, 4> cell_nodes(int c) const {
    const int i = c % nx_, j = c / nx_;
    return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
  }

  const std::vector<BoundaryEdge>& boundary() const { return edges_; }
  std::array<double, 2> outward_normal(Side s) const;

  /// Lumped (trapezoidal product rule) nodal quadrature weights.
  const NodalField& node_mass() const { return node_mass_; }
  /// Trapezoid weights of the L2(gamma) / L2(gamma~) integrals, per node.
  const NodalField& gamma_weights() const { return gamma_weights_; }
  const NodalField& gamma_tilde_weights() const { return gamma_tilde_weights_; }
  double gamma_length() const;

  /// Node masks of the bands dist(x, boundary) < 3 delta / 4 and < delta / 2.
  const CellMask& band_tilde_nodes() const { return band_tilde_nodes_; }
  const CellMask& band_nodes() const { return band_nodes_; }
  /// Cells whose four nodes all lie in the outer band.
  const CellMask& band_tilde_cells() const { return band_tilde_cells_; }

  double dist_to_boundary(double x, double y) const;

 private:
  DomainSpec spec_;
  int nx_, ny_;
  double h_;
  std::vector<BoundaryEdge> edges_;
  NodalField node_mass_, gamma_weights_, gamma_tilde_weights_;
  CellMask band_tilde_nodes_, band_nodes_, band_tilde_cells_;
};

/// Builds the grid with `resolution` cells per unit length.
Grid build_grid(const DomainSpec& spec, int resolution);

// ---------------------------------------------------------------------------
// Cavity shapes

struct Disc {
  double cx, cy, r;
};
struct Ring {
  double cx, cy, r_in, r_out;
};
struct Rect {
  double x0, y0, x1, y1;
};
struct Polygon {
  std::vector<std::array<double, 2>> pts;
};
/// Excluded cells of a (possibly different) grid, sampled by cell centre.
struct PixelMask {
  int nx = 0, ny = 0;
  double width = 1.0, height = 1.0;
  CellMask excluded;
};

/// The insulating region removed from the conductor: a union of primitives.
/// An empty shape means no cavity.
class CavityShape {
 public:
  using Primitive = std::variant<Disc, Ring, Rect, Polygon, PixelMask>;

  CavityShape() = default;
  explicit CavityShape(std::vector<Primitive> parts) : parts_(std::move(parts)) {}

  bool empty() const { return parts_.empty(); }
  bool contains(double x, double y) const;
  const std::vector<Primitive>& parts() const { return parts_; }

  /// `none`, or primitives joined by '+': `disc:cx,cy,r`, `ring:cx,cy,rin,rout`,
  /// `rect:x0,y0,x1,y1`, `polygon:x,y;x,y;...`, `rle:nx,ny,w,h:runs`.
  std::string serialize() const;
  static CavityShape parse(const std::string& text);

 private:
  std::vector<Primitive> parts_;
};

/// Run-length encoding of a binary mask: alternating run lengths, starting
/// with a run of zeros (possibly of length 0).
std::string rle_encode(const CellMask& mask);
CellMask rle_decode(const std::string& runs, std::size_t size);

/// Throws if the cavity violates the standoff dist(K, outer band) >= delta
/// (checked at cell-centre resolution, within one cell).
void validate_cavity(const Grid& grid, const CavityShape& cavity);

/// Retained cell mask of G_K: cells whose centre is outside the cavity and
/// that are 4-connected to a cell carrying a gamma~ edge.
CellMask rasterize_cavity(const Grid& grid, const CavityShape& cavity);

/// Nodes touched by at least one marked cell.
CellMask nodes_of_cells(const Grid& grid, const CellMask& cells);

}  // namespace phasecav
