#include "phasecav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace phasecav {

namespace {

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw Error("geometry", "bad number '" + tok + "'");
    }
    if (used != tok.size()) throw Error("geometry", "bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool in_intervals(const std::vector<BoundaryInterval>& ivs, Side s, double t) {
  for (const auto& iv : ivs)
    if (iv.side == s && t >= iv.from && t <= iv.to) return true;
  return false;
}

bool point_in_polygon(const Polygon& p, double x, double y) {
  bool inside = false;
  const auto& v = p.pts;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double xi = v[i][0], yi = v[i][1], xj = v[j][0], yj = v[j][1];
    if (((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi)) inside = !inside;
  }
  return inside;
}

}  // namespace

std::string to_string(Side s) {
  switch (s) {
    case Side::Bottom: return "bottom";
    case Side::Right: return "right";
    case Side::Top: return "top";
    case Side::Left: return "left";
  }
  return "?";
}

Side side_from_string(const std::string& s) {
  if (s == "bottom") return Side::Bottom;
  if (s == "right") return Side::Right;
  if (s == "top") return Side::Top;
  if (s == "left") return Side::Left;
  throw Error("geometry", "unknown side '" + s + "'");
}

std::vector<BoundaryInterval> whole_boundary() {
  return {{Side::Bottom, 0, 1}, {Side::Right, 0, 1}, {Side::Top, 0, 1}, {Side::Left, 0, 1}};
}

void DomainSpec::validate() const {
  if (!(width > 0 && height > 0)) throw Error("geometry", "domain extents must be positive");
  if (!(delta > 0)) throw Error("geometry", "delta must be positive");
  if (!(0.75 * delta < 0.5 * std::min(width, height)))
    throw Error("geometry", "3*delta/4 must be below half the smaller domain extent");
  auto check = [](const std::vector<BoundaryInterval>& ivs, const char* name) {
    double len = 0.0;
    for (const auto& iv : ivs) {
      if (iv.from < 0 || iv.to > 1 || iv.from > iv.to)
        throw Error("geometry", std::string(name) + " interval outside [0,1]");
      len += iv.to - iv.from;
    }
    if (len <= 0) throw Error("geometry", std::string(name) + " has zero length");
  };
  check(gamma, "gamma");
  check(gamma_tilde, "gamma_tilde");
}

Grid::Grid(const DomainSpec& spec, int nx, int ny, double h) : spec_(spec), nx_(nx), ny_(ny), h_(h) {
  if (nx < 1 || ny < 1 || !(h > 0)) throw Error("geometry", "degenerate grid");
  const int nn = num_nodes();

  // Counter-clockwise boundary loop.
  auto add = [&](int a, int b, int c, Side s, double ta, double tb) {
    BoundaryEdge e;
    e.node_a = a;
    e.node_b = b;
    e.cell = c;
    e.side = s;
    e.t_a = ta;
    e.t_mid = 0.5 * (ta + tb);
    e.in_gamma = in_intervals(spec_.gamma, s, e.t_mid);
    e.in_gamma_tilde = in_intervals(spec_.gamma_tilde, s, e.t_mid);
    edges_.push_back(e);
  };
  for (int i = 0; i < nx; ++i)
    add(node(i, 0), node(i + 1, 0), cell(i, 0), Side::Bottom, double(i) / nx, double(i + 1) / nx);
  for (int j = 0; j < ny; ++j)
    add(node(nx, j), node(nx, j + 1), cell(nx - 1, j), Side::Right, double(j) / ny, double(j + 1) / ny);
  for (int i = nx; i > 0; --i)
    add(node(i, ny), node(i - 1, ny), cell(i - 1, ny - 1), Side::Top, double(i) / nx, double(i - 1) / nx);
  for (int j = ny; j > 0; --j)
    add(node(0, j), node(0, j - 1), cell(0, j - 1), Side::Left, double(j) / ny, double(j - 1) / ny);

  node_mass_.assign(nn, 0.0);
  for (int c = 0; c < num_cells(); ++c)
    for (int n : cell_nodes(c)) node_mass_[n] += 0.25 * h_ * h_;

  gamma_weights_.assign(nn, 0.0);
  gamma_tilde_weights_.assign(nn, 0.0);
  for (const auto& e : edges_) {
    if (e.in_gamma) {
      gamma_weights_[e.node_a] += 0.5 * h_;
      gamma_weights_[e.node_b] += 0.5 * h_;
    }
    if (e.in_gamma_tilde) {
      gamma_tilde_weights_[e.node_a] += 0.5 * h_;
      gamma_tilde_weights_[e.node_b] += 0.5 * h_;
    }
  }

  const double tol = 1e-9 * h_;
  band_tilde_nodes_.assign(nn, 0);
  band_nodes_.assign(nn, 0);
  for (int n = 0; n < nn; ++n) {
    const double d = dist_to_boundary(node_x(n), node_y(n));
    band_tilde_nodes_[n] = d < 0.75 * spec_.delta - tol;
    band_nodes_[n] = d < 0.5 * spec_.delta - tol;
  }
  band_tilde_cells_.assign(num_cells(), 0);
  for (int c = 0; c < num_cells(); ++c) {
    bool all = true;
    for (int n : cell_nodes(c)) all = all && band_tilde_nodes_[n];
    band_tilde_cells_[c] = all;
  }
}

std::array<double, 2> Grid::outward_normal(Side s) const {
  switch (s) {
    case Side::Bottom: return {0.0, -1.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Top: return {0.0, 1.0};
    case Side::Left: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

double Grid::gamma_length() const {
  double s = 0.0;
  for (const auto& e : edges_)
    if (e.in_gamma) s += h_;
  return s;
}

double Grid::dist_to_boundary(double x, double y) const {
  return std::min({x, spec_.width - x, y, spec_.height - y});
}

Grid build_grid(const DomainSpec& spec, int resolution) {
  spec.validate();
  if (resolution < 1) throw Error("geometry", "resolution must be positive");
  const double h = 1.0 / resolution;
  const int nx = static_cast<int>(std::lround(spec.width * resolution));
  const int ny = static_cast<int>(std::lround(spec.height * resolution));
  if (nx < 1 || ny < 1 || std::abs(nx * h - spec.width) > 1e-12 * spec.width ||
      std::abs(ny * h - spec.height) > 1e-12 * spec.height)
    throw Error("geometry", "domain extents are not multiples of the cell size");
  Grid g(spec, nx, ny, h);

  bool has_gamma = false, has_gamma_tilde = false;
  for (const auto& e : g.boundary()) {
    has_gamma = has_gamma || e.in_gamma;
    has_gamma_tilde = has_gamma_tilde || e.in_gamma_tilde;
  }
  if (!has_gamma) throw Error("geometry", "gamma is empty at this resolution");
  if (!has_gamma_tilde) throw Error("geometry", "gamma_tilde is empty at this resolution");
  // Interior beyond the outer band must keep at least one node, and the band
  // must reach past the boundary nodes themselves.
  bool free_node = false, band_interior = false;
  for (int n = 0; n < g.num_nodes(); ++n) {
    const double d = g.dist_to_boundary(g.node_x(n), g.node_y(n));
    free_node = free_node || !g.band_tilde_nodes()[n];
    band_interior = band_interior || (g.band_tilde_nodes()[n] && d > 0);
  }
  if (!free_node) throw Error("geometry", "no node left outside the outer band");
  if (!band_interior) throw Error("geometry", "outer band is empty at this resolution");
  return g;
}

// ---------------------------------------------------------------------------

bool CavityShape::contains(double x, double y) const {
  for (const auto& p : parts_) {
    const bool in = std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Disc>) {
            return (x - s.cx) * (x - s.cx) + (y - s.cy) * (y - s.cy) < s.r * s.r;
          } else if constexpr (std::is_same_v<T, Ring>) {
            const double d2 = (x - s.cx) * (x - s.cx) + (y - s.cy) * (y - s.cy);
            return d2 < s.r_out * s.r_out && d2 >= s.r_in * s.r_in;
          } else if constexpr (std::is_same_v<T, Rect>) {
            return x > s.x0 && x < s.x1 && y > s.y0 && y < s.y1;
          } else if constexpr (std::is_same_v<T, Polygon>) {
            return point_in_polygon(s, x, y);
          } else {
            const int i = static_cast<int>(std::floor(x / s.width * s.nx));
            const int j = static_cast<int>(std::floor(y / s.height * s.ny));
            if (i < 0 || j < 0 || i >= s.nx || j >= s.ny) return false;
            return s.excluded[static_cast<std::size_t>(j) * s.nx + i] != 0;
          }
        },
        p);
    if (in) return true;
  }
  return false;
}

std::string CavityShape::serialize() const {
  if (parts_.empty()) return "none";
  std::string out;
  for (const auto& p : parts_) {
    if (!out.empty()) out += "+";
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Disc>) {
            out += "disc:" + num(s.cx) + "," + num(s.cy) + "," + num(s.r);
          } else if constexpr (std::is_same_v<T, Ring>) {
            out += "ring:" + num(s.cx) + "," + num(s.cy) + "," + num(s.r_in) + "," + num(s.r_out);
          } else if constexpr (std::is_same_v<T, Rect>) {
            out += "rect:" + num(s.x0) + "," + num(s.y0) + "," + num(s.x1) + "," + num(s.y1);
          } else if constexpr (std::is_same_v<T, Polygon>) {
            out += "polygon:";
            for (std::size_t i = 0; i < s.pts.size(); ++i) {
              if (i) out += ";";
              out += num(s.pts[i][0]) + "," + num(s.pts[i][1]);
            }
          } else {
            out += "rle:" + std::to_string(s.nx) + "," + std::to_string(s.ny) + "," + num(s.width) + "," +
                   num(s.height) + ":" + rle_encode(s.excluded);
          }
        },
        p);
  }
  return out;
}

CavityShape CavityShape::parse(const std::string& text) {
  if (text.empty() || text == "none") return CavityShape{};
  std::vector<Primitive> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '+')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error("geometry", "bad cavity primitive '" + item + "'");
    const std::string kind = item.substr(0, colon);
    const std::string rest = item.substr(colon + 1);
    if (kind == "disc") {
      auto v = parse_numbers(rest, ',');
      if (v.size() != 3 || v[2] <= 0) throw Error("geometry", "disc needs cx,cy,r with r>0");
      parts.emplace_back(Disc{v[0], v[1], v[2]});
    } else if (kind == "ring") {
      auto v = parse_numbers(rest, ',');
      if (v.size() != 4 || v[2] < 0 || v[3] <= v[2]) throw Error("geometry", "ring needs cx,cy,rin,rout with rout>rin>=0");
      parts.emplace_back(Ring{v[0], v[1], v[2], v[3]});
    } else if (kind == "rect") {
      auto v = parse_numbers(rest, ',');
      if (v.size() != 4 || v[2] <= v[0] || v[3] <= v[1]) throw Error("geometry", "rect needs x0,y0,x1,y1");
      parts.emplace_back(Rect{v[0], v[1], v[2], v[3]});
    } else if (kind == "polygon") {
      Polygon poly;
      std::stringstream ps(rest);
      std::string pt;
      while (std::getline(ps, pt, ';')) {
        auto v = parse_numbers(pt, ',');
        if (v.size() != 2) throw Error("geometry", "polygon vertex needs x,y");
        poly.pts.push_back({v[0], v[1]});
      }
      if (poly.pts.size() < 3) throw Error("geometry", "polygon needs at least 3 vertices");
      parts.emplace_back(std::move(poly));
    } else if (kind == "rle") {
      const auto c2 = rest.find(':');
      if (c2 == std::string::npos) throw Error("geometry", "rle needs nx,ny,w,h:runs");
      auto v = parse_numbers(rest.substr(0, c2), ',');
      if (v.size() != 4) throw Error("geometry", "rle needs nx,ny,w,h:runs");
      PixelMask m;
      m.nx = static_cast<int>(v[0]);
      m.ny = static_cast<int>(v[1]);
      m.width = v[2];
      m.height = v[3];
      m.excluded = rle_decode(rest.substr(c2 + 1), static_cast<std::size_t>(m.nx) * m.ny);
      parts.emplace_back(std::move(m));
    } else {
      throw Error("geometry", "unknown cavity kind '" + kind + "'");
    }
  }
  return CavityShape(std::move(parts));
}

std::string rle_encode(const CellMask& mask) {
  std::string out;
  std::uint8_t cur = 0;
  std::size_t run = 0;
  for (auto m : mask) {
    const std::uint8_t b = m ? 1 : 0;
    if (b != cur) {
      out += std::to_string(run) + " ";
      cur = b;
      run = 0;
    }
    ++run;
  }
  out += std::to_string(run);
  return out;
}

CellMask rle_decode(const std::string& runs, std::size_t size) {
  CellMask out;
  out.reserve(size);
  std::istringstream is(runs);
  long long r = 0;
  std::uint8_t cur = 0;
  while (is >> r) {
    if (r < 0) throw Error("geometry", "negative run length");
    out.insert(out.end(), static_cast<std::size_t>(r), cur);
    cur ^= 1;
  }
  if (out.size() != size) throw Error("geometry", "rle length does not match mask size");
  return out;
}

void validate_cavity(const Grid& grid, const CavityShape& cavity) {
  const double band = 0.75 * grid.spec().delta;
  double worst = std::numeric_limits<double>::infinity();
  for (int c = 0; c < grid.num_cells(); ++c) {
    const double x = grid.cell_cx(c), y = grid.cell_cy(c);
    if (!cavity.contains(x, y)) continue;
    worst = std::min(worst, grid.dist_to_boundary(x, y) - band);
  }
  if (worst < grid.spec().delta - grid.h())
    throw Error("geometry", "cavity closer than delta to the outer band (distance " + num(worst) + ")");
}

CellMask rasterize_cavity(const Grid& grid, const CavityShape& cavity) {
  const int nc = grid.num_cells();
  CellMask open(nc, 1);
  if (!cavity.empty())
    for (int c = 0; c < nc; ++c) open[c] = !cavity.contains(grid.cell_cx(c), grid.cell_cy(c));

  CellMask retained(nc, 0);
  std::deque<int> queue;
  for (const auto& e : grid.boundary())
    if (e.in_gamma_tilde && open[e.cell] && !retained[e.cell]) {
      retained[e.cell] = 1;
      queue.push_back(e.cell);
    }
  const int nx = grid.nx(), ny = grid.ny();
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int i = c % nx, j = c / nx;
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& q : nb) {
      if (q[0] < 0 || q[1] < 0 || q[0] >= nx || q[1] >= ny) continue;
      const int d = grid.cell(q[0], q[1]);
      if (open[d] && !retained[d]) {
        retained[d] = 1;
        queue.push_back(d);
      }
    }
  }

  bool touches_gamma = false, touches_gamma_tilde = false;
  for (const auto& e : grid.boundary()) {
    touches_gamma = touches_gamma || (e.in_gamma && retained[e.cell]);
    touches_gamma_tilde = touches_gamma_tilde || (e.in_gamma_tilde && retained[e.cell]);
  }
  if (!touches_gamma_tilde) throw Error("geometry", "retained region does not touch gamma_tilde");
  if (!touches_gamma) throw Error("geometry", "retained region does not touch gamma");
  return retained;
}

CellMask nodes_of_cells(const Grid& grid, const CellMask& cells) {
  CellMask out(grid.num_nodes(), 0);
  for (int c = 0; c < grid.num_cells(); ++c)
    if (cells[c])
      for (int n : grid.cell_nodes(c)) out[n] = 1;
  return out;
}

}  // namespace phasecav
