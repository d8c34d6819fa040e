#include "phasecav/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phasecav/q1.hpp"

namespace phasecav {

WeightField WeightField::constant(const Grid& grid, double value) {
  return {CellField(grid.num_cells(), value), value, value};
}

void WeightField::validate() const {
  if (!(floor > 0)) throw Error("solver", "weight floor must be positive");
  for (double v : w)
    if (!(v >= floor * (1 - 1e-12) && v <= cap * (1 + 1e-12)))
      throw Error("solver", "weight outside [floor, cap]");
}

double NeumannData::integral(const Grid& grid) const {
  double s = 0.0;
  for (double v : f) s += v * grid.h();
  return s;
}

double NeumannData::l2_norm(const Grid& grid) const {
  double s = 0.0;
  for (double v : f) s += v * v * grid.h();
  return std::sqrt(s);
}

void NeumannData::validate(const Grid& grid) const {
  const auto& edges = grid.boundary();
  if (f.size() != edges.size()) throw Error("solver", "Neumann data does not match the boundary");
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] != 0.0 && !edges[k].in_gamma_tilde) throw Error("solver", "Neumann data supported outside gamma_tilde");
    abs_sum += std::abs(f[k]) * grid.h();
  }
  if (std::abs(integral(grid)) > 1e-12 * abs_sum) throw Error("solver", "Neumann data does not have zero mean");
}

// ---------------------------------------------------------------------------

double StencilMatrix::entry(int r, int c) const {
  const int ri = r % (nx_ + 1), rj = r / (nx_ + 1);
  const int ci = c % (nx_ + 1), cj = c / (nx_ + 1);
  const int dx = ci - ri, dy = cj - rj;
  if (std::abs(dx) > 1 || std::abs(dy) > 1) return 0.0;
  return rows_[r][3 * (dy + 1) + (dx + 1)];
}

void StencilMatrix::apply(const NodalField& x, NodalField& y) const {
  const int w = nx_ + 1;
  y.resize(rows_.size());
  for (int j = 0; j <= ny_; ++j) {
    const int y0 = j > 0 ? -1 : 0, y1 = j < ny_ ? 1 : 0;
    for (int i = 0; i <= nx_; ++i) {
      const int x0 = i > 0 ? -1 : 0, x1 = i < nx_ ? 1 : 0;
      const int n = j * w + i;
      const auto& a = rows_[n];
      double s = 0.0;
      for (int dy = y0; dy <= y1; ++dy)
        for (int dx = x0; dx <= x1; ++dx) s += a[3 * (dy + 1) + (dx + 1)] * x[n + dy * w + dx];
      y[n] = s;
    }
  }
}

NodalField StencilMatrix::apply(const NodalField& x) const {
  NodalField y;
  apply(x, y);
  return y;
}

void StencilMatrix::add_cell(const Grid& grid, int c, double alpha) {
  const auto nodes = grid.cell_nodes(c);
  static constexpr int off[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const int dx = off[b][0] - off[a][0], dy = off[b][1] - off[a][1];
      rows_[nodes[a]][3 * (dy + 1) + (dx + 1)] += alpha * q1::kStiffness[a][b];
    }
}

void StencilMatrix::scale(double s) {
  for (auto& r : rows_)
    for (auto& v : r) v *= s;
}

// ---------------------------------------------------------------------------

LinearSystem assemble_cells(const Grid& grid, const CellField& w, const CellMask* active_cells) {
  LinearSystem sys{StencilMatrix(grid.nx(), grid.ny()), CellMask(grid.num_nodes(), 0)};
  for (int c = 0; c < grid.num_cells(); ++c) {
    if (active_cells && !(*active_cells)[c]) continue;
    if (!(w[c] > 0)) throw Error("solver", "non-positive weight in assembly");
    sys.matrix.add_cell(grid, c, w[c]);
    for (int n : grid.cell_nodes(c)) sys.active_nodes[n] = 1;
  }
  return sys;
}

LinearSystem assemble(const Grid& grid, const WeightField& w, const CellMask* active_cells) {
  if (w.w.size() != static_cast<std::size_t>(grid.num_cells())) throw Error("solver", "weight field size mismatch");
  w.validate();
  return assemble_cells(grid, w.w, active_cells);
}

SolveStats pcg(const LinearSystem& sys, const NodalField& rhs, NodalField& x, bool deflate,
               const SolverOptions& opts) {
  const int n = sys.matrix.size();
  const auto& act = sys.active_nodes;
  const double n_active = static_cast<double>(std::count(act.begin(), act.end(), 1));
  auto project = [&](NodalField& v) {
    if (!deflate) return;
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      if (act[k]) s += v[k];
    s /= n_active;
    for (int k = 0; k < n; ++k)
      if (act[k]) v[k] -= s;
  };
  auto dot = [&](const NodalField& a, const NodalField& b) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
  };

  x.resize(n, 0.0);
  NodalField b(n, 0.0), dinv(n, 0.0);
  for (int k = 0; k < n; ++k)
    if (act[k]) {
      b[k] = rhs[k];
      dinv[k] = 1.0 / sys.matrix.diagonal(k);
    } else {
      x[k] = 0.0;
    }
  project(b);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }

  NodalField r(n), z(n), p(n), q(n);
  sys.matrix.apply(x, q);
  for (int k = 0; k < n; ++k) r[k] = act[k] ? b[k] - q[k] : 0.0;
  project(r);
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= opts.tol * bnorm) return {0, rnorm / bnorm};

  for (int k = 0; k < n; ++k) z[k] = dinv[k] * r[k];
  project(z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    sys.matrix.apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0)) throw SolverError("conjugate gradient breakdown", rnorm / bnorm);
    const double alpha = rz / pq;
    for (int k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    project(r);
    rnorm = std::sqrt(dot(r, r));
    if (rnorm <= opts.tol * bnorm) return {it, rnorm / bnorm};
    for (int k = 0; k < n; ++k) z[k] = dinv[k] * r[k];
    project(z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw SolverError("iteration limit reached (relative residual " + std::to_string(rnorm / bnorm) + ")",
                    rnorm / bnorm);
}

NodalField neumann_load(const Grid& grid, const NeumannData& f) {
  NodalField b(grid.num_nodes(), 0.0);
  const auto& edges = grid.boundary();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double half = 0.5 * grid.h() * f.f[k];
    b[edges[k].node_a] += half;
    b[edges[k].node_b] += half;
  }
  return b;
}

double gamma_mean(const Grid& grid, const NodalField& u) {
  const auto& l = grid.gamma_weights();
  double s = 0.0, len = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    s += l[k] * u[k];
    len += l[k];
  }
  return s / len;
}

void normalize_gamma_mean(const Grid& grid, NodalField& u, const CellMask* active_nodes) {
  const double m = gamma_mean(grid, u);
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!active_nodes || (*active_nodes)[k]) u[k] -= m;
}

NodalField solve_neumann(const Grid& grid, const LinearSystem& sys, const NodalField& rhs, const SolverOptions& opts,
                         const NodalField* warm_start, SolveStats* stats) {
  NodalField u = warm_start ? *warm_start : NodalField(grid.num_nodes(), 0.0);
  const SolveStats st = pcg(sys, rhs, u, true, opts);
  if (stats) *stats = st;
  for (int k = 0; k < grid.num_nodes(); ++k)
    if (!sys.active_nodes[k]) u[k] = 0.0;
  normalize_gamma_mean(grid, u, &sys.active_nodes);
  return u;
}

NodalField solve_weighted_neumann(const Grid& grid, const WeightField& w, const NeumannData& f,
                                  const SolverOptions& opts) {
  f.validate(grid);
  const LinearSystem sys = assemble(grid, w);
  return solve_neumann(grid, sys, neumann_load(grid, f), opts);
}

BoundaryTrace boundary_trace(const Grid& grid, const NodalField& u, Segment segment) {
  const auto& weights = segment == Segment::Gamma ? grid.gamma_weights() : grid.gamma_tilde_weights();
  BoundaryTrace t;
  for (const auto& e : grid.boundary()) {
    const int n = e.node_a;
    if (weights[n] > 0) {
      t.nodes.push_back(n);
      t.values.push_back(u[n]);
      t.weights.push_back(weights[n]);
    }
  }
  if (t.nodes.empty()) throw Error("solver", "empty boundary segment");
  return t;
}

double energy_seminorm(const Grid& grid, const NodalField& u, const CellField& w) {
  double s = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nd = grid.cell_nodes(c);
    const std::array<double, 4> ul{u[nd[0]], u[nd[1]], u[nd[2]], u[nd[3]]};
    s += w[c] * q1::energy(ul, ul);
  }
  return std::sqrt(std::max(s, 0.0));
}

double energy_seminorm(const Grid& grid, const NodalField& u, const WeightField& w) {
  return energy_seminorm(grid, u, w.w);
}

std::optional<double> caccioppoli_ratio(const Grid& grid, const NodalField& u, const CellField& w, double cx,
                                        double cy, double radius) {
  const double r2 = 2 * radius;
  if (cx - r2 < 0 || cx + r2 > grid.width() || cy - r2 < 0 || cy + r2 > grid.height())
    throw Error("solver", "ball B_2R not contained in the domain");
  const double h = grid.h();
  double num = 0.0, den = 0.0, umax = 0.0, wmax = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    const int i = c % grid.nx(), j = c / grid.nx();
    const auto nd = grid.cell_nodes(c);
    const std::array<double, 4> ul{u[nd[0]], u[nd[1]], u[nd[2]], u[nd[3]]};
    for (double s : q1::kGauss)
      for (double t : q1::kGauss) {
        const double x = (i + s) * h, y = (j + t) * h;
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d2 >= r2 * r2) continue;
        const auto sv = q1::shape_values(s, t);
        double val = 0.0;
        for (int a = 0; a < 4; ++a) val += sv[a] * ul[a];
        den += w[c] * val * val * h * h / 4;
        umax = std::max(umax, std::abs(val));
        wmax = std::max(wmax, w[c]);
        if (d2 < radius * radius) {
          const auto g = q1::gradient(ul, s, t, h);
          num += w[c] * (g[0] * g[0] + g[1] * g[1]) * h * h / 4;
        }
      }
  }
  const double scale = umax * umax * wmax * 4 * M_PI * radius * radius;
  if (scale == 0.0 || den < 1e-14 * scale) return std::nullopt;
  return radius * radius * num / den;
}

}  // namespace phasecav
