#include "phasecav/forward.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace phasecav {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

void remove_flux_mean(const Grid& grid, NeumannData& f) {
  const auto& edges = grid.boundary();
  double s = 0.0, len = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (edges[k].in_gamma_tilde) {
      s += f.f[k];
      len += 1.0;
    }
  for (std::size_t k = 0; k < edges.size(); ++k) f.f[k] = edges[k].in_gamma_tilde ? f.f[k] - s / len : 0.0;
}

void remove_voltage_mean(const Grid& grid, std::vector<double>& g) {
  const auto& edges = grid.boundary();
  const auto& l = grid.gamma_weights();
  double s = 0.0, len = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    s += l[edges[k].node_a] * g[k];
    len += l[edges[k].node_a];
  }
  for (std::size_t k = 0; k < edges.size(); ++k) g[k] = l[edges[k].node_a] > 0 ? g[k] - s / len : 0.0;
}

}  // namespace

void CauchyData::validate(const Grid& grid) const {
  f.validate(grid);
  const auto& edges = grid.boundary();
  if (g.size() != edges.size()) throw Error("forward", "voltage data does not match the boundary");
  const auto& l = grid.gamma_weights();
  double s = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    s += l[edges[k].node_a] * g[k];
    scale += l[edges[k].node_a] * std::abs(g[k]);
  }
  if (std::abs(s) > 1e-12 * scale) throw Error("forward", "voltage data does not have zero mean on gamma");
}

NodalField CauchyData::g_nodal(const Grid& grid) const {
  NodalField out(grid.num_nodes(), 0.0);
  const auto& edges = grid.boundary();
  const auto& l = grid.gamma_weights();
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (l[edges[k].node_a] > 0) out[edges[k].node_a] = g[k];
  return out;
}

NeumannData make_flux(const Grid& grid, const std::string& pattern) {
  const auto parts = split(pattern, ':');
  if (parts.empty()) throw Error("forward", "empty flux pattern");
  const auto& edges = grid.boundary();
  NeumannData f{std::vector<double>(edges.size(), 0.0)};
  const double perimeter = 2 * (grid.width() + grid.height());
  auto arg = [&](std::size_t i, double def) { return parts.size() > i ? std::stod(parts[i]) : def; };
  double s = 0.0;  // arc length at the start of the current edge
  for (std::size_t k = 0; k < edges.size(); ++k, s += grid.h()) {
    const auto& e = edges[k];
    if (!e.in_gamma_tilde) continue;
    const double x = 0.5 * (grid.node_x(e.node_a) + grid.node_x(e.node_b));
    double val = 0.0;
    if (parts[0] == "dipole_x") {
      const double a = arg(1, 1.0);
      val = e.side == Side::Right ? a : e.side == Side::Left ? -a : 0.0;
    } else if (parts[0] == "dipole_y") {
      const double a = arg(1, 1.0);
      val = e.side == Side::Top ? a : e.side == Side::Bottom ? -a : 0.0;
    } else if (parts[0] == "cosine") {
      const double mode = arg(1, 1.0), a = arg(2, 1.0);
      val = a * std::cos(2 * M_PI * mode * (s + 0.5 * grid.h()) / perimeter);
    } else if (parts[0] == "strip") {
      val = e.side == Side::Bottom ? std::sqrt(2.0) * std::cos(M_PI * x) : 0.0;
    } else {
      throw Error("forward", "unknown flux pattern '" + pattern + "'");
    }
    f.f[k] = val;
  }
  remove_flux_mean(grid, f);
  return f;
}

GroundTruth solve_direct_cavity(const Grid& grid, const CavityShape& cavity, const NeumannData& f0,
                                const SolverOptions& opts) {
  f0.validate(grid);
  GroundTruth gt;
  gt.cavity = cavity;
  gt.retained = rasterize_cavity(grid, cavity);
  const auto& edges = grid.boundary();
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (f0.f[k] != 0.0 && !gt.retained[edges[k].cell])
      throw Error("forward", "flux applied on a boundary edge removed by the cavity");

  const LinearSystem sys = assemble_cells(grid, CellField(grid.num_cells(), 1.0), &gt.retained);
  for (int n = 0; n < grid.num_nodes(); ++n)
    if (grid.gamma_weights()[n] > 0 && !sys.active_nodes[n])
      throw Error("forward", "cavity disconnects gamma from gamma_tilde");
  gt.u0 = solve_neumann(grid, sys, neumann_load(grid, f0), opts);

  gt.data.f = f0;
  gt.data.g.assign(edges.size(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (grid.gamma_weights()[edges[k].node_a] > 0) gt.data.g[k] = gt.u0[edges[k].node_a];
  remove_voltage_mean(grid, gt.data.g);  // round-off only
  gt.data.epsilon = 0.0;
  return gt;
}

CauchyData add_noise(const Grid& grid, const CauchyData& data, double epsilon, double rho, std::uint64_t seed) {
  CauchyData out = data;
  out.epsilon = epsilon;
  out.rho = rho;
  out.seed = seed;
  const double level = rho * epsilon;
  if (!(level > 0)) return out;

  const auto& edges = grid.boundary();
  const auto& l = grid.gamma_weights();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  NeumannData df{std::vector<double>(edges.size(), 0.0)};
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (edges[k].in_gamma_tilde) df.f[k] = normal(rng);
  std::vector<double> dg(edges.size(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (l[edges[k].node_a] > 0) dg[k] = normal(rng);

  remove_flux_mean(grid, df);
  remove_voltage_mean(grid, dg);
  const double nf = df.l2_norm(grid);
  double ng = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) ng += l[edges[k].node_a] * dg[k] * dg[k];
  ng = std::sqrt(ng);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (nf > 0) out.f.f[k] += level / nf * df.f[k];
    if (ng > 0) out.g[k] += level / ng * dg[k];
  }
  return out;
}

CauchyData restrict_data(const Grid& fine, const CauchyData& data, const Grid& coarse) {
  const auto& fe = fine.boundary();
  const auto& ce = coarse.boundary();
  if (fe.size() != 2 * ce.size() || fine.nx() != 2 * coarse.nx())
    throw Error("forward", "restriction needs a grid refined by exactly 2");
  CauchyData out = data;
  out.f.f.assign(ce.size(), 0.0);
  out.g.assign(ce.size(), 0.0);
  const auto& lf = fine.gamma_weights();
  const std::size_t nf = fe.size();
  for (std::size_t k = 0; k < ce.size(); ++k) {
    if (ce[k].in_gamma_tilde) out.f.f[k] = 0.5 * (data.f.f[2 * k] + data.f.f[2 * k + 1]);
    if (coarse.gamma_weights()[ce[k].node_a] > 0) {
      double s = 0.0, wsum = 0.0;
      const std::size_t idx[3] = {(2 * k + nf - 1) % nf, 2 * k, 2 * k + 1};
      const double wts[3] = {0.25, 0.5, 0.25};
      for (int a = 0; a < 3; ++a)
        if (lf[fe[idx[a]].node_a] > 0) {
          s += wts[a] * data.g[idx[a]];
          wsum += wts[a];
        }
      out.g[k] = wsum > 0 ? s / wsum : 0.0;
    }
  }
  remove_flux_mean(coarse, out.f);
  remove_voltage_mean(coarse, out.g);
  return out;
}

NodalField restrict_nodal(const Grid& fine, const NodalField& u, const Grid& coarse) {
  if (fine.nx() != 2 * coarse.nx() || fine.ny() != 2 * coarse.ny())
    throw Error("forward", "restriction needs a grid refined by exactly 2");
  NodalField out(coarse.num_nodes());
  for (int j = 0; j <= coarse.ny(); ++j)
    for (int i = 0; i <= coarse.nx(); ++i) out[coarse.node(i, j)] = u[fine.node(2 * i, 2 * j)];
  return out;
}

double analytic_strip_solution(double lambda, double T, double x, double y) {
  if (y < 0 || y > T) throw Error("forward", "y outside the strip");
  if (y > 2) return 0.0;
  const double f = std::sqrt(2.0) * std::cos(lambda * x);
  return f / lambda * (std::cosh(2 * lambda) / std::sinh(2 * lambda) * std::cosh(lambda * y) - std::sinh(lambda * y));
}

}  // namespace phasecav
