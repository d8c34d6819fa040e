#include "phasecav/gradients.hpp"

#include "phasecav/q1.hpp"

namespace phasecav {

namespace {

std::array<double, 4> local(const Grid& grid, const NodalField& u, int c) {
  const auto nd = grid.cell_nodes(c);
  return {u[nd[0]], u[nd[1]], u[nd[2]], u[nd[3]]};
}

// psi_eta'(cell average of v) per cell.
CellField cell_dpsi(const Grid& grid, const NodalField& v, double o_eta, const Potentials& pot) {
  CellField d = cell_average(grid, v);
  for (auto& x : d) x = dpsi_eta(pot, o_eta, x);
  return d;
}

// K_1 x, the unit-coefficient stiffness action.
NodalField laplacian_action(const Grid& grid, const NodalField& x) {
  NodalField out(grid.num_nodes(), 0.0);
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nd = grid.cell_nodes(c);
    const auto xl = local(grid, x, c);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out[nd[a]] += q1::kStiffness[a][b] * xl[b];
  }
  return out;
}

double dot(const NodalField& a, const NodalField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double potential_derivative(const Potentials& pot, double v, bool double_well) {
  return double_well ? pot.dW(v) : pot.dV(v);
}

// d/dvtilde of the potential and Dirichlet terms along `direction`.
double regulariser_directional(const Problem& pb, const NodalField& v, const NodalField& vtilde,
                               const NodalField& direction, bool double_well) {
  const auto& m = pb.grid->node_mass();
  double well = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n)
    well -= m[n] * potential_derivative(pb.potentials, v[n], double_well) * direction[n];
  const auto Kv = laplacian_action(*pb.grid, vtilde);
  return well / pb.params.eta + 2 * pb.params.eta * dot(Kv, direction);
}

// Sum over cells of psi_eta' * avg(direction) * per-cell value.
double cell_pairing(const Grid& grid, const CellField& dpsi, const NodalField& direction, const CellField& vals) {
  double s = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto dl = local(grid, direction, c);
    s += dpsi[c] * 0.25 * (dl[0] + dl[1] + dl[2] + dl[3]) * vals[c];
  }
  return s;
}

CellField cell_energies(const Grid& grid, const NodalField& a, const NodalField& b) {
  CellField e(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) e[c] = q1::energy(local(grid, a, c), local(grid, b, c));
  return e;
}

CellField cell_powers(const Grid& grid, const NodalField& u, double q) {
  CellField e(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) e[c] = cell_gradient_power(grid, u, c, q);
  return e;
}

// Nodal gradient from per-cell coefficient sensitivities plus the potential.
GradientField assemble_gradient(const Problem& pb, const NodalField& v, const NodalField& vtilde,
                                const CellField& dpsi, const CellField& per_cell, bool double_well) {
  const Grid& grid = *pb.grid;
  NodalField raw(grid.num_nodes(), 0.0);
  for (int c = 0; c < grid.num_cells(); ++c)
    for (int n : grid.cell_nodes(c)) raw[n] += 0.25 * dpsi[c] * per_cell[c];
  const auto& m = grid.node_mass();
  const auto& band = grid.band_tilde_nodes();
  GradientField g;
  g.density.assign(grid.num_nodes(), 0.0);
  g.dirichlet = laplacian_action(grid, vtilde);
  for (int n = 0; n < grid.num_nodes(); ++n) {
    if (band[n]) {
      g.dirichlet[n] = 0.0;
      continue;
    }
    const double well = -m[n] * potential_derivative(pb.potentials, v[n], double_well) / pb.params.eta;
    g.density[n] = (raw[n] + well) / m[n];
    g.dirichlet[n] *= 2 * pb.params.eta;
  }
  return g;
}

double reduced_directional(const Problem& pb, const NodalField& vtilde0, const NodalField& direction,
                           const State* state, bool double_well, double q) {
  State local_state;
  if (!state) {
    local_state = state_solve(pb, vtilde0);
    state = &local_state;
  }
  const Grid& grid = *pb.grid;
  const auto& p = pb.params;
  const auto sens = sensitivity_solve(pb, *state, direction);
  const auto& l = grid.gamma_weights();
  double misfit = 0.0;
  for (std::size_t n = 0; n < sens.U.size(); ++n) misfit += l[n] * (state->u[n] - pb.g[n]) * sens.U[n];
  double total = 2 * p.misfit_weight() * misfit;
  if (p.b > 0) {
    const auto dpsi = cell_dpsi(grid, state->v, p.o_eta, pb.potentials);
    const auto gq = gradient_power_derivative(grid, state->u, state->w.w, q);
    total += p.b * (dot(gq, sens.U) - cell_pairing(grid, dpsi, direction, cell_powers(grid, state->u, q)));
  }
  return total + regulariser_directional(pb, state->v, vtilde0, direction, double_well);
}

GradientField reduced_gradient(const Problem& pb, const NodalField& vtilde0, const State* state,
                               AdjointState* adjoint, const NodalField* warm, bool double_well, double q) {
  State local_state;
  if (!state) {
    local_state = state_solve(pb, vtilde0, nullptr);
    state = &local_state;
  }
  const Grid& grid = *pb.grid;
  const auto& p = pb.params;
  const auto& l = grid.gamma_weights();

  // Source d(misfit + b-term)/du, composed with the gamma-mean projection.
  NodalField src(grid.num_nodes(), 0.0);
  for (int n = 0; n < grid.num_nodes(); ++n)
    if (l[n] > 0) src[n] = 2 * p.misfit_weight() * l[n] * (state->u[n] - pb.g[n]);
  if (p.b > 0) {
    const auto gq = gradient_power_derivative(grid, state->u, state->w.w, q);
    for (int n = 0; n < grid.num_nodes(); ++n) src[n] += p.b * gq[n];
  }
  double total = 0.0, len = 0.0;
  for (int n = 0; n < grid.num_nodes(); ++n) {
    total += src[n];
    len += l[n];
  }
  for (int n = 0; n < grid.num_nodes(); ++n) src[n] -= total * l[n] / len;

  AdjointState adj;
  adj.p = warm ? *warm : NodalField(grid.num_nodes(), 0.0);
  adj.stats = pcg(state->system, src, adj.p, true, pb.solver);

  const auto dpsi = cell_dpsi(grid, state->v, p.o_eta, pb.potentials);
  CellField per_cell = cell_energies(grid, adj.p, state->u);
  if (p.b > 0) {
    const auto pw = cell_powers(grid, state->u, q);
    for (int c = 0; c < grid.num_cells(); ++c) per_cell[c] -= p.b * pw[c];
  }
  auto g = assemble_gradient(pb, state->v, vtilde0, dpsi, per_cell, double_well);
  if (adjoint) *adjoint = std::move(adj);
  return g;
}

}  // namespace

double GradientField::pair(const Grid& grid, const NodalField& direction) const {
  const auto& m = grid.node_mass();
  double s = 0.0;
  for (std::size_t n = 0; n < direction.size(); ++n) s += (density[n] * m[n] + dirichlet[n]) * direction[n];
  return s;
}

NodalField GradientField::steepest(const Grid& grid) const {
  const auto& m = grid.node_mass();
  NodalField out(density.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = density[n] + dirichlet[n] / m[n];
  return out;
}

NodalField sensitivity_rhs(const Grid& grid, const State& state, const NodalField& direction, double o_eta,
                           const Potentials& pot) {
  const auto dpsi = cell_dpsi(grid, state.v, o_eta, pot);
  NodalField r(grid.num_nodes(), 0.0);
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto dl = local(grid, direction, c);
    const double coef = dpsi[c] * 0.25 * (dl[0] + dl[1] + dl[2] + dl[3]);
    if (coef == 0.0) continue;
    const auto nd = grid.cell_nodes(c);
    const auto ul = local(grid, state.u, c);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) r[nd[a]] += coef * q1::kStiffness[a][b] * ul[b];
  }
  return r;
}

SensitivityState sensitivity_solve(const Problem& pb, const State& state, const NodalField& direction) {
  SensitivityState s;
  s.U = solve_neumann(*pb.grid, state.system,
                      sensitivity_rhs(*pb.grid, state, direction, pb.params.o_eta, pb.potentials), pb.solver,
                      nullptr, &s.stats);
  return s;
}

double directional_dG(const Problem& pb, const NodalField& vtilde0, const NodalField& direction,
                      const State* state) {
  return reduced_directional(pb, vtilde0, direction, state, true, 2.0);
}

double directional_dHatF(const Problem& pb, const NodalField& vtilde0, const NodalField& direction,
                         const State* state) {
  return reduced_directional(pb, vtilde0, direction, state, false, pb.params.q);
}

double directional_dF(const Problem& pb, const NodalField& u0, const NodalField& vtilde0, const NodalField& du,
                      const NodalField& direction, const State* state) {
  State local_state;
  if (!state) {
    local_state = state_solve(pb, vtilde0);
    state = &local_state;
  }
  const Grid& grid = *pb.grid;
  const auto& p = pb.params;
  const auto sens = sensitivity_solve(pb, *state, direction);
  const auto dpsi = cell_dpsi(grid, state->v, p.o_eta, pb.potentials);

  const auto Ku = state->system.matrix.apply(u0);
  double disc = 2 * dot(Ku, du) - 2 * dot(pb.load, du) + dot(pb.load, sens.U);
  disc -= cell_pairing(grid, dpsi, direction, cell_energies(grid, u0, u0));
  double total = p.discrepancy_weight() * disc;

  const auto& l = grid.gamma_weights();
  double misfit = 0.0;
  for (std::size_t n = 0; n < u0.size(); ++n) misfit += l[n] * (u0[n] - pb.g[n]) * du[n];
  total += 2 * p.misfit_weight() * misfit;

  if (p.b > 0) {
    const auto gq = gradient_power_derivative(grid, u0, state->w.w, p.q);
    total += p.b * (dot(gq, du) - cell_pairing(grid, dpsi, direction, cell_powers(grid, u0, p.q)));
  }
  return total + regulariser_directional(pb, state->v, vtilde0, direction, false);
}

GradientField full_gradient_G(const Problem& pb, const NodalField& vtilde0, const State* state,
                              AdjointState* adjoint, const NodalField* warm_adjoint) {
  return reduced_gradient(pb, vtilde0, state, adjoint, warm_adjoint, true, 2.0);
}

GradientField full_gradient_hatF(const Problem& pb, const NodalField& vtilde0, const State* state,
                                 AdjointState* adjoint, const NodalField* warm_adjoint) {
  return reduced_gradient(pb, vtilde0, state, adjoint, warm_adjoint, false, pb.params.q);
}

GradientField full_gradient(const Problem& pb, FunctionalKind kind, const NodalField& vtilde0, const State* state,
                            AdjointState* adjoint, const NodalField* warm_adjoint) {
  switch (kind) {
    case FunctionalKind::G: return full_gradient_G(pb, vtilde0, state, adjoint, warm_adjoint);
    case FunctionalKind::HatF: return full_gradient_hatF(pb, vtilde0, state, adjoint, warm_adjoint);
    case FunctionalKind::F: break;
  }
  throw Error("gradients", "the two-variable functional has partial gradients only");
}

NodalField partial_u_F(const Problem& pb, const NodalField& u, const State& state) {
  const Grid& grid = *pb.grid;
  const auto& p = pb.params;
  const auto Ku = state.system.matrix.apply(u);
  const auto& l = grid.gamma_weights();
  NodalField g(grid.num_nodes());
  for (int n = 0; n < grid.num_nodes(); ++n)
    g[n] = p.discrepancy_weight() * (2 * Ku[n] - 2 * pb.load[n]) + 2 * p.misfit_weight() * l[n] * (u[n] - pb.g[n]);
  if (p.b > 0) {
    const auto gq = gradient_power_derivative(grid, u, state.w.w, p.q);
    for (int n = 0; n < grid.num_nodes(); ++n) g[n] += p.b * gq[n];
  }
  return g;
}

GradientField partial_v_F(const Problem& pb, const NodalField& u, const NodalField& vtilde, const State& state) {
  const Grid& grid = *pb.grid;
  const auto& p = pb.params;
  const auto dpsi = cell_dpsi(grid, state.v, p.o_eta, pb.potentials);
  const auto eu = cell_energies(grid, u, u);
  const auto et = cell_energies(grid, state.u, state.u);
  CellField per_cell(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) per_cell[c] = p.discrepancy_weight() * (et[c] - eu[c]);
  if (p.b > 0) {
    const auto pw = cell_powers(grid, u, p.q);
    for (int c = 0; c < grid.num_cells(); ++c) per_cell[c] -= p.b * pw[c];
  }
  return assemble_gradient(pb, state.v, vtilde, dpsi, per_cell, false);
}

}  // namespace phasecav
