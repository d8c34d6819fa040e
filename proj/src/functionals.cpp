#include "phasecav/functionals.hpp"

#include <cmath>

#include "phasecav/q1.hpp"

namespace phasecav {

std::string to_string(FunctionalKind k) {
  switch (k) {
    case FunctionalKind::G: return "G";
    case FunctionalKind::HatF: return "hatF";
    case FunctionalKind::F: return "F";
  }
  return "?";
}

FunctionalKind functional_from_string(const std::string& s) {
  if (s == "G") return FunctionalKind::G;
  if (s == "hatF") return FunctionalKind::HatF;
  if (s == "F") return FunctionalKind::F;
  throw Error("config", "unknown functional '" + s + "'");
}

FunctionalParams FunctionalParams::from_schedule(double eps, const EtaSchedule& schedule, double a1, double a2,
                                                 double b, double q_tilde, double beta_tilde, double q) {
  schedule.validate(eps);
  FunctionalParams p;
  p.epsilon = eps;
  p.eta = schedule.eta(eps);
  p.o_eta = schedule.offset(p.eta);
  p.a1 = a1;
  p.a2 = a2;
  p.b = b;
  p.q_tilde = q_tilde;
  p.beta_tilde = beta_tilde;
  p.q = q;
  return p;
}

void FunctionalParams::validate(bool cavity) const {
  if (!(epsilon > 0 && epsilon <= 1)) throw Error("functionals", "epsilon must lie in (0,1]");
  if (!(eta > 0)) throw Error("functionals", "eta must be positive");
  if (!(o_eta > 0 && o_eta <= 0.5)) throw Error("functionals", "o_eta must lie in (0,1/2]");
  if (!(a1 > 0 && a2 > 0)) throw Error("functionals", "a1 and a2 must be positive");
  if (!(b >= 0)) throw Error("functionals", "b must be nonnegative");
  if (!(q_tilde > 0 && beta_tilde > 0)) throw Error("functionals", "exponents must be positive");
  if (!(q >= 2)) throw Error("functionals", "q must be at least 2");
  if (cavity && !(beta_tilde <= q_tilde && q_tilde <= 2))
    throw Error("functionals", "need 0 < beta_tilde <= q_tilde <= 2");
}

double FunctionalParams::misfit_weight() const { return a2 / std::pow(epsilon, beta_tilde); }
double FunctionalParams::discrepancy_weight() const { return a1 / std::pow(epsilon, q_tilde); }

Problem::Problem(const Grid& g_, CauchyData d, FunctionalParams p, Potentials pot, SolverOptions s)
    : grid(&g_), data(std::move(d)), params(p), potentials(pot), solver(s) {
  data.validate(*grid);
  load = neumann_load(*grid, data.f);
  g = data.g_nodal(*grid);
}

State state_solve(const Problem& pb, const NodalField& vtilde, const NodalField* warm_start) {
  State st;
  st.v = PhaseField::from_complement(vtilde).v;
  st.w = psi_eta(*pb.grid, st.v, pb.params.o_eta, pb.potentials);
  st.system = assemble(*pb.grid, st.w);
  st.u = solve_neumann(*pb.grid, st.system, pb.load, pb.solver, warm_start, &st.stats);
  return st;
}

double raw_misfit(const Problem& pb, const NodalField& u) {
  const auto& l = pb.grid->gamma_weights();
  double s = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n)
    if (l[n] > 0) s += l[n] * (u[n] - pb.g[n]) * (u[n] - pb.g[n]);
  return s;
}

namespace {

std::array<double, 4> local(const Grid& grid, const NodalField& u, int c) {
  const auto nd = grid.cell_nodes(c);
  return {u[nd[0]], u[nd[1]], u[nd[2]], u[nd[3]]};
}

double power(double sq, double q) { return q == 2.0 ? sq : std::pow(sq, 0.5 * q); }

double potential_sum(const Problem& pb, const NodalField& v, bool double_well) {
  const auto& m = pb.grid->node_mass();
  double s = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n)
    s += m[n] * (double_well ? pb.potentials.W(v[n]) : pb.potentials.V(v[n]));
  return s;
}

FunctionalBreakdown reduced(const Problem& pb, const NodalField& vtilde, const State* state, bool double_well,
                            double q) {
  State local_state;
  if (!state) {
    local_state = state_solve(pb, vtilde);
    state = &local_state;
  }
  const auto& p = pb.params;
  FunctionalBreakdown r;
  r.misfit = p.misfit_weight() * raw_misfit(pb, state->u);
  if (p.b > 0) r.gradient = p.b * gradient_power(*pb.grid, state->u, state->w.w, q);
  r.well = potential_sum(pb, state->v, double_well) / p.eta;
  r.dirichlet = p.eta * dirichlet_energy(*pb.grid, vtilde);
  r.sum();
  return r;
}

}  // namespace

double cell_gradient_power(const Grid& grid, const NodalField& u, int c, double q) {
  const auto ul = local(grid, u, c);
  const double h = grid.h();
  double s = 0.0;
  for (double gs : q1::kGauss)
    for (double gt : q1::kGauss) {
      const auto g = q1::gradient(ul, gs, gt, h);
      s += power(g[0] * g[0] + g[1] * g[1], q);
    }
  return s * 0.25 * h * h;
}

double gradient_power(const Grid& grid, const NodalField& u, const CellField& w, double q) {
  double s = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) s += w[c] * cell_gradient_power(grid, u, c, q);
  return s;
}

NodalField gradient_power_derivative(const Grid& grid, const NodalField& u, const CellField& w, double q) {
  NodalField out(grid.num_nodes(), 0.0);
  const double h = grid.h();
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nd = grid.cell_nodes(c);
    const auto ul = local(grid, u, c);
    for (double gs : q1::kGauss)
      for (double gt : q1::kGauss) {
        const auto g = q1::gradient(ul, gs, gt, h);
        const double sq = g[0] * g[0] + g[1] * g[1];
        const double f = q == 2.0 ? 2.0 : q * std::pow(sq, 0.5 * q - 1);
        const auto dphi = q1::shape_gradients(gs, gt, h);
        for (int a = 0; a < 4; ++a)
          out[nd[a]] += w[c] * f * (g[0] * dphi[a][0] + g[1] * dphi[a][1]) * 0.25 * h * h;
      }
  }
  return out;
}

FunctionalBreakdown eval_G(const Problem& pb, const NodalField& vtilde, const State* state) {
  return reduced(pb, vtilde, state, true, 2.0);
}

FunctionalBreakdown eval_hatF_q(const Problem& pb, const NodalField& vtilde, const State* state) {
  return reduced(pb, vtilde, state, false, pb.params.q);
}

FunctionalBreakdown eval_F_q(const Problem& pb, const NodalField& u, const NodalField& vtilde, const State* state) {
  State local_state;
  if (!state) {
    local_state = state_solve(pb, vtilde);
    state = &local_state;
  }
  const auto& p = pb.params;
  const auto Ku = state->system.matrix.apply(u);
  double uKu = 0.0, fu = 0.0, fut = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    uKu += u[n] * Ku[n];
    fu += pb.load[n] * u[n];
    fut += pb.load[n] * state->u[n];
  }
  FunctionalBreakdown r;
  r.discrepancy = p.discrepancy_weight() * (uKu - 2 * fu + fut);
  r.misfit = p.misfit_weight() * raw_misfit(pb, u);
  if (p.b > 0) r.gradient = p.b * gradient_power(*pb.grid, u, state->w.w, p.q);
  r.well = potential_sum(pb, state->v, false) / p.eta;
  r.dirichlet = p.eta * dirichlet_energy(*pb.grid, vtilde);
  r.sum();
  return r;
}

double eval_AT(const Grid& grid, const NodalField& u, const NodalField& vtilde, const FunctionalParams& params,
               const Potentials& pot) {
  const auto v = PhaseField::from_complement(vtilde).v;
  double s = 0.0;
  if (params.b > 0) s += params.b * gradient_power(grid, u, psi_eta(grid, v, params.o_eta, pot).w, params.q);
  const auto& m = grid.node_mass();
  double well = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) well += m[n] * pot.V(v[n]);
  return s + well / params.eta + params.eta * dirichlet_energy(grid, vtilde);
}

FunctionalBreakdown evaluate(const Problem& pb, FunctionalKind kind, const NodalField& vtilde, const State* state) {
  switch (kind) {
    case FunctionalKind::G: return eval_G(pb, vtilde, state);
    case FunctionalKind::HatF: return eval_hatF_q(pb, vtilde, state);
    case FunctionalKind::F: break;
  }
  throw Error("functionals", "the two-variable functional needs an explicit u");
}

}  // namespace phasecav
