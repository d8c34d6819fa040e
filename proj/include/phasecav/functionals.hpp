#pragma once

#include "phasecav/elliptic.hpp"
#include "phasecav/forward.hpp"
#include "phasecav/phase_field.hpp"

namespace phasecav {

enum class FunctionalKind { G, HatF, F };
std::string to_string(FunctionalKind k);
FunctionalKind functional_from_string(const std::string& s);

struct FunctionalParams {
  double epsilon = 0.1;
  double eta = 0.1;
  double o_eta = 0.01;
  double a1 = 1.0;
  double a2 = 1.0;
  double b = 0.0;
  double q_tilde = 0.5;
  double beta_tilde = 0.5;
  double q = 2.0;

  /// eta and o_eta taken from the schedule at noise level eps.
  static FunctionalParams from_schedule(double eps, const EtaSchedule& schedule, double a1 = 1.0,
                                        double a2 = 1.0, double b = 0.0, double q_tilde = 0.5,
                                        double beta_tilde = 0.5, double q = 2.0);
  /// Positivity of every coefficient (b >= 0), q >= 2, and with `cavity`
  /// also 0 < beta_tilde <= q_tilde <= 2.
  void validate(bool cavity) const;

  double misfit_weight() const;       // a2 / eps^beta_tilde
  double discrepancy_weight() const;  // a1 / eps^q_tilde
};

struct FunctionalBreakdown {
  double misfit = 0.0;
  double discrepancy = 0.0;
  double gradient = 0.0;
  double well = 0.0;
  double dirichlet = 0.0;
  double total = 0.0;

  void sum() { total = misfit + discrepancy + gradient + well + dirichlet; }
};

/// Everything a functional evaluation needs besides the phase field. Holds a
/// pointer to the grid, which must outlive it.
struct Problem {
  Problem(const Grid& grid, CauchyData data, FunctionalParams params, Potentials potentials = Potentials(),
          SolverOptions solver = {});

  const Grid* grid;
  CauchyData data;
  FunctionalParams params;
  Potentials potentials;
  SolverOptions solver;
  NodalField load;  // consistent load of f
  NodalField g;     // g on gamma nodes, zero elsewhere
};

/// u~(vtilde) together with the operator it solves.
struct State {
  NodalField v;
  WeightField w;
  LinearSystem system;
  NodalField u;
  SolveStats stats;
};

/// Weighted Neumann solve with w = psi_eta(1 - vtilde); gamma mean zero.
State state_solve(const Problem& pb, const NodalField& vtilde, const NodalField* warm_start = nullptr);

/// sum over gamma nodes of l_n (u_n - g_n)^2.
double raw_misfit(const Problem& pb, const NodalField& u);

/// int w |grad u|^q by 2x2 Gauss points, per cell (unweighted) and total.
double cell_gradient_power(const Grid& grid, const NodalField& u, int c, double q);
double gradient_power(const Grid& grid, const NodalField& u, const CellField& w, double q);
/// Nodal derivative of int w |grad u|^q with respect to u.
NodalField gradient_power_derivative(const Grid& grid, const NodalField& u, const CellField& w, double q);

/// Double-well cavity functional.
FunctionalBreakdown eval_G(const Problem& pb, const NodalField& vtilde, const State* state = nullptr);
/// Reduced crack functional with exponent params.q and the single well V.
FunctionalBreakdown eval_hatF_q(const Problem& pb, const NodalField& vtilde, const State* state = nullptr);
/// Two-variable crack functional. The discrepancy |u - u~|^2_w is evaluated as
/// u'Ku - 2 f.u + f.u~ from the single state solve.
FunctionalBreakdown eval_F_q(const Problem& pb, const NodalField& u, const NodalField& vtilde,
                             const State* state = nullptr);
/// b int psi_eta(v)|grad u|^q + (1/eta) int V(v) + eta int |grad v|^2.
double eval_AT(const Grid& grid, const NodalField& u, const NodalField& vtilde, const FunctionalParams& params,
               const Potentials& pot);

FunctionalBreakdown evaluate(const Problem& pb, FunctionalKind kind, const NodalField& vtilde,
                             const State* state = nullptr);

}  // namespace phasecav
