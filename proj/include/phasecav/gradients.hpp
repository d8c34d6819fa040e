#pragma once

#include "phasecav/functionals.hpp"

namespace phasecav {

/// Derivative of the state u~ along a phase-field direction:
/// K(v0) U = sum_c psi_eta'(avg_c v0) avg_c(dir) K_c u~, gamma mean zero.
struct SensitivityState {
  NodalField U;
  SolveStats stats;
};

struct AdjointState {
  NodalField p;
  SolveStats stats;
};

/// Nodal gradient with respect to vtilde, split as
/// D J[d] = sum_n density_n d_n m_n + sum_n dirichlet_n d_n
/// where m is the lumped node mass and dirichlet = 2 eta K_1 vtilde.
/// Both parts vanish on the outer band.
struct GradientField {
  NodalField density;
  NodalField dirichlet;

  double pair(const Grid& grid, const NodalField& direction) const;
  /// Riesz representative in the lumped-mass inner product.
  NodalField steepest(const Grid& grid) const;
};

/// R d with R the linearised coefficient operator at the state.
NodalField sensitivity_rhs(const Grid& grid, const State& state, const NodalField& direction, double o_eta,
                           const Potentials& pot);
SensitivityState sensitivity_solve(const Problem& pb, const State& state, const NodalField& direction);

double directional_dG(const Problem& pb, const NodalField& vtilde0, const NodalField& direction,
                      const State* state = nullptr);
/// Uses params.q; V' in place of W'.
double directional_dHatF(const Problem& pb, const NodalField& vtilde0, const NodalField& direction,
                         const State* state = nullptr);
/// Full differential of the two-variable functional along (du, direction).
double directional_dF(const Problem& pb, const NodalField& u0, const NodalField& vtilde0, const NodalField& du,
                      const NodalField& direction, const State* state = nullptr);

GradientField full_gradient_G(const Problem& pb, const NodalField& vtilde0, const State* state = nullptr,
                              AdjointState* adjoint = nullptr, const NodalField* warm_adjoint = nullptr);
GradientField full_gradient_hatF(const Problem& pb, const NodalField& vtilde0, const State* state = nullptr,
                                 AdjointState* adjoint = nullptr, const NodalField* warm_adjoint = nullptr);
GradientField full_gradient(const Problem& pb, FunctionalKind kind, const NodalField& vtilde0,
                            const State* state = nullptr, AdjointState* adjoint = nullptr,
                            const NodalField* warm_adjoint = nullptr);

/// Partial gradients of the two-variable functional. The vtilde part needs no
/// extra solve: the sensitivity only enters through f.U = u~' R d.
NodalField partial_u_F(const Problem& pb, const NodalField& u, const State& state);
GradientField partial_v_F(const Problem& pb, const NodalField& u, const NodalField& vtilde, const State& state);

}  // namespace phasecav
