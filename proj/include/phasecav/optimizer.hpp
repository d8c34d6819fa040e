#pragma once

#include <functional>
#include <string>

#include "phasecav/gradients.hpp"

namespace phasecav {

enum class StepRule { Fixed, Backtracking, BarzilaiBorwein };
std::string to_string(StepRule r);
StepRule step_rule_from_string(const std::string& s);

struct OptimizerConfig {
  int max_iterations = 2000;
  double stop_tol = 1e-7;     // relative decrease per accepted step
  int stall_iterations = 5;   // consecutive small decreases before stopping
  StepRule rule = StepRule::BarzilaiBorwein;
  double fixed_step = 1e-4;
  double initial_step = 1.0;  // first trial of plain backtracking
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
  double min_step = 1e-12;
  double max_step = 1e6;
  std::string init = "zero";  // zero | constant:<value>
  int checkpoint_every = 0;

  /// Armijo constant in (0,1/2], shrink in (0,1), max_iterations >= 1.
  void validate() const;
};

struct TraceRow {
  int iteration = 0;
  std::string phase;  // "v", "u" or "init"
  FunctionalBreakdown terms;
  double step = 0.0;
  double grad_norm = 0.0;  // lumped-mass norm of the projected gradient step
  int projected = 0;       // nodes changed by the projection
  int backtracks = 0;
  int solver_iterations = 0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  bool line_search_failed = false;
  std::string stop_reason;
};

using Checkpoint = std::function<void(int iteration, const NodalField& vtilde)>;

/// Starting field from config.init, projected onto the admissible set.
NodalField initial_field(const Grid& grid, const OptimizerConfig& config);

/// P(vtilde - step * (density + dirichlet / m)).
NodalField projected_step(const Grid& grid, const NodalField& vtilde, const GradientField& gradient, double step,
                          int* changed = nullptr);

struct MinimizeResult {
  NodalField vtilde;
  NodalField u;  // state at vtilde
  RunTrace trace;
};

/// Projected gradient descent on G or the reduced crack functional.
MinimizeResult minimize_reduced(const Problem& pb, FunctionalKind kind, const NodalField& init,
                                const OptimizerConfig& config, const Checkpoint& checkpoint = {});
MinimizeResult minimize_G(const Problem& pb, const NodalField& init, const OptimizerConfig& config,
                          const Checkpoint& checkpoint = {});

/// Minimiser in u of the two-variable functional (q = 2) at fixed vtilde:
/// [(a1/eps^q~ + b) K + (a2/eps^b~) L] u = (a1/eps^q~) f + (a2/eps^b~) L g.
NodalField minimize_u(const Problem& pb, const State& state, const NodalField* warm = nullptr,
                      SolveStats* stats = nullptr);

struct AlternatingResult {
  NodalField u;
  NodalField vtilde;
  RunTrace trace;
};

/// Alternates the exact u-minimisation with one projected Armijo step in
/// vtilde. Starts from u = u~(init).
AlternatingResult minimize_F2_alternating(const Problem& pb, const NodalField& init, const OptimizerConfig& config,
                                          const Checkpoint& checkpoint = {});

}  // namespace phasecav
