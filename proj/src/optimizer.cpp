#include "phasecav/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phasecav {

std::string to_string(StepRule r) {
  switch (r) {
    case StepRule::Fixed: return "fixed";
    case StepRule::Backtracking: return "backtracking";
    case StepRule::BarzilaiBorwein: return "bb";
  }
  return "?";
}

StepRule step_rule_from_string(const std::string& s) {
  if (s == "fixed") return StepRule::Fixed;
  if (s == "backtracking") return StepRule::Backtracking;
  if (s == "bb") return StepRule::BarzilaiBorwein;
  throw Error("config", "unknown step rule '" + s + "'");
}

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw Error("optimizer", "max_iterations must be at least 1");
  if (!(armijo > 0 && armijo <= 0.5)) throw Error("optimizer", "Armijo constant must lie in (0, 1/2]");
  if (!(shrink > 0 && shrink < 1)) throw Error("optimizer", "shrink factor must lie in (0, 1)");
  if (!(stop_tol >= 0)) throw Error("optimizer", "stop_tol must be nonnegative");
  if (!(fixed_step > 0 && initial_step > 0)) throw Error("optimizer", "steps must be positive");
  if (!(min_step > 0 && min_step < max_step)) throw Error("optimizer", "need 0 < min_step < max_step");
  if (max_backtracks < 0 || stall_iterations < 1) throw Error("optimizer", "bad line search limits");
  if (init != "zero" && init.rfind("constant:", 0) != 0) throw Error("optimizer", "unknown init '" + init + "'");
}

NodalField initial_field(const Grid& grid, const OptimizerConfig& config) {
  config.validate();
  double value = 0.0;
  if (config.init.rfind("constant:", 0) == 0) {
    std::size_t used = 0;
    const std::string num = config.init.substr(9);
    try {
      value = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) throw Error("optimizer", "bad init value '" + num + "'");
  }
  return project_admissible(grid, NodalField(grid.num_nodes(), value));
}

NodalField projected_step(const Grid& grid, const NodalField& vtilde, const GradientField& gradient, double step,
                          int* changed) {
  const auto& m = grid.node_mass();
  NodalField x(vtilde.size());
  for (std::size_t n = 0; n < x.size(); ++n)
    x[n] = vtilde[n] - step * (gradient.density[n] + gradient.dirichlet[n] / m[n]);
  int clipped = 0;
  // Count only nodes where the projection is active, not the raw update.
  const auto& band = grid.band_tilde_nodes();
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double y = band[n] ? 0.0 : std::clamp(x[n], 0.0, 1.0);
    if (y != x[n]) ++clipped;
    x[n] = y;
  }
  if (changed) *changed = clipped;
  return x;
}

namespace {

double mass_dot(const Grid& grid, const NodalField& a, const NodalField& b) {
  const auto& m = grid.node_mass();
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += m[n] * a[n] * b[n];
  return s;
}

double stationarity(const Grid& grid, const NodalField& x, const GradientField& g) {
  const auto y = projected_step(grid, x, g, 1.0);
  NodalField d(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) d[n] = y[n] - x[n];
  return std::sqrt(mass_dot(grid, d, d));
}

// First trial step: at most 0.1 change per node.
double first_step(const Grid& grid, const GradientField& g, const OptimizerConfig& config) {
  const auto s = g.steepest(grid);
  double mx = 0.0;
  for (double x : s) mx = std::max(mx, std::abs(x));
  return mx > 0 ? std::clamp(std::min(config.initial_step, 0.1 / mx), config.min_step, config.max_step)
                : config.initial_step;
}

double bb_step(const Grid& grid, const NodalField& x0, const NodalField& x1, const GradientField& g0,
               const GradientField& g1, double previous, const OptimizerConfig& config) {
  const auto s0 = g0.steepest(grid), s1 = g1.steepest(grid);
  NodalField s(x0.size()), y(x0.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    s[n] = x1[n] - x0[n];
    y[n] = s1[n] - s0[n];
  }
  const double sy = mass_dot(grid, s, y), ss = mass_dot(grid, s, s);
  const double a = sy > 0 ? ss / sy : previous * 2;
  return std::clamp(a, config.min_step, config.max_step);
}

struct LineSearch {
  bool accepted = false;
  bool stationary = false;
  NodalField x;
  State state;
  FunctionalBreakdown value;
  double step = 0.0;
  int projected = 0;
  int backtracks = 0;
};

template <class Eval>
LineSearch search(const Grid& grid, const NodalField& x, const GradientField& g, double current, double step,
                  const OptimizerConfig& config, Eval eval) {
  LineSearch ls;
  for (int bt = 0; bt <= config.max_backtracks; ++bt) {
    ls.x = projected_step(grid, x, g, step, &ls.projected);
    ls.step = step;
    ls.backtracks = bt;
    if (ls.x == x) {
      ls.stationary = bt == 0;
      if (ls.stationary) return ls;
    } else {
      eval(ls.x, ls.state, ls.value);
      NodalField d(x.size());
      for (std::size_t n = 0; n < d.size(); ++n) d[n] = ls.x[n] - x[n];
      if (config.rule == StepRule::Fixed || ls.value.total <= current + config.armijo * g.pair(grid, d)) {
        ls.accepted = true;
        return ls;
      }
    }
    step *= config.shrink;
    if (step < config.min_step) break;
  }
  return ls;
}

}  // namespace

MinimizeResult minimize_reduced(const Problem& pb, FunctionalKind kind, const NodalField& init,
                                const OptimizerConfig& config, const Checkpoint& checkpoint) {
  config.validate();
  if (kind == FunctionalKind::F) throw Error("optimizer", "use the alternating scheme for the two-variable functional");
  const Grid& grid = *pb.grid;
  NodalField x = project_admissible(grid, init);
  State st = state_solve(pb, x);
  FunctionalBreakdown J = evaluate(pb, kind, x, &st);
  AdjointState adj;
  GradientField g = full_gradient(pb, kind, x, &st, &adj);

  MinimizeResult res;
  res.trace.rows.push_back({0, "init", J, 0.0, stationarity(grid, x, g), 0, 0, st.stats.iterations + adj.stats.iterations});

  double step = config.rule == StepRule::Fixed ? config.fixed_step : first_step(grid, g, config);
  int stall = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    auto eval = [&](const NodalField& xn, State& sn, FunctionalBreakdown& jn) {
      sn = state_solve(pb, xn, &st.u);
      jn = evaluate(pb, kind, xn, &sn);
    };
    LineSearch ls = search(grid, x, g, J.total, step, config, eval);
    if (ls.stationary) {
      res.trace.converged = true;
      res.trace.stop_reason = "stationary";
      break;
    }
    if (!ls.accepted) {
      res.trace.line_search_failed = true;
      res.trace.stop_reason = "line search failed";
      break;
    }
    AdjointState adj_n;
    GradientField gn = full_gradient(pb, kind, ls.x, &ls.state, &adj_n, &adj.p);
    const double rel = (J.total - ls.value.total) / std::max(std::abs(J.total), 1e-300);

    if (config.rule == StepRule::BarzilaiBorwein)
      step = bb_step(grid, x, ls.x, g, gn, ls.step, config);
    else if (config.rule == StepRule::Backtracking)
      step = std::min(config.initial_step, ls.step * 2);

    x = std::move(ls.x);
    st = std::move(ls.state);
    J = ls.value;
    g = std::move(gn);
    adj = std::move(adj_n);
    res.trace.rows.push_back({it, "v", J, ls.step, stationarity(grid, x, g), ls.projected, ls.backtracks,
                              st.stats.iterations + adj.stats.iterations});
    if (checkpoint && config.checkpoint_every > 0 && it % config.checkpoint_every == 0) checkpoint(it, x);

    stall = std::abs(rel) < config.stop_tol ? stall + 1 : 0;
    if (stall >= config.stall_iterations) {
      res.trace.converged = true;
      res.trace.stop_reason = "relative decrease below tolerance";
      break;
    }
  }
  if (res.trace.stop_reason.empty()) res.trace.stop_reason = "iteration limit";
  res.vtilde = std::move(x);
  res.u = std::move(st.u);
  return res;
}

MinimizeResult minimize_G(const Problem& pb, const NodalField& init, const OptimizerConfig& config,
                          const Checkpoint& checkpoint) {
  return minimize_reduced(pb, FunctionalKind::G, init, config, checkpoint);
}

NodalField minimize_u(const Problem& pb, const State& state, const NodalField* warm, SolveStats* stats) {
  const auto& p = pb.params;
  if (p.q != 2.0) throw Error("optimizer", "the u-step is linear only for q = 2");
  const Grid& grid = *pb.grid;
  const double A1 = p.discrepancy_weight(), A2 = p.misfit_weight();
  LinearSystem sys = state.system;
  sys.matrix.scale(A1 + p.b);
  const auto& l = grid.gamma_weights();
  NodalField rhs(grid.num_nodes());
  for (int n = 0; n < grid.num_nodes(); ++n) {
    sys.matrix.row(n)[4] += A2 * l[n];
    rhs[n] = A1 * pb.load[n] + A2 * l[n] * pb.g[n];
  }
  NodalField u = warm ? *warm : state.u;
  const auto s = pcg(sys, rhs, u, false, pb.solver);
  if (stats) *stats = s;
  return u;
}

AlternatingResult minimize_F2_alternating(const Problem& pb, const NodalField& init, const OptimizerConfig& config,
                                          const Checkpoint& checkpoint) {
  config.validate();
  const Grid& grid = *pb.grid;
  AlternatingResult res;
  NodalField x = project_admissible(grid, init);
  State st = state_solve(pb, x);
  NodalField u = st.u;
  FunctionalBreakdown F = eval_F_q(pb, u, x, &st);
  res.trace.rows.push_back({0, "init", F, 0.0, 0.0, 0, 0, st.stats.iterations});

  double step = config.rule == StepRule::Fixed ? config.fixed_step : -1.0;
  NodalField x_prev;
  GradientField g_prev;
  int stall = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const double before = F.total;
    SolveStats us;
    u = minimize_u(pb, st, &u, &us);
    F = eval_F_q(pb, u, x, &st);
    res.trace.rows.push_back({it, "u", F, 0.0, 0.0, 0, 0, us.iterations});

    GradientField g = partial_v_F(pb, u, x, st);
    if (step < 0) step = first_step(grid, g, config);
    else if (config.rule == StepRule::BarzilaiBorwein && !x_prev.empty())
      step = bb_step(grid, x_prev, x, g_prev, g, step, config);
    else if (config.rule == StepRule::Backtracking)
      step = std::min(config.initial_step, step * 2);

    auto eval = [&](const NodalField& xn, State& sn, FunctionalBreakdown& jn) {
      sn = state_solve(pb, xn, &st.u);
      jn = eval_F_q(pb, u, xn, &sn);
    };
    LineSearch ls = search(grid, x, g, F.total, step, config, eval);
    if (ls.stationary) {
      res.trace.converged = true;
      res.trace.stop_reason = "stationary";
      break;
    }
    if (!ls.accepted) {
      res.trace.line_search_failed = true;
      res.trace.stop_reason = "line search failed";
      break;
    }
    x_prev = x;
    g_prev = std::move(g);
    step = ls.step;
    x = std::move(ls.x);
    st = std::move(ls.state);
    F = ls.value;
    res.trace.rows.push_back({it, "v", F, ls.step, stationarity(grid, x, g_prev), ls.projected, ls.backtracks,
                              st.stats.iterations});
    if (checkpoint && config.checkpoint_every > 0 && it % config.checkpoint_every == 0) checkpoint(it, x);

    const double rel = (before - F.total) / std::max(std::abs(before), 1e-300);
    stall = std::abs(rel) < config.stop_tol ? stall + 1 : 0;
    if (stall >= config.stall_iterations) {
      res.trace.converged = true;
      res.trace.stop_reason = "relative decrease below tolerance";
      break;
    }
  }
  if (res.trace.stop_reason.empty()) res.trace.stop_reason = "iteration limit";
  res.u = std::move(u);
  res.vtilde = std::move(x);
  return res;
}

}  // namespace phasecav
