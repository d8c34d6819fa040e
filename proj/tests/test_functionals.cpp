#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "phasecav/experiment.hpp"
#include "phasecav/functionals.hpp"

using namespace phasecav;

namespace {

Grid square(int res) {
  DomainSpec s;
  s.delta = 0.08;
  return build_grid(s, res);
}

FunctionalParams params(double eps, double b = 0.0, double q = 2.0) {
  auto p = FunctionalParams::from_schedule(eps, EtaSchedule{});
  p.b = b;
  p.q = q;
  return p;
}

SolverOptions tight() { return {1e-13, 200000}; }

}  // namespace

TEST_SUITE("functionals") {
  TEST_CASE("parameter validation") {
    auto p = params(0.05);
    CHECK_NOTHROW(p.validate(true));
    CHECK(p.misfit_weight() == doctest::Approx(1 / std::sqrt(0.05)));
    CHECK(p.discrepancy_weight() == doctest::Approx(1 / std::sqrt(0.05)));
    auto bad = p;
    bad.beta_tilde = 0.8;  // above q_tilde
    CHECK_THROWS_AS(bad.validate(true), Error);
    CHECK_NOTHROW(bad.validate(false));
    bad = p;
    bad.q = 1.5;
    CHECK_THROWS_AS(bad.validate(false), Error);
    bad = p;
    bad.b = -1;
    CHECK_THROWS_AS(bad.validate(false), Error);
    bad = p;
    bad.a2 = 0;
    CHECK_THROWS_AS(bad.validate(false), Error);
    CHECK(functional_from_string(to_string(FunctionalKind::HatF)) == FunctionalKind::HatF);
    CHECK_THROWS_AS(functional_from_string("H"), Error);
  }

  TEST_CASE("v = 1 reproduces the unit-coefficient problem") {
    const Grid g = square(32);
    const auto gt = solve_direct_cavity(g, CavityShape{}, make_flux(g, "dipole_y:1"), tight());
    const Problem pb(g, gt.data, params(0.1), Potentials(), tight());
    const auto st = state_solve(pb, NodalField(g.num_nodes(), 0.0));
    for (double w : st.w.w) CHECK(w == 1.0);
    for (int n = 0; n < g.num_nodes(); ++n) CHECK(std::abs(st.u[n] - gt.u0[n]) < 1e-10);
  }

  TEST_CASE("sharp cavity indicator recovers the direct trace") {
    const Grid g = square(64);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.6,0.2"), make_flux(g, "dipole_y:1"));
    const Problem pb(g, gt.data, params(0.01));
    const auto touched = nodes_of_cells(g, gt.retained);
    NodalField vt(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) vt[n] = touched[n] ? 0.0 : 1.0;
    const auto st = state_solve(pb, vt);
    CHECK(std::sqrt(raw_misfit(pb, st.u)) < 0.05 * std::sqrt(raw_misfit(pb, NodalField(g.num_nodes(), 0.0))));
  }

  TEST_CASE("state is linear in the flux") {
    const Grid g = square(32);
    const auto f1 = make_flux(g, "dipole_x:1"), f2 = make_flux(g, "cosine:2:0.5");
    NeumannData f12{f1.f};
    for (std::size_t k = 0; k < f12.f.size(); ++k) f12.f[k] += f2.f[k];
    const auto vt = random_admissible_field(g, 5);
    auto solve = [&](const NeumannData& f) {
      CauchyData d;
      d.f = f;
      d.g.assign(g.boundary().size(), 0.0);
      return state_solve(Problem(g, d, params(0.05), Potentials(), tight()), vt).u;
    };
    const auto u1 = solve(f1), u2 = solve(f2), u12 = solve(f12);
    for (int n = 0; n < g.num_nodes(); ++n) CHECK(std::abs(u12[n] - u1[n] - u2[n]) < 1e-9);
  }

  TEST_CASE("G with the true empty cavity sees only the voltage noise") {
    const Grid g = square(32);
    const double eps = 0.05;
    auto gt = solve_direct_cavity(g, CavityShape{}, make_flux(g, "dipole_x:1"), tight());
    // Mean-free voltage perturbation of norm exactly eps.
    const auto& e = g.boundary();
    const auto& l = g.gamma_weights();
    std::vector<double> p(e.size());
    double mean = 0, len = 0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      p[k] = std::cos(6 * M_PI * k / e.size()) + 0.3 * std::sin(2 * M_PI * k / e.size());
      mean += l[e[k].node_a] * p[k];
      len += l[e[k].node_a];
    }
    double nrm = 0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      p[k] -= mean / len;
      nrm += l[e[k].node_a] * p[k] * p[k];
    }
    for (std::size_t k = 0; k < e.size(); ++k) gt.data.g[k] += eps * p[k] / std::sqrt(nrm);
    const Problem pb(g, gt.data, params(eps), Potentials(), tight());
    const auto br = eval_G(pb, NodalField(g.num_nodes(), 0.0));
    CHECK(br.total == doctest::Approx(std::pow(eps, 2 - 0.5)).epsilon(1e-8));
    CHECK(br.gradient == 0.0);
    CHECK(br.well < 1e-12);
    CHECK(br.dirichlet < 1e-12);
  }

  TEST_CASE("coefficient linearity and term bookkeeping") {
    const Grid g = square(48);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.6,0.2"), make_flux(g, "dipole_y:1"));
    const auto data = add_noise(g, gt.data, 0.05, 1.0, 3);
    const auto vt = random_admissible_field(g, 9);
    auto p = params(0.05, 0.7);
    const auto a = eval_G(Problem(g, data, p), vt);
    p.a2 = 2.0;
    const auto b = eval_G(Problem(g, data, p), vt);
    CHECK(b.misfit == doctest::Approx(2 * a.misfit).epsilon(1e-12));
    CHECK(b.gradient == a.gradient);
    CHECK(b.well == a.well);
    CHECK(b.dirichlet == a.dirichlet);
    for (const auto& br : {a, b}) {
      CHECK(br.total == doctest::Approx(br.misfit + br.gradient + br.well + br.dirichlet).epsilon(1e-12));
      CHECK(br.discrepancy == 0.0);
    }
  }

  TEST_CASE("hatF with q = 2 differs from G by the potentials only") {
    const Grid g = square(48);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.6,0.2"), make_flux(g, "dipole_y:1"));
    const Potentials pot;
    for (double b : {0.0, 1.0}) {
      const Problem pb(g, gt.data, params(0.05, b, 2.0));
      const auto vt = random_admissible_field(g, 21);
      const auto st = state_solve(pb, vt);
      const auto G = eval_G(pb, vt, &st), H = eval_hatF_q(pb, vt, &st);
      double diff = 0;
      for (int n = 0; n < g.num_nodes(); ++n) {
        const double v = 1 - vt[n];
        diff += g.node_mass()[n] * (pot.V(v) - pot.W(v));
      }
      diff /= pb.params.eta;
      CHECK(H.total - G.total == doctest::Approx(diff).epsilon(1e-10));
      CHECK(H.gradient == doctest::Approx(G.gradient).epsilon(1e-12));
      if (b == 0.0) CHECK(H.gradient == 0.0);
    }
    const Problem pb3(g, gt.data, params(0.05, 0.0, 3.0));
    CHECK(eval_hatF_q(pb3, random_admissible_field(g, 2)).gradient == 0.0);
    const auto one = eval_hatF_q(pb3, NodalField(g.num_nodes(), 0.0));
    CHECK(one.well < 1e-12);
    CHECK(one.dirichlet < 1e-12);
  }

  TEST_CASE("discrepancy expansion against direct quadrature") {
    const Grid g = square(40);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.55,0.2"), make_flux(g, "dipole_y:1"));
    const Problem pb(g, gt.data, params(0.05, 1.0), Potentials(), tight());
    const auto vt = random_admissible_field(g, 4);
    const auto st = state_solve(pb, vt);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd(0, 0.05);
    NodalField u = st.u;
    for (auto& x : u) x += nd(rng);
    const auto br = eval_F_q(pb, u, vt, &st);
    NodalField d(u.size());
    for (std::size_t n = 0; n < u.size(); ++n) d[n] = u[n] - st.u[n];
    const double direct = pb.params.discrepancy_weight() * gradient_power(g, d, st.w.w, 2.0);
    CHECK(br.discrepancy == doctest::Approx(direct).epsilon(1e-8));
    CHECK(eval_F_q(pb, st.u, vt, &st).discrepancy < 1e-10 * direct);
    CHECK(br.total == doctest::Approx(br.misfit + br.discrepancy + br.gradient + br.well + br.dirichlet)
                          .epsilon(1e-12));
    // The reduced functional is F at the state.
    const auto at_state = eval_F_q(pb, st.u, vt, &st);
    const auto reduced = eval_hatF_q(pb, vt, &st);
    CHECK(at_state.total - at_state.discrepancy == doctest::Approx(reduced.total).epsilon(1e-12));
    // AT is F without its two data terms.
    CHECK(eval_AT(g, u, vt, pb.params, pb.potentials) ==
          doctest::Approx(br.gradient + br.well + br.dirichlet).epsilon(1e-12));
  }

  TEST_CASE("homogeneity in u without data") {
    const Grid g = square(32);
    CauchyData zero;
    zero.f.f.assign(g.boundary().size(), 0.0);
    zero.g.assign(g.boundary().size(), 0.0);
    const double q = 3.0;
    const Problem pb(g, zero, params(0.05, 1.0, q));
    const auto vt = random_admissible_field(g, 6);
    NodalField u(g.num_nodes()), u2(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) {
      u[n] = std::sin(3 * g.node_x(n)) * g.node_y(n);
      u2[n] = 2 * u[n];
    }
    const auto a = eval_F_q(pb, u, vt), b = eval_F_q(pb, u2, vt);
    CHECK(b.misfit == doctest::Approx(4 * a.misfit).epsilon(1e-12));
    CHECK(b.discrepancy == doctest::Approx(4 * a.discrepancy).epsilon(1e-10));
    CHECK(b.gradient == doctest::Approx(std::pow(2.0, q) * a.gradient).epsilon(1e-12));
    CHECK(b.well == a.well);
  }

  TEST_CASE("Ambrosio-Tortorelli elementary values") {
    const Grid g = square(32);
    const auto p = params(0.05, 1.0, 2.0);
    const NodalField one(g.num_nodes(), 0.0);
    CHECK(eval_AT(g, NodalField(g.num_nodes(), 3.0), one, p, Potentials()) < 1e-12);
    NodalField x(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) x[n] = g.node_x(n);
    CHECK(eval_AT(g, x, one, p, Potentials()) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("coupled jump and trench profile") {
    const Grid g = square(512);
    const Potentials pot;
    for (double eta : {0.04, 0.02}) {
      auto p = params(eta, 1.0, 2.0);
      p.eta = eta;
      p.o_eta = eta * eta;
      auto vfun = [&](double s) { return 1 - std::exp(-std::abs(s) / (2 * eta)); };
      auto ufun = [&](double s) {
        const double t = std::clamp(s / eta + 0.5, 0.0, 1.0);
        return t * t * (3 - 2 * t);
      };
      NodalField u(g.num_nodes()), vt(g.num_nodes());
      for (int n = 0; n < g.num_nodes(); ++n) {
        u[n] = ufun(g.node_x(n) - 0.5);
        vt[n] = 1 - vfun(g.node_x(n) - 0.5);
      }
      // 1-D oracle by fine midpoint quadrature, times interface length 1.
      const int m = 400000;
      const double ds = 1.0 / m;
      double oracle = 0, well = 0;
      for (int k = 0; k < m; ++k) {
        const double s = -0.5 + (k + 0.5) * ds;
        const double hd = 1e-7;
        const double du = (ufun(s + hd) - ufun(s - hd)) / (2 * hd);
        const double dv = (vfun(s + hd) - vfun(s - hd)) / (2 * hd);
        const double v = vfun(s);
        oracle += ds * (psi_eta(pot, p.o_eta, v) * du * du + pot.V(v) / eta + eta * dv * dv);
        well += ds * (pot.V(v) / eta + eta * dv * dv);
      }
      CHECK(well == doctest::Approx(4 * pot.c_V()).epsilon(0.15));
      CHECK(eval_AT(g, u, vt, p, pot) == doctest::Approx(oracle).epsilon(0.15));
    }
  }

  TEST_CASE("values are finite and nonnegative on admissible inputs") {
    const Grid g = square(32);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.6,0.2"), make_flux(g, "dipole_y:1"));
    const auto data = add_noise(g, gt.data, 0.05, 1.0, 1);
    for (std::uint64_t s = 0; s < 6; ++s) {
      const auto vt = random_admissible_field(g, s);
      for (auto kind : {FunctionalKind::G, FunctionalKind::HatF}) {
        const Problem pb(g, data, params(0.05, kind == FunctionalKind::G ? 0.0 : 1.0, 2.0 + s % 2));
        const auto br = evaluate(pb, kind, vt);
        for (double t : {br.misfit, br.gradient, br.well, br.dirichlet, br.total}) {
          CHECK(std::isfinite(t));
          CHECK(t >= 0.0);
        }
      }
    }
    const Problem pb(g, data, params(0.05));
    CHECK_THROWS_AS(evaluate(pb, FunctionalKind::F, NodalField(g.num_nodes(), 0.0)), Error);
  }
}
