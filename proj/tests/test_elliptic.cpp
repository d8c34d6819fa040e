#include <doctest.h>

#include <cmath>
#include <random>

#include "phasecav/elliptic.hpp"
#include "phasecav/forward.hpp"
#include "phasecav/phase_field.hpp"
#include "phasecav/q1.hpp"

using namespace phasecav;

namespace {

Grid square(int res, double delta = 0.1) {
  DomainSpec s;
  s.delta = delta;
  return build_grid(s, res);
}

NeumannData side_flux(const Grid& g, double right, double left) {
  NeumannData f{std::vector<double>(g.boundary().size(), 0.0)};
  for (std::size_t k = 0; k < f.f.size(); ++k) {
    if (g.boundary()[k].side == Side::Right) f.f[k] = right;
    if (g.boundary()[k].side == Side::Left) f.f[k] = left;
  }
  return f;
}

}  // namespace

TEST_SUITE("elliptic") {
  TEST_CASE("unit Laplace stiffness on a 2x2 grid") {
    DomainSpec s;
    s.delta = 0.1;
    const Grid g(s, 2, 2, 0.5);
    const auto sys = assemble(g, WeightField::constant(g, 1.0));
    // Hand values: corner 4/6, edge midpoint 8/6, centre 16/6.
    CHECK(sys.matrix.diagonal(g.node(0, 0)) == doctest::Approx(4.0 / 6));
    CHECK(sys.matrix.diagonal(g.node(1, 0)) == doctest::Approx(8.0 / 6));
    CHECK(sys.matrix.diagonal(g.node(1, 1)) == doctest::Approx(16.0 / 6));
    CHECK(sys.matrix.entry(g.node(1, 1), g.node(0, 0)) == doctest::Approx(-2.0 / 6));
    CHECK(sys.matrix.entry(g.node(1, 1), g.node(1, 0)) == doctest::Approx(-2.0 / 6));
    CHECK(sys.matrix.entry(g.node(0, 0), g.node(2, 2)) == 0.0);
    for (int r = 0; r < g.num_nodes(); ++r) {
      double sum = 0.0;
      for (int c = 0; c < g.num_nodes(); ++c) {
        sum += sys.matrix.entry(r, c);
        CHECK(sys.matrix.entry(r, c) == doctest::Approx(sys.matrix.entry(c, r)).epsilon(1e-14));
      }
      CHECK(std::abs(sum) < 1e-14);
    }
  }

  TEST_CASE("checkerboard weights match hand assembly") {
    DomainSpec s;
    s.delta = 0.1;
    const Grid g(s, 2, 2, 0.5);
    const double e = 1e-3;
    WeightField w{{e, 1.0, 1.0, e}, e, 1.0};
    const auto K = assemble(g, w).matrix;
    CHECK(K.diagonal(g.node(0, 0)) == doctest::Approx(e * 4 / 6));
    CHECK(K.diagonal(g.node(2, 0)) == doctest::Approx(4.0 / 6));
    CHECK(K.diagonal(g.node(1, 1)) == doctest::Approx((2 * e + 2) * 4 / 6));
    CHECK(K.entry(g.node(1, 0), g.node(1, 1)) == doctest::Approx(-(e + 1.0) / 6));
    CHECK(K.entry(g.node(0, 0), g.node(1, 1)) == doctest::Approx(-2 * e / 6));
    CHECK(K.entry(g.node(2, 0), g.node(1, 1)) == doctest::Approx(-2.0 / 6));
    CHECK(K.entry(g.node(0, 1), g.node(1, 0)) == doctest::Approx(-2 * e / 6));
  }

  TEST_CASE("doubling the weight doubles the matrix") {
    const Grid g = square(16);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.1, 1.0);
    WeightField w{CellField(g.num_cells()), 0.1, 2.0};
    for (auto& x : w.w) x = U(rng);
    auto w2 = w;
    for (auto& x : w2.w) x *= 2;
    const auto K1 = assemble(g, w).matrix, K2 = assemble(g, w2).matrix;
    for (int r = 0; r < g.num_nodes(); ++r)
      for (int k = 0; k < 9; ++k) CHECK(K2.row(r)[k] == 2 * K1.row(r)[k]);
  }

  TEST_CASE("nonpositive weights and bad data are rejected") {
    const Grid g = square(16);
    WeightField w = WeightField::constant(g, 1.0);
    w.w[3] = 0.0;
    CHECK_THROWS_AS(assemble(g, w), Error);
    NeumannData f{std::vector<double>(g.boundary().size(), 0.0)};
    f.f[0] = 1.0;
    CHECK_THROWS_AS(solve_weighted_neumann(g, WeightField::constant(g, 1.0), f), Error);
  }

  TEST_CASE("zero data gives zero") {
    const Grid g = square(16);
    const auto u = solve_weighted_neumann(g, WeightField::constant(g, 1.0),
                                          NeumannData{std::vector<double>(g.boundary().size(), 0.0)});
    for (double x : u) CHECK(x == 0.0);
  }

  TEST_CASE("linear solution is reproduced exactly") {
    const Grid g = square(16);
    const auto u = solve_weighted_neumann(g, WeightField::constant(g, 1.0), side_flux(g, 1.0, -1.0), {1e-14, 100000});
    for (int n = 0; n < g.num_nodes(); ++n) CHECK(u[n] == doctest::Approx(g.node_x(n) - 0.5).epsilon(1e-11));
    CHECK(std::abs(gamma_mean(g, u)) < 1e-12);
  }

  TEST_CASE("iteration limit is reported with the achieved residual") {
    const Grid g = square(32);
    try {
      solve_weighted_neumann(g, WeightField::constant(g, 1.0), side_flux(g, 1.0, -1.0), {1e-12, 3});
      FAIL("expected a solver error");
    } catch (const SolverError& e) {
      CHECK(e.residual() > 1e-12);
      CHECK(e.stage() == "solver");
    }
  }

  TEST_CASE("weak form residual and linearity") {
    const Grid g = square(24);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.01, 1.0);
    WeightField w{CellField(g.num_cells()), 0.01, 1.0};
    for (auto& x : w.w) x = U(rng);
    const auto f1 = side_flux(g, 1.0, -1.0);
    const auto f2 = make_flux(g, "cosine:2:1");
    const SolverOptions opts{1e-12, 100000};
    const auto u1 = solve_weighted_neumann(g, w, f1, opts);
    const auto u2 = solve_weighted_neumann(g, w, f2, opts);
    NeumannData f3{f1.f};
    for (std::size_t k = 0; k < f3.f.size(); ++k) f3.f[k] = 2 * f1.f[k] - 3 * f2.f[k];
    const auto u3 = solve_weighted_neumann(g, w, f3, opts);
    double scale = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) scale = std::max(scale, std::abs(u3[n]));
    for (int n = 0; n < g.num_nodes(); ++n) CHECK(std::abs(u3[n] - (2 * u1[n] - 3 * u2[n])) < 1e-8 * scale);

    const auto sys = assemble(g, w);
    const auto Ku = sys.matrix.apply(u1);
    const auto b = neumann_load(g, f1);
    double rmax = 0.0, bmax = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
      rmax = std::max(rmax, std::abs(Ku[n] - b[n]));
      bmax = std::max(bmax, std::abs(b[n]));
    }
    CHECK(rmax < 1e-9 * bmax);
  }

  TEST_CASE("boundary traces") {
    const Grid g = square(16);
    NodalField c(g.num_nodes(), 3.0), x(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) x[n] = g.node_x(n);
    const auto t = boundary_trace(g, c, Segment::Gamma);
    for (double v : t.values) CHECK(v == 3.0);
    double len = 0.0;
    for (double w : t.weights) len += w;
    CHECK(len == doctest::Approx(4.0));

    DomainSpec s;
    s.delta = 0.1;
    s.gamma = {{Side::Bottom, 0.0, 1.0}};
    const Grid gb = build_grid(s, 16);
    NodalField xb(gb.num_nodes());
    for (int n = 0; n < gb.num_nodes(); ++n) xb[n] = gb.node_x(n);
    const auto tb = boundary_trace(gb, xb, Segment::Gamma);
    CHECK(tb.nodes.size() == 17u);
    for (std::size_t k = 0; k < tb.nodes.size(); ++k) {
      CHECK(gb.node_y(tb.nodes[k]) == 0.0);
      CHECK(tb.values[k] == gb.node_x(tb.nodes[k]));
    }
  }

  TEST_CASE("strip solution trace at y = 0") {
    // coth(2 pi) sqrt(2) / pi evaluated independently.
    const double amp = std::sqrt(2.0) / M_PI * std::cosh(2 * M_PI) / std::sinh(2 * M_PI);
    CHECK(amp == doctest::Approx(0.4501613).epsilon(1e-6));
    for (double x : {0.0, 0.3, 0.5, 0.9})
      CHECK(analytic_strip_solution(M_PI, 2.0, x, 0.0) == doctest::Approx(amp * std::cos(M_PI * x)).epsilon(1e-12));

    DomainSpec s;
    s.height = 2.0;
    s.delta = 0.1;
    s.gamma_tilde = {{Side::Bottom, 0.0, 1.0}};
    const Grid g = build_grid(s, 32);
    const auto u = solve_weighted_neumann(g, WeightField::constant(g, 1.0), make_flux(g, "strip"), {1e-12, 100000});
    double mean = 0.0, len = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
      mean += g.gamma_weights()[n] * analytic_strip_solution(M_PI, 2.0, g.node_x(n), g.node_y(n));
      len += g.gamma_weights()[n];
    }
    mean /= len;
    for (int i = 0; i <= g.nx(); ++i) {
      const int n = g.node(i, 0);
      CHECK(u[n] == doctest::Approx(amp * std::cos(M_PI * g.node_x(n)) - mean).epsilon(0.01).scale(0.45));
    }
  }

  TEST_CASE("energy seminorm") {
    const Grid g = square(16);
    NodalField c(g.num_nodes(), 2.0), x(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) x[n] = g.node_x(n);
    CHECK(energy_seminorm(g, c, WeightField::constant(g, 1.0)) < 1e-6);  // square root of round-off
    CHECK(energy_seminorm(g, x, WeightField::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(energy_seminorm(g, x, WeightField::constant(g, 4.0)) == doctest::Approx(2.0).epsilon(1e-13));
  }

  TEST_CASE("Caccioppoli ratio on polynomials") {
    const Grid g = square(256);
    const CellField w(g.num_cells(), 1.0);
    NodalField one(g.num_nodes(), 1.0), x(g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) x[n] = g.node_x(n);
    CHECK(*caccioppoli_ratio(g, one, w, 0.5, 0.5, 0.1) == 0.0);
    // R^2 |B_R| / int_{B_2R} x^2 = R^2 / (4 cx^2 + 4 R^2).
    const double cx = 0.4, R = 0.15;
    const double exact = R * R / (4 * cx * cx + 4 * R * R);
    CHECK(*caccioppoli_ratio(g, x, w, cx, 0.5, R) == doctest::Approx(exact).epsilon(0.01));
    CHECK_THROWS_AS(caccioppoli_ratio(g, x, w, 0.1, 0.5, 0.1), Error);
    NodalField zero(g.num_nodes(), 0.0);
    CHECK_FALSE(caccioppoli_ratio(g, zero, w, 0.5, 0.5, 0.1).has_value());
  }

  TEST_CASE("solution bounds do not depend on the weight contrast") {
    const Grid g = square(48, 0.08);
    const auto retained = rasterize_cavity(g, CavityShape::parse("disc:0.5,0.6,0.2"));
    const Potentials pot;
    const auto f = make_flux(g, "dipole_y:1");
    double umin = 1e300, umax = 0.0, emin = 1e300, emax = 0.0;
    for (double eta : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const auto v = smoothed_indicator(g, retained, 2 * std::max(eta, g.h()));
      const auto w = psi_eta(g, v, eta * eta, pot);
      for (int c = 0; c < g.num_cells(); ++c)
        if (g.band_tilde_cells()[c]) CHECK(w.w[c] == 1.0);
      const auto u = solve_weighted_neumann(g, w, f, {1e-10, 400000});
      double m = 0.0;
      for (double x : u) m = std::max(m, std::abs(x));
      umin = std::min(umin, m);
      umax = std::max(umax, m);
      const double e = energy_seminorm(g, u, w);
      emin = std::min(emin, e);
      emax = std::max(emax, e);
      CHECK(std::abs(gamma_mean(g, u)) < 1e-9);
    }
    CHECK(umax / umin < 2.0);
    CHECK(emax / emin < 2.0);
  }
}
