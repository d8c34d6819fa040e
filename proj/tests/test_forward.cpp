#include <doctest.h>

#include <cmath>

#include "phasecav/forward.hpp"

using namespace phasecav;

namespace {

Grid square(int res, double delta = 0.08) {
  DomainSpec s;
  s.delta = delta;
  return build_grid(s, res);
}

double gamma_integral(const Grid& g, const NodalField& u) {
  double s = 0.0;
  for (int n = 0; n < g.num_nodes(); ++n) s += g.gamma_weights()[n] * u[n];
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_SUITE("forward") {
  TEST_CASE("empty cavity reproduces the linear potential") {
    const Grid g = square(32);
    const auto gt = solve_direct_cavity(g, CavityShape{}, make_flux(g, "dipole_x:1"), {1e-14, 100000});
    for (int n = 0; n < g.num_nodes(); ++n) CHECK(gt.u0[n] == doctest::Approx(g.node_x(n) - 0.5).epsilon(1e-11));
    const auto& e = g.boundary();
    for (std::size_t k = 0; k < e.size(); ++k) CHECK(gt.data.g[k] == gt.u0[e[k].node_a]);
    CHECK_NOTHROW(gt.data.validate(g));
  }

  TEST_CASE("strip with an insulating sheet matches separation of variables") {
    DomainSpec s;
    s.height = 3.0;
    s.delta = 0.1;
    s.gamma_tilde = {{Side::Bottom, 0.0, 1.0}};
    // Measurements only below the sheet; the sides cancel by antisymmetry.
    s.gamma = {{Side::Bottom, 0.0, 1.0}, {Side::Right, 0.0, 2.0 / 3}, {Side::Left, 0.0, 2.0 / 3}};
    const Grid g = build_grid(s, 32);
    // Removing the row of cells just above y = 2 cuts the strip.
    const auto cav = CavityShape::parse("rect:-1,2,2," + std::to_string(2 + g.h()));
    const auto gt = solve_direct_cavity(g, cav, make_flux(g, "strip"), {1e-12, 200000});
    double err = 0.0, scale = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
      const double y = g.node_y(n);
      if (y > 2 + 1e-12) {
        CHECK(gt.u0[n] == 0.0);
        continue;
      }
      const double exact = analytic_strip_solution(M_PI, 3.0, g.node_x(n), y);
      err = std::max(err, std::abs(gt.u0[n] - exact));
      scale = std::max(scale, std::abs(exact));
    }
    CHECK(err < 0.01 * scale);
  }

  TEST_CASE("disc cavity normalisations") {
    const Grid g = square(64);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.65,0.2"), make_flux(g, "dipole_y:1"));
    CHECK(std::abs(gamma_integral(g, gt.u0)) < 1e-12 * max_abs(gt.u0));
    const auto touched = nodes_of_cells(g, gt.retained);
    for (int n = 0; n < g.num_nodes(); ++n)
      if (!touched[n]) CHECK(gt.u0[n] == 0.0);
    CHECK_NOTHROW(gt.data.validate(g));
    CHECK(std::abs(gt.data.f.integral(g)) < 1e-12);
  }

  TEST_CASE("energy and max bounds across cavity shapes") {
    const Grid g = square(64);
    const auto f = make_flux(g, "cosine:1:1");
    std::vector<double> grad_ratio, max_ratio;
    for (const char* shape : {"none", "disc:0.5,0.5,0.2", "disc:0.5,0.65,0.2", "rect:0.3,0.3,0.7,0.45",
                              "polygon:0.3,0.3;0.7,0.3;0.5,0.7", "disc:0.35,0.35,0.12+disc:0.65,0.65,0.12"}) {
      const auto gt = solve_direct_cavity(g, CavityShape::parse(shape), f);
      CellField w(g.num_cells());
      for (int c = 0; c < g.num_cells(); ++c) w[c] = gt.retained[c];
      NodalField shifted = gt.u0;
      grad_ratio.push_back(energy_seminorm(g, gt.u0, w) / f.l2_norm(g));
      max_ratio.push_back(max_abs(shifted) / f.l2_norm(g));
    }
    for (std::size_t k = 1; k < grad_ratio.size(); ++k) {
      CHECK(grad_ratio[k] < 3 * grad_ratio[0]);
      CHECK(max_ratio[k] < 3 * max_ratio[0]);
    }
  }

  TEST_CASE("flux on a removed edge is rejected") {
    const Grid g = square(32);
    NeumannData f{std::vector<double>(g.boundary().size(), 0.0)};
    f.f[0] = 1.0;
    f.f[1] = -1.0;
    CHECK_THROWS_AS(solve_direct_cavity(g, CavityShape::parse("rect:-1,-1,0.1,0.1"), f), Error);
  }

  TEST_CASE("noise is exact in norm, mean-free and reproducible") {
    const Grid g = square(32);
    const auto gt = solve_direct_cavity(g, CavityShape::parse("disc:0.5,0.6,0.15"), make_flux(g, "dipole_y:1"));
    const auto a = add_noise(g, gt.data, 0.1, 1.0, 42);
    const auto b = add_noise(g, gt.data, 0.1, 1.0, 42);
    const auto c = add_noise(g, gt.data, 0.1, 1.0, 43);
    CHECK(a.f.f == b.f.f);
    CHECK(a.g == b.g);
    CHECK(a.g != c.g);
    NeumannData df{a.f.f};
    for (std::size_t k = 0; k < df.f.size(); ++k) df.f[k] -= gt.data.f.f[k];
    CHECK(df.l2_norm(g) == doctest::Approx(0.1).epsilon(1e-12));
    double ng = 0.0;
    const auto& e = g.boundary();
    for (std::size_t k = 0; k < e.size(); ++k)
      ng += g.gamma_weights()[e[k].node_a] * (a.g[k] - gt.data.g[k]) * (a.g[k] - gt.data.g[k]);
    CHECK(std::sqrt(ng) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_NOTHROW(a.validate(g));
    CHECK(a.epsilon == 0.1);
    CHECK(a.seed == 42u);

    const auto z = add_noise(g, gt.data, 0.1, 0.0, 42);
    CHECK(z.f.f == gt.data.f.f);
    CHECK(z.g == gt.data.g);
  }

  TEST_CASE("closed-form strip values") {
    for (double x : {0.0, 0.2, 0.7}) {
      const double f = std::sqrt(2.0) * std::cos(M_PI * x);
      CHECK(analytic_strip_solution(M_PI, 3.0, x, 2.0) ==
            doctest::Approx(f / (M_PI * std::sinh(2 * M_PI))).epsilon(1e-9).scale(1e-6));
    }
    for (double y : {0.0, 0.5, 1.7, 2.5}) CHECK(std::abs(analytic_strip_solution(M_PI, 3.0, 0.5, y)) < 1e-15);
    CHECK(analytic_strip_solution(M_PI, 3.0, 0.0, 0.0) == doctest::Approx(0.4501613).epsilon(1e-6));
    CHECK(analytic_strip_solution(M_PI, 3.0, 0.3, 2.5) == 0.0);
    CHECK_THROWS_AS(analytic_strip_solution(M_PI, 3.0, 0.3, 3.5), Error);
  }

  TEST_CASE("flux patterns are mean-free and supported on gamma~") {
    DomainSpec s;
    s.delta = 0.08;
    s.gamma_tilde = {{Side::Bottom, 0.0, 1.0}, {Side::Right, 0.0, 0.5}};
    const Grid g = build_grid(s, 32);
    for (const char* p : {"dipole_x:2", "dipole_y:3", "cosine:2:1", "strip"}) {
      const auto f = make_flux(g, p);
      CHECK_NOTHROW(f.validate(g));
      for (std::size_t k = 0; k < f.f.size(); ++k)
        if (!g.boundary()[k].in_gamma_tilde) CHECK(f.f[k] == 0.0);
    }
    CHECK_THROWS_AS(make_flux(g, "spiral"), Error);
  }

  TEST_CASE("restriction from a twice finer grid") {
    const Grid coarse = square(32), fine = square(64);
    const auto cav = CavityShape::parse("disc:0.5,0.6,0.2");
    const auto gf = solve_direct_cavity(fine, cav, make_flux(fine, "dipole_y:1"));
    const auto gc = solve_direct_cavity(coarse, cav, make_flux(coarse, "dipole_y:1"));
    const auto r = restrict_data(fine, gf.data, coarse);
    CHECK_NOTHROW(r.validate(coarse));
    CHECK(r.f.f == gc.data.f.f);  // piecewise constant flux restricts exactly
    double diff = 0.0;
    for (std::size_t k = 0; k < r.g.size(); ++k) diff = std::max(diff, std::abs(r.g[k] - gc.data.g[k]));
    CHECK(diff < 0.05 * max_abs(gc.data.g));
    const auto u = restrict_nodal(fine, gf.u0, coarse);
    for (int j = 0; j <= coarse.ny(); ++j)
      for (int i = 0; i <= coarse.nx(); ++i) CHECK(u[coarse.node(i, j)] == gf.u0[fine.node(2 * i, 2 * j)]);
    CHECK_THROWS_AS(restrict_data(square(48), gf.data, coarse), Error);
  }
}
