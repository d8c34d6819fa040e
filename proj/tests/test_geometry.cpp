#include <doctest.h>

#include <cmath>
#include <random>

#include "phasecav/geometry.hpp"

using namespace phasecav;

namespace {

DomainSpec unit_square(double delta = 0.1) {
  DomainSpec s;
  s.delta = delta;
  return s;
}

int count(const CellMask& m) {
  int n = 0;
  for (auto x : m) n += x != 0;
  return n;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("unit square at resolution 64") {
    const Grid g = build_grid(unit_square(0.1), 64);
    CHECK(g.nx() == 64);
    CHECK(g.ny() == 64);
    CHECK(g.h() == doctest::Approx(1.0 / 64));
    for (int n = 0; n < g.num_nodes(); ++n) {
      const double x = g.node_x(n), y = g.node_y(n);
      const double d = std::min(std::min(x, 1 - x), std::min(y, 1 - y));
      CHECK(bool(g.band_tilde_nodes()[n]) == (d < 0.075 - 1e-12));
    }
  }

  TEST_CASE("whole boundary is tagged gamma and gamma~") {
    const Grid g = build_grid(unit_square(), 16);
    CHECK(g.boundary().size() == 64u);
    for (const auto& e : g.boundary()) {
      CHECK(e.in_gamma);
      CHECK(e.in_gamma_tilde);
    }
    CHECK(g.gamma_length() == doctest::Approx(4.0));
  }

  TEST_CASE("aspect ratio bookkeeping") {
    DomainSpec s = unit_square();
    s.height = 2.0;
    const Grid g = build_grid(s, 32);
    CHECK(g.nx() == 32);
    CHECK(g.ny() == 64);
    CHECK(g.nx() * g.h() == doctest::Approx(s.width).epsilon(1e-15));
    CHECK(g.ny() * g.h() == doctest::Approx(s.height).epsilon(1e-15));
  }

  TEST_CASE("boundary loop is counter-clockwise and closed") {
    const Grid g = build_grid(unit_square(), 16);
    const auto& e = g.boundary();
    CHECK(e.front().node_a == g.node(0, 0));
    for (std::size_t k = 0; k < e.size(); ++k) CHECK(e[k].node_b == e[(k + 1) % e.size()].node_a);
    for (const auto& edge : e) {
      const auto nrm = g.outward_normal(edge.side);
      const double mx = 0.5 * (g.node_x(edge.node_a) + g.node_x(edge.node_b));
      const double my = 0.5 * (g.node_y(edge.node_a) + g.node_y(edge.node_b));
      // Stepping outward leaves the square.
      const double px = mx + 0.1 * nrm[0], py = my + 0.1 * nrm[1];
      CHECK((px < 0 || px > 1 || py < 0 || py > 1));
    }
  }

  TEST_CASE("inner band is contained in the outer band") {
    const Grid g = build_grid(unit_square(0.2), 40);
    for (int n = 0; n < g.num_nodes(); ++n)
      if (g.band_nodes()[n]) CHECK(g.band_tilde_nodes()[n]);
  }

  TEST_CASE("partial gamma segments") {
    DomainSpec s = unit_square();
    s.gamma = {{Side::Bottom, 0.0, 0.5}};
    s.gamma_tilde = {{Side::Top, 0.0, 1.0}, {Side::Left, 0.0, 1.0}};
    const Grid g = build_grid(s, 16);
    double lg = 0.0;
    for (double w : g.gamma_weights()) lg += w;
    CHECK(lg == doctest::Approx(0.5));
    for (const auto& e : g.boundary()) {
      CHECK(e.in_gamma == (e.side == Side::Bottom && e.t_mid < 0.5));
      CHECK(e.in_gamma_tilde == (e.side == Side::Top || e.side == Side::Left));
    }
  }

  TEST_CASE("resolutions that empty a segment or the band are rejected") {
    DomainSpec s = unit_square();
    s.gamma = {{Side::Bottom, 0.40, 0.45}};
    CHECK_THROWS_AS(build_grid(s, 4), Error);
    CHECK_THROWS_AS(build_grid(unit_square(0.1), 4), Error);  // band narrower than a cell
    DomainSpec bad = unit_square(0.9);
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("disc rasterisation area") {
    // Pixel-count oracle at a much finer resolution.
    const auto cav = CavityShape::parse("disc:0.5,0.65,0.2");
    const int fine = 2048;
    long inside = 0;
    for (int j = 0; j < fine; ++j)
      for (int i = 0; i < fine; ++i) {
        const double x = (i + 0.5) / fine - 0.5, y = (j + 0.5) / fine - 0.65;
        inside += x * x + y * y < 0.04;
      }
    const double area_oracle = 1.0 - double(inside) / (double(fine) * fine);
    CHECK(area_oracle == doctest::Approx(1 - M_PI * 0.04).epsilon(1e-3));
    for (int res : {32, 64, 128}) {
      const Grid g = build_grid(unit_square(0.08), res);
      const double area = count(rasterize_cavity(g, cav)) * g.h() * g.h();
      // One cell layer along the circumference.
      CHECK(std::abs(area - area_oracle) <= 2 * M_PI * 0.2 * g.h());
    }
  }

  TEST_CASE("area converges under refinement") {
    const auto cav = CavityShape::parse("disc:0.5,0.5,0.23");
    double prev = -1;
    for (int res : {32, 64, 128, 256}) {
      const Grid g = build_grid(unit_square(0.08), res);
      const double area = count(rasterize_cavity(g, cav)) * g.h() * g.h();
      if (prev >= 0) CHECK(std::abs(area - prev) <= 2 * M_PI * 0.23 * 2 * g.h());
      prev = area;
    }
  }

  TEST_CASE("empty cavity keeps the whole domain") {
    const Grid g = build_grid(unit_square(), 16);
    const auto m = rasterize_cavity(g, CavityShape::parse("none"));
    CHECK(count(m) == g.num_cells());
  }

  TEST_CASE("enclosed pocket is not reachable") {
    const Grid g = build_grid(unit_square(0.08), 64);
    const auto m = rasterize_cavity(g, CavityShape::parse("ring:0.5,0.5,0.1,0.2"));
    for (int c = 0; c < g.num_cells(); ++c) {
      const double dx = g.cell_cx(c) - 0.5, dy = g.cell_cy(c) - 0.5;
      const double r = std::sqrt(dx * dx + dy * dy);
      if (std::abs(r - 0.2) < 1e-9 || std::abs(r - 0.1) < 1e-9) continue;
      CHECK(bool(m[c]) == (r > 0.2));
    }
  }

  TEST_CASE("retained region is one 4-connected component containing the gamma~ cells") {
    const Grid g = build_grid(unit_square(0.08), 48);
    const auto cav = CavityShape::parse("rect:0.3,0.3,0.7,0.5+disc:0.4,0.7,0.1+polygon:0.6,0.6;0.8,0.6;0.7,0.8");
    const auto m = rasterize_cavity(g, cav);
    for (const auto& e : g.boundary()) CHECK(m[e.cell]);
    // Flood fill from one cell reaches every retained cell.
    std::vector<int> stack{0};
    CellMask seen(m.size(), 0);
    seen[0] = 1;
    int reached = 0;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      ++reached;
      const int i = c % g.nx(), j = c / g.nx();
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= g.nx() || q[1] >= g.ny()) continue;
        const int d = g.cell(q[0], q[1]);
        if (m[d] && !seen[d]) {
          seen[d] = 1;
          stack.push_back(d);
        }
      }
    }
    CHECK(reached == count(m));
  }

  TEST_CASE("standoff violation is reported") {
    const Grid g = build_grid(unit_square(0.08), 64);
    CHECK_NOTHROW(validate_cavity(g, CavityShape::parse("disc:0.5,0.65,0.2")));
    CHECK_THROWS_AS(validate_cavity(g, CavityShape::parse("disc:0.5,0.8,0.15")), Error);
  }

  TEST_CASE("cavity covering gamma~ is rejected") {
    const Grid g = build_grid(unit_square(0.08), 32);
    CHECK_THROWS_AS(rasterize_cavity(g, CavityShape::parse("rect:-1,-1,2,2")), Error);
  }

  TEST_CASE("shape serialisation round trip") {
    std::mt19937_64 rng(3);
    CellMask px(12 * 10);
    for (auto& x : px) x = rng() % 3 == 0;
    CavityShape s({Disc{0.5, 0.6, 0.2}, Ring{0.5, 0.5, 0.1, 0.2}, Rect{0.2, 0.3, 0.4, 0.5},
                   Polygon{{{0.1, 0.1}, {0.3, 0.1}, {0.2, 0.4}}}, PixelMask{12, 10, 1.0, 1.0, px}});
    const auto text = s.serialize();
    const auto back = CavityShape::parse(text);
    CHECK(back.serialize() == text);
    for (int k = 0; k < 500; ++k) {
      const double x = (rng() % 10000) / 10000.0, y = (rng() % 10000) / 10000.0;
      CHECK(back.contains(x, y) == s.contains(x, y));
    }
    CHECK(rle_decode(rle_encode(px), px.size()) == px);
    CHECK_THROWS_AS(CavityShape::parse("blob:1,2"), Error);
  }
}
