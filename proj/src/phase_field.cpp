#include "phasecav/phase_field.hpp"

#include <algorithm>
#include <cmath>

#include "phasecav/metrics.hpp"
#include "phasecav/q1.hpp"

namespace phasecav {

namespace {

// C1 continuation of f outside [0,1]: quadratic decay of the slope over one
// unit of length, constant beyond.
template <class F, class DF>
double extend(double t, F f, DF df) {
  if (t < 0) {
    const double s = std::max(t, -1.0);
    return f(0.0) + df(0.0) * (s + 0.5 * s * s);
  }
  if (t > 1) {
    const double s = std::min(t - 1.0, 1.0);
    return f(1.0) + df(1.0) * (s - 0.5 * s * s);
  }
  return f(t);
}

template <class DF>
double extend_slope(double t, DF df) {
  if (t < 0) return t < -1 ? 0.0 : df(0.0) * (1 + t);
  if (t > 1) return t > 2 ? 0.0 : df(1.0) * (1 - (t - 1));
  return df(t);
}

template <class F>
double simpson(F f, int n = 2000) {
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3;
}

}  // namespace

Potentials::Potentials(PsiKind kind, double gamma) : kind_(kind), gamma_(gamma) {
  if (kind == PsiKind::Power && !(gamma > 0)) throw Error("phase_field", "psi exponent must be positive");
  c_W_ = simpson([this](double t) { return std::sqrt(W(t)); });
  c_V_ = simpson([this](double t) { return std::sqrt(V(t)); });
}

double Potentials::W(double t) const {
  return extend(t, [](double x) { return 9 * x * x * (x - 1) * (x - 1); },
                [](double x) { return 18 * x * (x - 1) * (2 * x - 1); });
}
double Potentials::dW(double t) const {
  return extend_slope(t, [](double x) { return 18 * x * (x - 1) * (2 * x - 1); });
}
double Potentials::V(double t) const {
  return extend(t, [](double x) { return 0.25 * (x - 1) * (x - 1); }, [](double x) { return 0.5 * (x - 1); });
}
double Potentials::dV(double t) const {
  return extend_slope(t, [](double x) { return 0.5 * (x - 1); });
}

double Potentials::psi(double t) const {
  if (kind_ == PsiKind::Smoothstep)
    return extend(t, [](double x) { return -2 * x * x * x + 3 * x * x; }, [](double x) { return 6 * x * (1 - x); });
  if (t <= 0) return 0.0;
  const double g = gamma_;
  return extend(t, [g](double x) { return std::pow(x, g); },
                [g](double x) { return x > 0 ? g * std::pow(x, g - 1) : 0.0; });
}

double Potentials::dpsi(double t) const {
  if (kind_ == PsiKind::Smoothstep) return extend_slope(t, [](double x) { return 6 * x * (1 - x); });
  if (t <= 0) return 0.0;
  const double g = gamma_;
  return extend_slope(t, [g](double x) { return x > 0 ? g * std::pow(x, g - 1) : 0.0; });
}

double Potentials::psi_sup() const { return kind_ == PsiKind::Smoothstep ? 1.0 : 1.0 + 0.5 * gamma_; }

double EtaSchedule::eta(double eps) const { return eta_scale * std::pow(eps, eta_power); }
double EtaSchedule::offset(double eta) const { return std::pow(eta, o_power); }
double EtaSchedule::band(double eps) const { return a_factor * eta(eps); }

void EtaSchedule::validate(double eps) const {
  if (!(eps > 0 && eps <= 1)) throw Error("phase_field", "noise level must lie in (0,1]");
  const double e = eta(eps);
  if (!(e > 0)) throw Error("phase_field", "eta must be positive");
  const double o = offset(e);
  if (!(o > 0 && o <= 0.5)) throw Error("phase_field", "offset o_eta must lie in (0, 1/2]");
  if (band(eps) < 2 * e * (1 - 1e-12)) throw Error("phase_field", "a_eps must be at least 2 eta(eps)");
}

PhaseField PhaseField::from_complement(const NodalField& vtilde) {
  PhaseField p{NodalField(vtilde.size())};
  for (std::size_t k = 0; k < vtilde.size(); ++k) p.v[k] = 1.0 - vtilde[k];
  return p;
}

NodalField PhaseField::complement() const {
  NodalField out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = 1.0 - v[k];
  return out;
}

CellField cell_average(const Grid& grid, const NodalField& v) {
  CellField out(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) {
    double s = 0.0;
    for (int n : grid.cell_nodes(c)) s += v[n];
    out[c] = 0.25 * s;
  }
  return out;
}

WeightField psi_eta(const Grid& grid, const NodalField& v, double o_eta, const Potentials& pot) {
  WeightField w;
  w.w = cell_average(grid, v);
  for (auto& x : w.w) x = psi_eta(pot, o_eta, x);
  w.floor = 0.5 * o_eta;
  w.cap = pot.psi_sup() + 0.5;
  return w;
}

double dirichlet_energy(const Grid& grid, const NodalField& v) {
  double s = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nd = grid.cell_nodes(c);
    const std::array<double, 4> vl{v[nd[0]], v[nd[1]], v[nd[2]], v[nd[3]]};
    s += q1::energy(vl, vl);
  }
  return s;
}

ModicaMortola modica_mortola(const Grid& grid, const NodalField& v, double eta, const Potentials& pot) {
  ModicaMortola mm;
  const auto& m = grid.node_mass();
  double well = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) well += m[n] * pot.W(v[n]);
  mm.well = well / eta;
  mm.dirichlet = eta * dirichlet_energy(grid, v);
  return mm;
}

double discrete_perimeter(const Grid& grid, const CellMask& mask) {
  std::size_t faces = 0;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const bool a = mask[grid.cell(i, j)] != 0;
      if (i + 1 < grid.nx() && a != (mask[grid.cell(i + 1, j)] != 0)) ++faces;
      if (j + 1 < grid.ny() && a != (mask[grid.cell(i, j + 1)] != 0)) ++faces;
    }
  return static_cast<double>(faces) * grid.h();
}

NodalField project_admissible(const Grid& grid, NodalField vtilde, int* changed) {
  const auto& band = grid.band_tilde_nodes();
  int count = 0;
  for (std::size_t n = 0; n < vtilde.size(); ++n) {
    const double before = vtilde[n];
    double x = band[n] ? 0.0 : std::clamp(before, 0.0, 1.0);
    if (x != before) ++count;
    vtilde[n] = x;
  }
  if (changed) *changed = count;
  return vtilde;
}

bool is_admissible(const Grid& grid, const NodalField& vtilde) {
  const auto& band = grid.band_tilde_nodes();
  for (std::size_t n = 0; n < vtilde.size(); ++n) {
    if (!(vtilde[n] >= 0.0 && vtilde[n] <= 1.0)) return false;
    if (band[n] && vtilde[n] != 0.0) return false;
  }
  return true;
}

BandReport check_H_a(const Grid& grid, const NodalField& v, double a, const CellMask& retained, double c1,
                     double c2) {
  CellMask cavity(retained.size());
  for (std::size_t c = 0; c < retained.size(); ++c) cavity[c] = !retained[c];
  const auto d_cavity = node_distance_to_cells(grid, cavity);
  const auto d_retained = node_distance_to_cells(grid, retained);
  BandReport r;
  for (int n = 0; n < grid.num_nodes(); ++n) {
    if (d_cavity[n] > a && v[n] < c2) ++r.low_violations;
    if (d_retained[n] > a && v[n] > c1) ++r.high_violations;
  }
  r.pass = r.low_violations == 0 && r.high_violations == 0;
  return r;
}

NodalField smoothed_indicator(const Grid& grid, const CellMask& retained, double width) {
  CellMask cavity(retained.size());
  for (std::size_t c = 0; c < retained.size(); ++c) cavity[c] = !retained[c];
  const auto d_cavity = node_distance_to_cells(grid, cavity);
  const auto d_retained = node_distance_to_cells(grid, retained);
  NodalField v(grid.num_nodes());
  for (int n = 0; n < grid.num_nodes(); ++n) {
    double s = 0.0;  // signed distance, positive inside G_K
    if (std::isinf(d_cavity[n]))
      s = width;
    else
      s = d_cavity[n] > 0 ? d_cavity[n] : -d_retained[n];
    const double x = std::clamp((s + 0.5 * width) / width, 0.0, 1.0);
    v[n] = x * x * (3 - 2 * x);
  }
  return v;
}

}  // namespace phasecav
