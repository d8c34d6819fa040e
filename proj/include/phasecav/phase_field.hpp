#pragma once

#include <string>

#include "phasecav/elliptic.hpp"
#include "phasecav/geometry.hpp"

namespace phasecav {

enum class PsiKind { Smoothstep, Power };

/// Double well W, single well V and coefficient profile psi, with their
/// derivatives. Outside [0,1] each function is continued by a C1 quadratic
/// over one unit of length and then held constant, so values and derivatives
/// are bounded and continuous on the whole real line.
class Potentials {
 public:
  explicit Potentials(PsiKind kind = PsiKind::Smoothstep, double gamma = 2.0);

  double W(double t) const;   // 9 t^2 (t-1)^2 on [0,1]
  double dW(double t) const;
  double V(double t) const;   // (t-1)^2 / 4 on [0,1]
  double dV(double t) const;
  double psi(double t) const;  // -2t^3 + 3t^2, or t^gamma
  double dpsi(double t) const;

  /// int_0^1 sqrt(W) and int_0^1 sqrt(V), by composite Simpson quadrature.
  double c_W() const { return c_W_; }
  double c_V() const { return c_V_; }
  /// Upper bound A of psi over the real line.
  double psi_sup() const;

  PsiKind psi_kind() const { return kind_; }
  double gamma() const { return gamma_; }

 private:
  PsiKind kind_;
  double gamma_;
  double c_W_, c_V_;
};

/// eta(eps) = eta_scale * eps^eta_power, o_eta = eta^o_power,
/// a_eps = a_factor * eta(eps).
struct EtaSchedule {
  double eta_scale = 1.0;
  double eta_power = 1.0;
  double o_power = 2.0;
  double a_factor = 2.0;

  double eta(double eps) const;
  double offset(double eta) const;
  double band(double eps) const;
  /// Throws unless o_eta <= 1/2 and a_eps >= 2 eta(eps).
  void validate(double eps) const;
};

/// Nodal phase field v in [0,1]; the optimisation variable is 1 - v.
struct PhaseField {
  NodalField v;

  static PhaseField from_complement(const NodalField& vtilde);
  NodalField complement() const;
};

/// psi_eta(t) = (1 - o) psi(t) + o and its derivative.
inline double psi_eta(const Potentials& p, double o, double t) { return (1 - o) * p.psi(t) + o; }
inline double dpsi_eta(const Potentials& p, double o, double t) { return (1 - o) * p.dpsi(t); }

/// Cell averages of a nodal field.
CellField cell_average(const Grid& grid, const NodalField& v);

/// Cell weights psi_eta(cell average of v); floor o/2, cap A + 1/2.
WeightField psi_eta(const Grid& grid, const NodalField& v, double o_eta, const Potentials& pot);

struct ModicaMortola {
  double well = 0.0;       // (1/eta) int W(v)
  double dirichlet = 0.0;  // eta int |grad v|^2
  double total() const { return well + dirichlet; }
};

/// Well term by lumped nodal quadrature, Dirichlet term integrated exactly.
ModicaMortola modica_mortola(const Grid& grid, const NodalField& v, double eta, const Potentials& pot);

/// int |grad v|^2 with exact Q1 element integrals.
double dirichlet_energy(const Grid& grid, const NodalField& v);

/// h times the number of interior cell faces across which the mask changes
/// (the l1 / face-count total variation).
double discrete_perimeter(const Grid& grid, const CellMask& mask);

/// Clamps vtilde to [0,1] and zeroes it on the outer band. `changed` counts
/// the nodes whose value was modified.
NodalField project_admissible(const Grid& grid, NodalField vtilde, int* changed = nullptr);
bool is_admissible(const Grid& grid, const NodalField& vtilde);

struct BandReport {
  bool pass = true;
  int low_violations = 0;   // v < c2 at distance > a from the cavity
  int high_violations = 0;  // v > c1 at distance > a from G_K
};

/// A posteriori membership test of v in H(a) for one candidate cavity, given
/// as its retained cell mask.
BandReport check_H_a(const Grid& grid, const NodalField& v, double a, const CellMask& retained, double c1,
                     double c2);

/// Phase field equal to 1 deep in G_K and 0 deep in the cavity, with a
/// smoothstep transition of total width `width` centred on the interface.
NodalField smoothed_indicator(const Grid& grid, const CellMask& retained, double width);

}  // namespace phasecav
