#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phasecav/functionals.hpp"
#include "phasecav/optimizer.hpp"

namespace phasecav {

struct ExperimentConfig {
  DomainSpec domain = default_domain();
  CavityShape cavity = CavityShape::parse("disc:0.5,0.65,0.2");
  int resolution = 128;
  int refine = 2;  // data grid refinement factor (1 or 2)
  std::string flux = "dipole_y:30";
  double rho = 1.0;
  std::uint64_t seed = 1;

  EtaSchedule schedule;
  FunctionalKind functional = FunctionalKind::G;
  double a1 = 1.0, a2 = 1.0;
  double b = -1.0;  // negative: 0 for G, 1 for the crack functionals
  double q_tilde = 0.5, beta_tilde = 0.5, q = 2.0;
  double c1 = 0.4, c2 = 0.6;
  PsiKind psi = PsiKind::Smoothstep;
  double psi_gamma = 2.0;

  OptimizerConfig optimizer = default_optimizer();
  SolverOptions solver;

  std::vector<double> epsilons = {0.1, 0.05, 0.02, 0.01};
  double epsilon = 0.02;  // single runs
  double threshold = 0.5;
  std::string output_dir = "out";

  static DomainSpec default_domain();
  static OptimizerConfig default_optimizer();

  /// Rejects c outside (c1,c2), noise levels outside (0,1], schedules with
  /// a_eps < 2 eta or o_eta > 1/2, and coefficient sets that violate the
  /// functional's constraints.
  void validate() const;

  double b_value() const;
  FunctionalParams params(double eps) const;
  Potentials potentials() const;

  /// Sets one dotted key; throws on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Canonical key=value listing of every setting, one per line.
  std::string serialize() const;
};

/// Parses `key = value` lines; '#' starts a comment. Later keys win.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// `all`, or comma-separated `side` / `side:from:to` items.
std::vector<BoundaryInterval> parse_intervals(const std::string& text);
std::string format_intervals(const std::vector<BoundaryInterval>& intervals);

/// Shortest round-trip formatting of a double.
std::string format_double(double x);

}  // namespace phasecav
