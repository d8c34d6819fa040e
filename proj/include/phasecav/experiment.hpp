#pragma once

#include <string>
#include <vector>

#include "phasecav/config.hpp"
#include "phasecav/metrics.hpp"

namespace phasecav {

/// Ground truth on the inversion grid. With refine = 2 the direct problem is
/// solved on the twice finer grid and restricted.
struct Truth {
  Grid grid;
  CauchyData clean;
  NodalField u0;
  CellMask retained;
};

Truth generate_truth(const ExperimentConfig& cfg);

struct ReconstructionResult {
  double epsilon = 0.0, eta = 0.0, a_eps = 0.0;
  CauchyData data;       // noisy data used
  NodalField vtilde;     // final phase-field complement
  NodalField u;          // state u~ at vtilde
  NodalField u_pair;     // u of the two-variable functional (empty otherwise)
  CellMask mask;         // {v > c}
  double hausdorff = 0.0;
  double symdiff = 0.0;
  double misfit = 0.0;       // raw gamma misfit of u~
  double field_error = 0.0;  // L2 norm of psi_eta(v) u~ - u0
  FunctionalBreakdown final_terms;
  BandReport band;
  RunTrace trace;
  double seconds = 0.0;
};

/// Adds noise at level eps, minimises from `init` and evaluates the metrics.
/// No files are written.
ReconstructionResult reconstruct(const ExperimentConfig& cfg, const Truth& truth, double eps, const NodalField& init);

/// Writes config, data, trace, field dumps, metrics and manifest into `dir`.
void write_run(const std::string& dir, const ExperimentConfig& cfg, const Truth& truth,
               const ReconstructionResult& r);

/// Truth, one reconstruction at cfg.epsilon, artifacts in cfg.output_dir.
ReconstructionResult run_reconstruction(const ExperimentConfig& cfg);

struct SweepRow {
  double epsilon = 0.0, eta = 0.0, a_eps = 0.0;
  double hausdorff = 0.0, symdiff = 0.0, misfit = 0.0, field_error = 0.0, total = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string error;  // non-empty when the run failed
};

/// Reconstructions along the strictly decreasing eps list, each warm-started
/// from the previous minimiser. Run k goes to <output_dir>/eps_<k>; the table
/// goes to <output_dir>/sweep.csv. A failing run is recorded and skipped.
std::vector<SweepRow> epsilon_sweep(const ExperimentConfig& cfg);

/// Smooth random admissible vtilde (a few Gaussian bumps, clamped, zero on
/// the outer band) and a random direction vanishing on the band.
NodalField random_admissible_field(const Grid& grid, std::uint64_t seed);
NodalField random_direction(const Grid& grid, std::uint64_t seed);

struct GradcheckRow {
  std::string functional;
  int base = 0, direction = 0;
  double adjoint = 0.0, sensitivity = 0.0, finite_difference = 0.0;
  double fd_error = 0.0, duality_error = 0.0;  // relative
};

/// Adjoint pairing, sensitivity form and central differences (step t) at
/// random base points, for G, hatF with q = 2 and 3, and both partials of F.
std::vector<GradcheckRow> gradient_check(const ExperimentConfig& cfg, int bases, int directions, double t,
                                         std::uint64_t seed);

/// Writes the manifest with a timestamp line and the listed files.
void write_manifest(const std::string& dir, const std::vector<std::string>& files, double seconds);

}  // namespace phasecav
