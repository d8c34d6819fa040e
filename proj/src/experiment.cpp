#include "phasecav/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include "phasecav/io.hpp"

namespace phasecav {

namespace fs = std::filesystem;

Truth generate_truth(const ExperimentConfig& cfg) {
  cfg.validate();
  Grid grid = build_grid(cfg.domain, cfg.resolution);
  validate_cavity(grid, cfg.cavity);
  if (cfg.refine == 1) {
    auto gt = solve_direct_cavity(grid, cfg.cavity, make_flux(grid, cfg.flux), cfg.solver);
    return Truth{grid, gt.data, gt.u0, gt.retained};
  }
  const Grid fine = build_grid(cfg.domain, cfg.resolution * cfg.refine);
  auto gt = solve_direct_cavity(fine, cfg.cavity, make_flux(fine, cfg.flux), cfg.solver);
  Truth t{grid, restrict_data(fine, gt.data, grid), restrict_nodal(fine, gt.u0, grid), {}};
  t.retained = rasterize_cavity(grid, cfg.cavity);
  return t;
}

ReconstructionResult reconstruct(const ExperimentConfig& cfg, const Truth& truth, double eps,
                                 const NodalField& init) {
  const auto start = std::chrono::steady_clock::now();
  const Grid& grid = truth.grid;
  ReconstructionResult r;
  r.epsilon = eps;
  r.eta = cfg.schedule.eta(eps);
  r.a_eps = cfg.schedule.band(eps);
  r.data = add_noise(grid, truth.clean, eps, cfg.rho, cfg.seed);
  const Problem pb(grid, r.data, cfg.params(eps), cfg.potentials(), cfg.solver);

  if (cfg.functional == FunctionalKind::F) {
    auto res = minimize_F2_alternating(pb, init, cfg.optimizer);
    r.vtilde = std::move(res.vtilde);
    r.u_pair = std::move(res.u);
    r.trace = std::move(res.trace);
    const State st = state_solve(pb, r.vtilde);
    r.u = st.u;
    r.final_terms = eval_F_q(pb, r.u_pair, r.vtilde, &st);
  } else {
    auto res = minimize_reduced(pb, cfg.functional, init, cfg.optimizer);
    r.vtilde = std::move(res.vtilde);
    r.u = std::move(res.u);
    r.trace = std::move(res.trace);
    r.final_terms = r.trace.rows.back().terms;
  }

  const auto v = PhaseField::from_complement(r.vtilde).v;
  r.mask = threshold_set(grid, v, cfg.threshold);
  r.hausdorff = hausdorff_distance(grid, r.mask, truth.retained);
  r.symdiff = symmetric_difference_area(grid, r.mask, truth.retained);
  r.misfit = raw_misfit(pb, r.u);
  const auto& m = grid.node_mass();
  double e = 0.0;
  for (int n = 0; n < grid.num_nodes(); ++n) {
    const double d = psi_eta(pb.potentials, pb.params.o_eta, v[n]) * r.u[n] - truth.u0[n];
    e += m[n] * d * d;
  }
  r.field_error = std::sqrt(e);
  r.band = check_H_a(grid, v, r.a_eps, truth.retained, cfg.c1, cfg.c2);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_manifest(const std::string& dir, const std::vector<std::string>& files, double seconds) {
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::vector<std::pair<std::string, std::string>> kv{{"timestamp", stamp}, {"wall_seconds", format_double(seconds)}};
  for (const auto& f : files) kv.emplace_back("file", f);
  write_key_values((fs::path(dir) / "manifest.txt").string(), kv);
}

void write_run(const std::string& dir, const ExperimentConfig& cfg, const Truth& truth,
               const ReconstructionResult& r) {
  fs::create_directories(dir);
  const Grid& grid = truth.grid;
  auto p = [&](const char* name) { return (fs::path(dir) / name).string(); };
  write_text(p("config.txt"), cfg.serialize());
  write_data_csv(p("data.csv"), grid, r.data);
  write_trace_csv(p("trace.csv"), r.trace);
  write_field(p("vtilde.txt"), grid, r.vtilde);
  write_field(p("u.txt"), grid, r.u);
  write_mask(p("mask.txt"), grid, r.mask);
  write_mask(p("truth_mask.txt"), grid, truth.retained);
  const auto v = PhaseField::from_complement(r.vtilde).v;
  write_pgm(p("v.pgm"), grid.nx() + 1, grid.ny() + 1, v, 0.0, 1.0);
  std::vector<std::string> files{"config.txt", "data.csv", "trace.csv", "vtilde.txt", "u.txt",
                                 "mask.txt",   "truth_mask.txt", "v.pgm", "metrics.txt"};
  if (!r.u_pair.empty()) {
    write_field(p("u_pair.txt"), grid, r.u_pair);
    files.push_back("u_pair.txt");
  }
  write_key_values(p("metrics.txt"),
                   {{"epsilon", format_double(r.epsilon)},
                    {"eta", format_double(r.eta)},
                    {"a_eps", format_double(r.a_eps)},
                    {"hausdorff", format_double(r.hausdorff)},
                    {"symmetric_difference_area", format_double(r.symdiff)},
                    {"misfit_raw", format_double(r.misfit)},
                    {"field_error_l2", format_double(r.field_error)},
                    {"total", format_double(r.final_terms.total)},
                    {"iterations", std::to_string(r.trace.rows.empty() ? 0 : r.trace.rows.back().iteration)},
                    {"converged", r.trace.converged ? "true" : "false"},
                    {"line_search_failed", r.trace.line_search_failed ? "true" : "false"},
                    {"stop_reason", r.trace.stop_reason},
                    {"band_pass", r.band.pass ? "true" : "false"},
                    {"band_low_violations", std::to_string(r.band.low_violations)},
                    {"band_high_violations", std::to_string(r.band.high_violations)}});
  write_manifest(dir, files, r.seconds);
}

ReconstructionResult run_reconstruction(const ExperimentConfig& cfg) {
  const Truth truth = generate_truth(cfg);
  auto r = reconstruct(cfg, truth, cfg.epsilon, initial_field(truth.grid, cfg.optimizer));
  write_run(cfg.output_dir, cfg, truth, r);
  return r;
}

std::vector<SweepRow> epsilon_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  for (std::size_t k = 1; k < cfg.epsilons.size(); ++k)
    if (!(cfg.epsilons[k] < cfg.epsilons[k - 1])) throw Error("config", "sweep.epsilons must be strictly decreasing");
  const auto start = std::chrono::steady_clock::now();
  const Truth truth = generate_truth(cfg);
  fs::create_directories(cfg.output_dir);
  write_text((fs::path(cfg.output_dir) / "config.txt").string(), cfg.serialize());

  std::vector<SweepRow> rows;
  NodalField init = initial_field(truth.grid, cfg.optimizer);
  std::vector<std::string> files{"config.txt", "sweep.csv"};
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    SweepRow row;
    row.epsilon = cfg.epsilons[k];
    row.eta = cfg.schedule.eta(row.epsilon);
    row.a_eps = cfg.schedule.band(row.epsilon);
    try {
      const auto r = reconstruct(cfg, truth, row.epsilon, init);
      const std::string sub = "eps_" + std::to_string(k);
      write_run((fs::path(cfg.output_dir) / sub).string(), cfg, truth, r);
      files.push_back(sub + "/");
      row.hausdorff = r.hausdorff;
      row.symdiff = r.symdiff;
      row.misfit = r.misfit;
      row.field_error = r.field_error;
      row.total = r.final_terms.total;
      row.iterations = r.trace.rows.empty() ? 0 : r.trace.rows.back().iteration;
      row.converged = r.trace.converged;
      init = r.vtilde;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }

  std::ofstream out(fs::path(cfg.output_dir) / "sweep.csv");
  if (!out) throw Error("io", "cannot write sweep.csv");
  out << "epsilon,eta,a_eps,hausdorff,symmetric_difference_area,misfit_raw,field_error_l2,total,iterations,converged,"
         "error\n";
  for (const auto& r : rows)
    out << format_double(r.epsilon) << ',' << format_double(r.eta) << ',' << format_double(r.a_eps) << ','
        << format_double(r.hausdorff) << ',' << format_double(r.symdiff) << ',' << format_double(r.misfit) << ','
        << format_double(r.field_error) << ',' << format_double(r.total) << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << ',' << '"' << r.error << '"' << '\n';
  out.close();
  write_manifest(cfg.output_dir,
                 files, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return rows;
}

}  // namespace phasecav

namespace phasecav {

namespace {

NodalField bumps(const Grid& grid, std::mt19937_64& rng, int count, bool signed_amplitude) {
  std::uniform_real_distribution<double> ux(0.0, grid.width()), uy(0.0, grid.height()), ur(0.08, 0.25),
      ua(signed_amplitude ? -1.0 : 0.3, 1.0);
  NodalField f(grid.num_nodes(), 0.0);
  for (int b = 0; b < count; ++b) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng), a = ua(rng);
    for (int n = 0; n < grid.num_nodes(); ++n) {
      const double dx = grid.node_x(n) - cx, dy = grid.node_y(n) - cy;
      f[n] += a * std::exp(-(dx * dx + dy * dy) / (r * r));
    }
  }
  return f;
}

}  // namespace

NodalField random_admissible_field(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return project_admissible(grid, bumps(grid, rng, 4, false));
}

NodalField random_direction(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto d = bumps(grid, rng, 5, true);
  const auto& band = grid.band_tilde_nodes();
  for (int n = 0; n < grid.num_nodes(); ++n)
    if (band[n]) d[n] = 0.0;
  return d;
}

std::vector<GradcheckRow> gradient_check(const ExperimentConfig& cfg, int bases, int directions, double t,
                                         std::uint64_t seed) {
  const Truth truth = generate_truth(cfg);
  const Grid& grid = truth.grid;
  const auto data = add_noise(grid, truth.clean, cfg.epsilon, cfg.rho, cfg.seed);
  const double crack_b = cfg.b >= 0 ? cfg.b : 1.0;
  auto params = [&](double b, double q) {
    return FunctionalParams::from_schedule(cfg.epsilon, cfg.schedule, cfg.a1, cfg.a2, b, cfg.q_tilde,
                                           cfg.beta_tilde, q);
  };
  const Problem pg(grid, data, params(cfg.b_value(), 2.0), cfg.potentials(), cfg.solver);
  const Problem ph2(grid, data, params(crack_b, 2.0), cfg.potentials(), cfg.solver);
  const Problem ph3(grid, data, params(crack_b, 3.0), cfg.potentials(), cfg.solver);

  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  auto axpy = [](const NodalField& x, double s, const NodalField& d) {
    NodalField y(x);
    for (std::size_t n = 0; n < y.size(); ++n) y[n] += s * d[n];
    return y;
  };

  std::vector<GradcheckRow> rows;
  for (int b = 0; b < bases; ++b) {
    const auto x = random_admissible_field(grid, seed + 1000 * b);
    struct Reduced {
      const char* name;
      const Problem* pb;
      FunctionalKind kind;
    };
    for (const Reduced& rf : {Reduced{"G", &pg, FunctionalKind::G}, Reduced{"hatF2", &ph2, FunctionalKind::HatF},
                              Reduced{"hatF3", &ph3, FunctionalKind::HatF}}) {
      const State st = state_solve(*rf.pb, x);
      const auto g = full_gradient(*rf.pb, rf.kind, x, &st);
      for (int k = 0; k < directions; ++k) {
        const auto d = random_direction(grid, seed + 1000 * b + k + 1);
        GradcheckRow row{rf.name, b, k};
        row.adjoint = g.pair(grid, d);
        row.sensitivity = rf.kind == FunctionalKind::G ? directional_dG(*rf.pb, x, d, &st)
                                                       : directional_dHatF(*rf.pb, x, d, &st);
        row.finite_difference = (evaluate(*rf.pb, rf.kind, axpy(x, t, d)).total -
                                 evaluate(*rf.pb, rf.kind, axpy(x, -t, d)).total) /
                                (2 * t);
        row.fd_error = rel(row.finite_difference, row.sensitivity);
        row.duality_error = rel(row.adjoint, row.sensitivity);
        rows.push_back(row);
      }
    }

    // Two-variable functional: u is the state perturbed by a mean-free bump.
    const State st = state_solve(ph2, x);
    auto u = axpy(st.u, 0.1, random_direction(grid, seed + 1000 * b + 777));
    normalize_gamma_mean(grid, u);
    const auto gu = partial_u_F(ph2, u, st);
    const auto gv = partial_v_F(ph2, u, x, st);
    const NodalField zero(grid.num_nodes(), 0.0);
    for (int k = 0; k < directions; ++k) {
      auto du = random_direction(grid, seed + 1000 * b + 500 + k);
      normalize_gamma_mean(grid, du);
      const auto d = random_direction(grid, seed + 1000 * b + k + 1);

      GradcheckRow ru{"F2_u", b, k};
      double s = 0.0;
      for (int n = 0; n < grid.num_nodes(); ++n) s += gu[n] * du[n];
      ru.adjoint = s;
      ru.sensitivity = directional_dF(ph2, u, x, du, zero, &st);
      ru.finite_difference =
          (eval_F_q(ph2, axpy(u, t, du), x, &st).total - eval_F_q(ph2, axpy(u, -t, du), x, &st).total) / (2 * t);
      ru.fd_error = rel(ru.finite_difference, ru.sensitivity);
      ru.duality_error = rel(ru.adjoint, ru.sensitivity);
      rows.push_back(ru);

      GradcheckRow rv{"F2_v", b, k};
      rv.adjoint = gv.pair(grid, d);
      rv.sensitivity = directional_dF(ph2, u, x, zero, d, &st);
      rv.finite_difference = (eval_F_q(ph2, u, axpy(x, t, d)).total - eval_F_q(ph2, u, axpy(x, -t, d)).total) / (2 * t);
      rv.fd_error = rel(rv.finite_difference, rv.sensitivity);
      rv.duality_error = rel(rv.adjoint, rv.sensitivity);
      rows.push_back(rv);
    }
  }
  return rows;
}

}  // namespace phasecav
