#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "phasecav/experiment.hpp"
#include "phasecav/io.hpp"

using namespace phasecav;
namespace fs = std::filesystem;

namespace {

// Applies `--section.key=value` / `--section.key value` leftovers.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const std::vector<std::string>& extras) {
  for (std::size_t k = 0; k < extras.size(); ++k) {
    std::string a = extras[k];
    if (a.rfind("--", 0) != 0) throw Error("config", "unexpected argument '" + a + "'");
    a = a.substr(2);
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      cfg.set(a.substr(0, eq), a.substr(eq + 1));
    } else {
      if (k + 1 >= extras.size()) throw Error("config", "missing value for --" + a);
      cfg.set(a, extras[++k]);
    }
  }
  return cfg;
}

void print_metrics(const ReconstructionResult& r) {
  std::printf("epsilon: %s\nhausdorff: %s\nsymmetric_difference_area: %s\nmisfit_raw: %s\nfield_error_l2: %s\n"
              "stop_reason: %s\n",
              format_double(r.epsilon).c_str(), format_double(r.hausdorff).c_str(), format_double(r.symdiff).c_str(),
              format_double(r.misfit).c_str(), format_double(r.field_error).c_str(), r.trace.stop_reason.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field reconstruction of insulating cavities from boundary data"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value configuration file");

  auto* gen = app.add_subcommand("generate", "ground truth and noisy data at run.epsilon");
  auto* rec = app.add_subcommand("reconstruct", "single reconstruction at run.epsilon");
  auto* sweep = app.add_subcommand("sweep", "reconstructions along sweep.epsilons with continuation");
  auto* grad = app.add_subcommand("gradcheck", "adjoint, sensitivity and finite-difference gradients");
  auto* met = app.add_subcommand("metrics", "recompute metrics from a run directory");
  int bases = 2, directions = 3;
  double fd_step = 1e-5;
  grad->add_option("--bases", bases, "random base points");
  grad->add_option("--directions", directions, "random directions per base point");
  grad->add_option("--step", fd_step, "central-difference step");
  std::string run_dir;
  met->add_option("run_dir", run_dir, "directory written by reconstruct or a sweep entry")->required();
  for (auto* sub : {gen, rec, sweep, grad, met}) sub->allow_extras();

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    ExperimentConfig cfg;
    if (active == met) cfg = load_config((fs::path(run_dir) / "config.txt").string());
    else if (!config_path.empty()) cfg = load_config(config_path);
    cfg = apply_overrides(cfg, active->remaining());
    cfg.validate();

    if (active == gen) {
      const Truth truth = generate_truth(cfg);
      const auto data = add_noise(truth.grid, truth.clean, cfg.epsilon, cfg.rho, cfg.seed);
      fs::create_directories(cfg.output_dir);
      auto p = [&](const char* n) { return (fs::path(cfg.output_dir) / n).string(); };
      write_text(p("config.txt"), cfg.serialize());
      write_data_csv(p("data.csv"), truth.grid, data);
      write_data_csv(p("data_clean.csv"), truth.grid, truth.clean);
      write_field(p("u0.txt"), truth.grid, truth.u0);
      write_mask(p("truth_mask.txt"), truth.grid, truth.retained);
      write_manifest(cfg.output_dir, {"config.txt", "data.csv", "data_clean.csv", "u0.txt", "truth_mask.txt"}, 0.0);
    } else if (active == rec) {
      print_metrics(run_reconstruction(cfg));
    } else if (active == sweep) {
      std::printf("epsilon,eta,a_eps,hausdorff,symmetric_difference_area,misfit_raw,field_error_l2,error\n");
      for (const auto& r : epsilon_sweep(cfg))
        std::printf("%s,%s,%s,%s,%s,%s,%s,%s\n", format_double(r.epsilon).c_str(), format_double(r.eta).c_str(),
                    format_double(r.a_eps).c_str(), format_double(r.hausdorff).c_str(),
                    format_double(r.symdiff).c_str(), format_double(r.misfit).c_str(),
                    format_double(r.field_error).c_str(), r.error.c_str());
    } else if (active == grad) {
      const auto rows = gradient_check(cfg, bases, directions, fd_step, cfg.seed);
      bool ok = true;
      std::printf("functional,base,direction,adjoint,sensitivity,finite_difference,fd_error,duality_error\n");
      for (const auto& r : rows) {
        std::printf("%s,%d,%d,%.12e,%.12e,%.12e,%.3e,%.3e\n", r.functional.c_str(), r.base, r.direction, r.adjoint,
                    r.sensitivity, r.finite_difference, r.fd_error, r.duality_error);
        ok = ok && r.fd_error <= 1e-3;
      }
      return ok ? 0 : 1;
    } else if (active == met) {
      const auto vt = read_field((fs::path(run_dir) / "vtilde.txt").string());
      const auto truth = mask_from_dump(read_field((fs::path(run_dir) / "truth_mask.txt").string()));
      const Grid grid = build_grid(cfg.domain, cfg.resolution);
      if (vt.kind != "node" || vt.nx != grid.nx() || vt.ny != grid.ny())
        throw Error("metrics", "field dump does not match the configured grid");
      const auto v = PhaseField::from_complement(vt.values).v;
      const auto mask = threshold_set(grid, v, cfg.threshold);
      std::printf("threshold: %s\nhausdorff: %s\nsymmetric_difference_area: %s\n",
                  format_double(cfg.threshold).c_str(), format_double(hausdorff_distance(grid, mask, truth)).c_str(),
                  format_double(symmetric_difference_area(grid, mask, truth)).c_str());
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [io]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
