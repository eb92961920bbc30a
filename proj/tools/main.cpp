#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cascade/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"analytic and Monte Carlo spectra of planar multiplicative cascades"};
  app.require_subcommand(1);

  cascade::cli::RunConfig cfg;
  std::string depths_spec;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model description JSON");
    sub->add_option("--preset", cfg.preset, "built-in preset name");
    sub->add_option("--presets-dir", cfg.presets_dir, "preset search directory");
    sub->add_option("--q-min", cfg.q_min, "grid start (>= 0)");
    sub->add_option("--q-max", cfg.q_max, "grid end");
    sub->add_option("--q-steps", cfg.q_steps, "grid points (>= 8)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--jobs", cfg.jobs, "worker threads (env CASCADE_SPECTRA_JOBS)");
    sub->add_flag("--plot", cfg.plot, "emit SVG plots");
  };
  auto add_mc = [&](CLI::App* sub) {
    sub->add_option("--depths", depths_spec, "depth list, e.g. 8..14 or 8,10,12");
    sub->add_option("--replicas", cfg.replicas, "Monte Carlo replicas");
    sub->add_option("--seed", seed, "RNG seed (mandatory)")->required();
    sub->add_flag("--diff-estimator", cfg.diff_estimator,
                  "successive-difference slope instead of least squares");
  };

  add_common(app.add_subcommand("spectra", "analytic curves T, tau_nu, tau and scalars"));
  add_common(app.add_subcommand("transitions", "crossings, phase transitions, segments"));
  add_common(app.add_subcommand("classify", "absolute continuity / dimension verdicts"));
  auto* sim = app.add_subcommand("simulate", "Monte Carlo empirical L^q spectrum");
  add_common(sim);
  add_mc(sim);
  sim->add_flag("--export-sample", cfg.export_sample,
                "also export one cascade sample at the smallest depth");
  auto* prs = app.add_subcommand("pressure", "analytic and empirical fiber-count pressure");
  add_common(prs);
  add_mc(prs);
  auto* enu = app.add_subcommand("enumerate", "exact finite-depth enumeration oracle");
  add_common(enu);
  enu->add_option("--depth", cfg.enum_depth, "enumeration depth (small)");
  enu->add_option("--q", cfg.q_list, "q values");
  add_common(app.add_subcommand("figures", "regenerate the preset figure curves"));

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  cfg.has_seed = sim->parsed() || prs->parsed();
  cfg.seed = seed;
  if (cfg.has_seed) {
    // coarser Monte Carlo grid defaults
    if (sub->get_option("--q-steps")->count() == 0) cfg.q_steps = 9;
    if (sub->get_option("--q-max")->count() == 0) cfg.q_max = 2.0;
  }
  if (!depths_spec.empty()) {
    try {
      cfg.depths = cascade::cli::parse_depths(depths_spec);
    } catch (const std::exception&) {
      std::cerr << R"({"error":"bad --depths spec"})" << "\n";
      return 1;
    }
  }

  try {
    cascade::cli::run(cfg);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    err["command"] = cfg.command;
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
