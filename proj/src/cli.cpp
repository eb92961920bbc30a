#include "cascade/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cascade/io.hpp"
#include "cascade/svg.hpp"

namespace cascade::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<std::string, std::string>& preset_files() {
  static const std::map<std::string, std::string> files = {
      {"lebesgue", "lebesgue.json"},
      {"fig1a", "fig1a.json"}, {"fig1b", "fig1b.json"},
      {"fig1c", "fig1c.json"}, {"fig1d", "fig1d.json"},
      {"fig2", "fig2.json"},   {"fig3", "fig3.json"},
      {"fig4", "fig4.json"},   {"fig5", "fig5.json"},
      {"fig6", "fig6.json"},
      // example aliases (rendered figure numbering)
      {"ex41", "fig2.json"},   {"ex42", "fig3.json"},   {"ex43", "fig4.json"}};
  return files;
}

int effective_jobs(const RunConfig& cfg) {
  if (cfg.jobs > 0) return cfg.jobs;
  if (const char* env = std::getenv("CASCADE_SPECTRA_JOBS"))
    return std::max(0, std::atoi(env));
  return 0;
}

WeightModel load(const RunConfig& cfg) {
  if (!cfg.model_path.empty()) return io::load_model(cfg.model_path);
  if (!cfg.preset.empty())
    return io::load_model(preset_path(cfg.preset, cfg.presets_dir));
  throw ModelError("no model: pass --model FILE or --preset NAME");
}

void validate(const RunConfig& cfg) {
  if (cfg.q_min < 0) throw ModelError("q_min must be >= 0");
  if (cfg.q_steps < 8) throw ModelError("q_steps must be >= 8");
  if ((cfg.command == "simulate" || cfg.command == "pressure") && !cfg.has_seed)
    throw ModelError("--seed is mandatory for " + cfg.command);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

void write_manifest(const RunConfig& cfg, const WeightModel* model,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = cfg.command;
  if (!cfg.model_path.empty()) j["model_path"] = cfg.model_path;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  if (model) j["model"] = json::parse(io::model_json(*model));
  j["q_min"] = cfg.q_min;
  j["q_max"] = cfg.q_max;
  j["q_steps"] = cfg.q_steps;
  if (!cfg.depths.empty()) j["depths"] = cfg.depths;
  if (cfg.command == "simulate" || cfg.command == "pressure") {
    j["replicas"] = cfg.replicas;
    j["seed"] = cfg.seed;
  }
  j["jobs"] = effective_jobs(cfg);
  j["outputs"] = outputs;
  io::write_text(out_path(cfg, "manifest.json"), j.dump(2) + "\n");
}

svg::Series curve_series(const SpectrumCurve& c, const std::string& label,
                         const std::string& color, bool dashed = false) {
  svg::Series s;
  s.label = label;
  s.color = color;
  s.dashed = dashed;
  s.x = c.grid;
  s.y = c.values;
  return s;
}

void plot_curves(const RunConfig& cfg, const std::string& file,
                 const WeightModel& model, const CriticalExponents& ce,
                 const SpectrumCurve& t, const SpectrumCurve& tn,
                 const SpectrumCurve& tau) {
  auto short_num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return std::string(b);
  };
  std::vector<svg::Marker> marks;
  if (!std::isinf(ce.q_c)) marks.push_back({ce.q_c, "q_c=" + short_num(ce.q_c)});
  if (!std::isinf(ce.q_c_tilde) && ce.q_c_tilde != ce.q_c)
    marks.push_back({ce.q_c_tilde, "q~_c=" + short_num(ce.q_c_tilde)});
  std::string title = model.name;
  if (!std::isinf(ce.q_c)) title += "  (q_c ~ " + short_num(ce.q_c) + ")";
  svg::write_chart(out_path(cfg, file), title,
                   {curve_series(t, "T", "#2255cc", true),
                    curve_series(tn, "tau_nu", "#222222", true),
                    curve_series(tau, "tau", "#cc2222")},
                   marks);
}

void cmd_spectra(const RunConfig& cfg) {
  WeightModel model = load(cfg);
  auto ce = critical_exponents(model, std::max(cfg.q_max, 2.0));
  auto ct = base_curve_sampled(model, CurveKind::T, cfg.q_min, cfg.q_max, cfg.q_steps);
  auto cn = base_curve_sampled(model, CurveKind::TauNu, cfg.q_min, cfg.q_max, cfg.q_steps);
  auto tau_c = tau_curve(model, ce, cfg.q_min, cfg.q_max, cfg.q_steps);
  io::write_curve_csv(ct, out_path(cfg, "T.csv"));
  io::write_curve_csv(cn, out_path(cfg, "tau_nu.csv"));
  io::write_curve_csv(tau_c, out_path(cfg, "tau.csv"));

  // Legendre transform of tau, restricted to the identified window.
  SpectrumCurve window;
  window.kind = "tau";
  for (size_t k = 0; k < tau_c.grid.size(); ++k) {
    if (tau_c.branches[k] == Branch::Undefined) continue;
    if (!std::isfinite(tau_c.values[k])) continue;
    window.grid.push_back(tau_c.grid[k]);
    window.values.push_back(tau_c.values[k]);
  }
  double a_hi = ce.tau_prime_0 + 0.1;
  double a_lo = tau_branch_derivative(model, window.grid.back(),
                                      tau_c.branches[window.grid.size() - 1], ce) - 0.1;
  if (!(a_hi > a_lo)) a_hi = a_lo + 1;
  auto star = legendre(window, make_grid(a_lo, a_hi, cfg.q_steps));
  io::write_curve_csv(star, out_path(cfg, "tau_star.csv"));

  json scalars;
  scalars["exponents"] = json::parse(io::exponents_json(ce));
  try {
    scalars["dims"] = json::parse(io::dims_json(dims(model)));
  } catch (const SpectraError& e) {
    scalars["dims"] = {{"error", e.what()}};
  }
  scalars["tau_prime_1"] = tau_prime_1(model);
  io::write_text(out_path(cfg, "scalars.json"), scalars.dump(2) + "\n");

  if (cfg.plot) plot_curves(cfg, "spectra.svg", model, ce, ct, cn, tau_c);
  write_manifest(cfg, &model,
                 {"T.csv", "tau_nu.csv", "tau.csv", "tau_star.csv", "scalars.json"});
  std::cout << "q_c = " << io::fmt(ce.q_c) << ", q~_c = " << io::fmt(ce.q_c_tilde)
            << ", tau'(0+) = " << io::fmt(ce.tau_prime_0) << " (case "
            << (ce.tau_prime_0_case == 1 ? "i" : ce.tau_prime_0_case == 2 ? "ii" : "iii")
            << ")\n";
}

void cmd_transitions(const RunConfig& cfg) {
  WeightModel model = load(cfg);
  auto rep = classify_transitions(model, std::max(cfg.q_max, 2.0));
  io::write_text(out_path(cfg, "transitions.json"),
                 io::transition_report_json(rep) + "\n");
  write_manifest(cfg, &model, {"transitions.json"});
  std::cout << "model " << model.name << ": " << rep.crossings.list.size()
            << " crossing(s), " << rep.transitions.size() << " transition(s)\n";
  for (const auto& c : rep.crossings.list)
    std::cout << "  crossing at q = " << io::fmt(c.q)
              << (c.transversal ? " (transversal)" : " (tangential)") << "\n";
  for (const auto& t : rep.transitions)
    std::cout << "  " << (t.first_order ? "first-order" : "order >= 2")
              << " transition at q = " << io::fmt(t.q) << "  ["
              << branch_name(t.left) << " -> " << branch_name(t.right) << "]\n";
  for (const auto& s : rep.segments)
    std::cout << "  segment [" << io::fmt(s.lo) << ", " << io::fmt(s.hi) << "]  "
              << branch_name(s.label) << "\n";
}

void cmd_classify(const RunConfig& cfg) {
  WeightModel model = load(cfg);
  auto rep = classify_projection(model);
  io::write_text(out_path(cfg, "classification.json"),
                 io::classification_json(rep) + "\n");
  write_manifest(cfg, &model, {"classification.json"});
  std::cout << "model " << model.name << ": "
            << (rep.absolutely_continuous ? "absolutely continuous" : "singular")
            << (rep.at_boundary ? " (at boundary dim mu = dim nu)" : "") << "\n"
            << "  dim mu = " << io::fmt(rep.dims.dim_mu)
            << ", dim nu = " << io::fmt(rep.dims.dim_nu)
            << ", dim pi_mu = " << io::fmt(rep.dims.dim_pi_mu) << "\n"
            << "  dim conditional = " << io::fmt(rep.dims.dim_conditional)
            << ", dim pi(K) = " << io::fmt(rep.dims.dim_pi_K) << "\n";
  if (rep.density_ls.empty)
    std::cout << "  L^s density interval: empty\n";
  else
    std::cout << "  L^s density interval: (1, " << io::fmt(rep.density_ls.hi)
              << (rep.density_ls.hi_closed ? "]" : ")") << "\n";
  std::cout << "  equivalence conditions: " << witness_name(rep.equivalence);
  if (rep.equivalence == WitnessStatus::Verified)
    std::cout << " (witness c = " << io::fmt(rep.witness_c) << ")";
  std::cout << "\n  DGF maximizer unique: " << (rep.dgf_unique ? "yes" : "no")
            << "\n  degeneracy: all_Ti_zero=" << rep.degenerate.all_ti_zero
            << " property_P=" << rep.degenerate.property_p << "\n";
}

void cmd_simulate(const RunConfig& cfg) {
  WeightModel model = load(cfg);
  std::vector<int> depths = cfg.depths.empty() ? std::vector<int>{8, 9, 10, 11, 12, 13, 14}
                                               : cfg.depths;
  EmpiricalOptions opt;
  opt.replicas = cfg.replicas;
  opt.seed = cfg.seed;
  opt.jobs = effective_jobs(cfg);
  if (cfg.diff_estimator) opt.estimator = SlopeEstimator::SuccessiveDifference;
  auto grid = make_grid(cfg.q_min, cfg.q_max, cfg.q_steps);
  auto tau_hat = empirical_tau(model, depths, grid, opt);
  io::write_curve_csv(tau_hat, out_path(cfg, "tau_hat.csv"));
  std::vector<std::string> outputs = {"tau_hat.csv"};
  if (cfg.export_sample) {
    auto sample = sample_cascade(model, *std::min_element(depths.begin(), depths.end()),
                                 cfg.seed);
    io::write_sample_csv(sample, out_path(cfg, "sample.csv"));
    io::write_projected_csv(project(sample), out_path(cfg, "projected.csv"));
    outputs.push_back("sample.csv");
    outputs.push_back("projected.csv");
  }
  write_manifest(cfg, &model, outputs);
  std::cout << "tau_hat over " << depths.size() << " depths x " << cfg.replicas
            << " replicas written\n";
}

void cmd_pressure(const RunConfig& cfg) {
  WeightModel model = load(cfg);
  auto grid = make_grid(cfg.q_min, cfg.q_max, cfg.q_steps);
  SpectrumCurve analytic;
  analytic.model_id = model.name;
  analytic.kind = "pressure";
  analytic.grid = grid;
  for (double q : grid) analytic.values.push_back(pressure(model, q));
  io::write_curve_csv(analytic, out_path(cfg, "pressure.csv"));

  std::vector<int> depths = cfg.depths.empty() ? std::vector<int>{8, 9, 10, 11, 12, 13, 14}
                                               : cfg.depths;
  EmpiricalOptions opt;
  opt.replicas = cfg.replicas;
  opt.seed = cfg.seed;
  opt.jobs = effective_jobs(cfg);
  if (cfg.diff_estimator) opt.estimator = SlopeEstimator::SuccessiveDifference;
  auto hat = branching_pressure(model, depths, grid, opt);
  io::write_curve_csv(hat, out_path(cfg, "pressure_hat.csv"));
  write_manifest(cfg, &model, {"pressure.csv", "pressure_hat.csv"});
  std::cout << "pressure curves written (analytic + empirical)\n";
}

void cmd_enumerate(const RunConfig& cfg) {
  WeightModel model = load(cfg);
  double lm = std::log((double)model.m);
  json rows = json::array();
  auto ce = critical_exponents(model, 4.0);
  for (double q : cfg.q_list) {
    auto res = exact_enumeration(model, cfg.enum_depth, q);
    json r;
    r["q"] = q;
    r["n"] = cfg.enum_depth;
    r["E_2d"] = res.e_2d;
    r["E_proj"] = res.e_proj;
    r["m_pow_minus_nT"] = std::exp(-lm * cfg.enum_depth * T_of(model, q));
    if (q > 1) {
      r["lower_bound"] =
          std::max(std::exp(-lm * cfg.enum_depth * tau_nu(model, q)),
                   std::exp(-lm * cfg.enum_depth * T_of(model, q)));
    } else if (q > 0) {
      r["upper_bound"] = std::exp(-lm * cfg.enum_depth * tau(model, q, ce).value);
    }
    rows.push_back(r);
  }
  io::write_text(out_path(cfg, "enumerate.json"), rows.dump(2) + "\n");
  write_manifest(cfg, &model, {"enumerate.json"});
  std::cout << "exact enumeration at depth " << cfg.enum_depth << " written for "
            << cfg.q_list.size() << " q value(s)\n";
}

void cmd_figures(const RunConfig& cfg) {
  std::vector<std::string> names;
  if (!cfg.preset.empty() && cfg.preset != "all") names = {cfg.preset};
  else
    names = {"fig1a", "fig1b", "fig1c", "fig1d", "fig2", "fig3", "fig4", "fig5", "fig6"};
  std::vector<std::string> outputs;
  for (const auto& name : names) {
    WeightModel model = io::load_model(preset_path(name, cfg.presets_dir));
    double q_hi = cfg.q_max;
    auto ce = critical_exponents(model, std::max(8.0, q_hi));
    if (!std::isinf(ce.q_c_tilde)) q_hi = std::max(q_hi, ce.q_c_tilde + 0.5);
    auto ct = base_curve_sampled(model, CurveKind::T, 0, q_hi, cfg.q_steps);
    auto cn = base_curve_sampled(model, CurveKind::TauNu, 0, q_hi, cfg.q_steps);
    auto tau_c = tau_curve(model, ce, 0, q_hi, cfg.q_steps);
    RunConfig sub = cfg;
    io::write_curve_csv(tau_c, out_path(sub, name + "_tau.csv"));
    io::write_curve_csv(ct, out_path(sub, name + "_T.csv"));
    io::write_curve_csv(cn, out_path(sub, name + "_tau_nu.csv"));
    plot_curves(sub, name + ".svg", model, ce, ct, cn, tau_c);
    outputs.push_back(name + ".svg");
    outputs.push_back(name + "_tau.csv");
    std::cout << name << ": q_c = " << io::fmt(ce.q_c)
              << ", q~_c = " << io::fmt(ce.q_c_tilde) << "\n";
  }
  write_manifest(cfg, nullptr, outputs);
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : preset_files()) out.push_back(k);
  return out;
}

std::string preset_path(const std::string& name, const std::string& override_dir) {
  auto it = preset_files().find(name);
  if (it == preset_files().end())
    throw ModelError("unknown preset '" + name + "'");
  std::vector<std::string> dirs;
  if (!override_dir.empty()) dirs.push_back(override_dir);
  if (const char* env = std::getenv("CASCADE_SPECTRA_PRESETS")) dirs.push_back(env);
  dirs.push_back("presets");
  for (const auto& d : dirs) {
    fs::path p = fs::path(d) / it->second;
    if (fs::exists(p)) return p.string();
  }
  throw ModelError("preset file " + it->second +
                   " not found (searched --presets-dir, $CASCADE_SPECTRA_PRESETS, ./presets)");
}

std::vector<int> parse_depths(const std::string& spec) {
  std::vector<int> out;
  auto range = spec.find("..");
  if (range != std::string::npos) {
    int a = std::stoi(spec.substr(0, range));
    int b = std::stoi(spec.substr(range + 2));
    for (int d = a; d <= b; ++d) out.push_back(d);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

void run(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.command == "spectra") return cmd_spectra(cfg);
  if (cfg.command == "transitions") return cmd_transitions(cfg);
  if (cfg.command == "classify") return cmd_classify(cfg);
  if (cfg.command == "simulate") return cmd_simulate(cfg);
  if (cfg.command == "pressure") return cmd_pressure(cfg);
  if (cfg.command == "enumerate") return cmd_enumerate(cfg);
  if (cfg.command == "figures") return cmd_figures(cfg);
  throw ModelError("unknown command '" + cfg.command + "'");
}

} // namespace cascade::cli
