#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cascade::cli {

struct RunConfig {
  std::string command;  // spectra|transitions|classify|simulate|pressure|enumerate|figures
  std::string model_path;
  std::string preset;
  double q_min = 0;
  double q_max = 4;
  int q_steps = 129;
  std::vector<int> depths;   // simulate/pressure
  int replicas = 50;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool plot = false;
  int jobs = 0;              // 0: CASCADE_SPECTRA_JOBS env, else OpenMP default
  int enum_depth = 2;
  std::vector<double> q_list = {0.5, 1.0, 1.5, 2.0, 3.0};
  bool export_sample = false;
  bool diff_estimator = false;  // successive-difference slope instead of least squares
  std::string presets_dir;   // optional search-path override
};

// Executes one command, writing artifacts into cfg.out_dir. Throws on error;
// the binary wraps this and emits machine-readable error JSON.
void run(const RunConfig& cfg);

std::vector<std::string> preset_names();
std::string preset_path(const std::string& name, const std::string& override_dir);

std::vector<int> parse_depths(const std::string& spec);  // "8..14" or "8,10,12"

} // namespace cascade::cli
