#pragma once

#include <cstdint>
#include <vector>

#include "cascade/model.hpp"
#include "cascade/spectra.hpp"

namespace cascade {

class SimulateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One realized depth-n cascade: sparse cylinder masses Q(u,v) on the
// m^n x m^n grid, canonically ordered by (u,v). Deterministic in
// (model, depth, seed).
struct CascadeSample {
  int depth = 0;
  int m = 2;
  std::uint64_t seed = 0;
  std::string model_id;
  bool survived = false;
  std::vector<std::uint64_t> u;  // base-m path index of the row word
  std::vector<std::uint64_t> v;  // base-m path index of the column word
  std::vector<double> mass;      // positive masses only
};

struct ProjectedMasses {
  int depth = 0;
  int m = 2;
  bool survived = false;
  std::vector<double> pi;            // length m^depth, row sums
  std::vector<std::int64_t> counts;  // N(u) = #{v : Q(u,v) > 0}
};

// Serial reference sampler and the OpenMP subtree sampler; both produce the
// same canonical sample bit for bit (per-node counter streams make subtree
// order irrelevant).
CascadeSample sample_cascade(const WeightModel& model, int depth, std::uint64_t seed);
CascadeSample sample_cascade_parallel(const WeightModel& model, int depth,
                                      std::uint64_t seed, int jobs = 0);

ProjectedMasses project(const CascadeSample& sample);

// The weight matrix the samplers draw at the node with the given key
// (row-major m x m). Exposed for path-product verification.
std::vector<double> draw_weight_matrix(const WeightModel& model,
                                       std::uint64_t node_key);

// S_n(q) = sum_{pi>0} pi^q per grid point (0^0 excluded by the indicator).
std::vector<double> partition_sums(const ProjectedMasses& pm,
                                   const std::vector<double>& q_grid);
std::vector<double> partition_sums_parallel(const ProjectedMasses& pm,
                                            const std::vector<double>& q_grid,
                                            int jobs = 0);

// Streaming sampler: projected masses and counts of the same realization at
// every requested depth, without materializing the 2-D tree. Lognormal
// models are routed to a vectorized batch kernel.
std::vector<ProjectedMasses> sample_projected_levels(const WeightModel& model,
                                                     const std::vector<int>& depths,
                                                     std::uint64_t seed,
                                                     int jobs = 0);

enum class SlopeEstimator { LeastSquares, SuccessiveDifference };

struct EmpiricalOptions {
  int replicas = 50;
  std::uint64_t seed = 0;
  int jobs = 0;
  SlopeEstimator estimator = SlopeEstimator::LeastSquares;
};

// Moment estimator of the projected L^q spectrum: least-squares slope of
// -log_m(mean over replicas of S_n(q)) against n, conditioned on survival at
// the deepest requested level by resampling. Standard errors from the spread
// of single-replica slopes.
SpectrumCurve empirical_tau(const WeightModel& model, const std::vector<int>& depths,
                            const std::vector<double>& q_grid,
                            const EmpiricalOptions& opt);

// Quenched estimator of the fiber-count pressure: slope (natural log) of the
// replica average of log sum_{N(u)>=1} N(u)^q against n.
SpectrumCurve branching_pressure(const WeightModel& model, const std::vector<int>& depths,
                                 const std::vector<double>& q_grid,
                                 const EmpiricalOptions& opt);

// Both estimators from one replica sweep (same samples, same seeds).
struct EmpiricalCurves {
  SpectrumCurve tau_hat;
  SpectrumCurve pressure_hat;
};
EmpiricalCurves empirical_curves(const WeightModel& model,
                                 const std::vector<int>& depths,
                                 const std::vector<double>& tau_q_grid,
                                 const std::vector<double>& pressure_q_grid,
                                 const EmpiricalOptions& opt);

struct CoarseSpectrum {
  std::vector<double> edges;    // bins+1 edges over the occupied alpha range
  std::vector<long> counts;
  std::vector<double> spectrum; // log_m(count)/n per occupied bin
};
// Histogram of coarse Holder exponents alpha(u) = log pi(u) / (-n log m).
CoarseSpectrum coarse_spectrum(const ProjectedMasses& pm, int bins);

struct EnumerationResult {
  double e_2d = 0;    // E[sum_{u,v} mu_n([u,v])^q]
  double e_proj = 0;  // E[sum_u pi_mu_n([u])^q]
};
// Exact probability-weighted expectations for finite discrete/branching
// models, by depth recursion over independent subtrees (2-D) and exact fiber
// distributions (projection). Guarded by an enumeration budget.
EnumerationResult exact_enumeration(const WeightModel& model, int depth, double q);

struct EnvMartingale {
  std::vector<int> environment;      // the sampled letters x_1..x_n
  std::vector<double> trajectory;    // X~_1 .. X~_n
  double criterion = 0;              // sum env_i T_i'(1-)
  bool uniformly_integrable = false; // criterion > 0
};
// Mandelbrot martingale in the Bernoulli environment env_p_prime: fixes a
// letter word x, then runs X~_n(x) = sum_v prod_k V_{x_k, v_k}.
EnvMartingale env_martingale(const WeightModel& model,
                             const std::vector<double>& env_p_prime, int depth,
                             std::uint64_t env_seed, std::uint64_t seed);

} // namespace cascade
