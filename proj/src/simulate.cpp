#include "cascade/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cascade/constants.hpp"
#include "cascade/rng.hpp"

namespace cascade {

namespace detail {
// Vectorized batch kernel for i.i.d.-lognormal models (simulate_lognormal.cpp).
void lognormal_projected(int m, double beta, const std::vector<int>& depths,
                         std::uint64_t seed, int jobs,
                         std::vector<std::vector<double>>& pi_out);
}

namespace {

int max_jobs(int jobs) {
#ifdef _OPENMP
  return jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
  return 1;
#endif
}

// Draws one weight matrix per node with a pinned variate order:
// Discrete: one uniform (atom pick). Branching: one uniform per active row,
// ascending. Lognormal: m^2 gaussians, row-major.
class WeightDrawer {
 public:
  explicit WeightDrawer(const WeightModel& md) : md_(md) {
    if (md.family == Family::Discrete) {
      double acc = 0;
      for (const auto& a : md.atoms) cdf_.push_back(acc += a.prob);
    } else if (md.family == Family::Branching) {
      off_cdf_.resize(md.m);
      for (int i = 0; i < md.m; ++i) {
        double acc = 0;
        for (double p : md.offspring.empty() ? std::vector<double>{} : md.offspring[i])
          off_cdf_[i].push_back(acc += p);
      }
    }
  }

  void draw(rng::Stream& st, double* w) const {
    const int m = md_.m;
    switch (md_.family) {
      case Family::Discrete: {
        double x = st.next_unit();
        size_t k = 0;
        while (k + 1 < cdf_.size() && x > cdf_[k]) ++k;
        std::copy(md_.atoms[k].w.begin(), md_.atoms[k].w.end(), w);
        return;
      }
      case Family::Lognormal: {
        double c = -0.5 * md_.beta * md_.beta - 2.0 * std::log((double)m);
        for (int k = 0; k < m * m; ++k)
          w[k] = std::exp(md_.beta * st.next_gaussian() + c);
        return;
      }
      case Family::Branching: {
        std::fill(w, w + m * m, 0.0);
        for (int i = 0; i < m; ++i) {
          if (!md_.active(i)) continue;
          double x = st.next_unit();
          int n = 0;
          while (n < m && x > off_cdf_[i][n]) ++n;
          double val = md_.marg.p[i] / md_.row_mean(i);
          for (int j = 0; j < n; ++j) w[i * m + j] = val;
        }
        return;
      }
    }
  }

 private:
  const WeightModel& md_;
  std::vector<double> cdf_;
  std::vector<std::vector<double>> off_cdf_;
};

struct Cell {
  std::uint64_t key;
  std::uint64_t u, v;
  double mass;
};

void expand_level(const WeightModel& md, const WeightDrawer& drawer,
                  const std::vector<Cell>& in, std::vector<Cell>& out) {
  const int m = md.m;
  std::vector<double> w(m * m);
  out.clear();
  for (const Cell& c : in) {
    rng::Stream st(c.key);
    drawer.draw(st, w.data());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double wt = w[i * m + j];
        if (wt > 0)
          out.push_back({rng::child_key(c.key, (std::uint64_t)(i * m + j)),
                         c.u * m + i, c.v * m + j, c.mass * wt});
      }
  }
}

void check_budget(size_t live, bool* warned) {
  if ((long)live > tol::live_node_limit)
    throw SimulateError("live-node budget exceeded (" + std::to_string(live) + ")");
  if ((long)live > tol::live_node_warn && !*warned) {
    std::fprintf(stderr, "[cascade] warning: %zu live nodes\n", live);
    *warned = true;
  }
}

void canonical_sort(CascadeSample& s) {
  std::vector<size_t> idx(s.mass.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return s.u[a] != s.u[b] ? s.u[a] < s.u[b] : s.v[a] < s.v[b];
  });
  CascadeSample t = s;
  for (size_t k = 0; k < idx.size(); ++k) {
    s.u[k] = t.u[idx[k]];
    s.v[k] = t.v[idx[k]];
    s.mass[k] = t.mass[idx[k]];
  }
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t k = 0; k < x.size(); ++k) { mx += x[k]; my += y[k]; }
  mx /= x.size(); my /= y.size();
  double num = 0, den = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    num += (x[k] - mx) * (y[k] - my);
    den += (x[k] - mx) * (x[k] - mx);
  }
  return num / den;
}

}  // namespace

CascadeSample sample_cascade(const WeightModel& model, int depth, std::uint64_t seed) {
  if (depth < 1) throw SimulateError("depth must be >= 1");
  WeightDrawer drawer(model);
  CascadeSample s;
  s.depth = depth;
  s.m = model.m;
  s.seed = seed;
  s.model_id = model.name;

  std::vector<Cell> cur{{rng::root_key(seed), 0, 0, 1.0}}, next;
  bool warned = false;
  for (int level = 0; level < depth && !cur.empty(); ++level) {
    expand_level(model, drawer, cur, next);
    cur.swap(next);
    check_budget(cur.size(), &warned);
  }
  s.survived = !cur.empty();
  for (const Cell& c : cur) {
    s.u.push_back(c.u);
    s.v.push_back(c.v);
    s.mass.push_back(c.mass);
  }
  canonical_sort(s);
  return s;
}

CascadeSample sample_cascade_parallel(const WeightModel& model, int depth,
                                      std::uint64_t seed, int jobs) {
  if (depth < 1) throw SimulateError("depth must be >= 1");
  WeightDrawer drawer(model);
  const int split = std::min(depth, 3);

  std::vector<Cell> top{{rng::root_key(seed), 0, 0, 1.0}}, next;
  for (int level = 0; level < split; ++level) {
    expand_level(model, drawer, top, next);
    top.swap(next);
  }

  std::vector<std::vector<Cell>> parts(top.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(max_jobs(jobs))
#endif
  for (long t = 0; t < (long)top.size(); ++t) {
    std::vector<Cell> cur{top[t]}, nx;
    for (int level = split; level < depth && !cur.empty(); ++level) {
      expand_level(model, drawer, cur, nx);
      cur.swap(nx);
    }
    parts[t] = std::move(cur);
  }

  CascadeSample s;
  s.depth = depth;
  s.m = model.m;
  s.seed = seed;
  s.model_id = model.name;
  size_t total = 0;
  for (auto& p : parts) total += p.size();
  bool warned = false;
  check_budget(total, &warned);
  s.survived = total > 0;
  for (auto& p : parts)
    for (const Cell& c : p) {
      s.u.push_back(c.u);
      s.v.push_back(c.v);
      s.mass.push_back(c.mass);
    }
  canonical_sort(s);
  return s;
}

std::vector<double> draw_weight_matrix(const WeightModel& model, std::uint64_t node_key) {
  WeightDrawer drawer(model);
  std::vector<double> w(model.m * model.m);
  rng::Stream st(node_key);
  drawer.draw(st, w.data());
  return w;
}

ProjectedMasses project(const CascadeSample& sample) {
  if (sample.depth > 26)
    throw SimulateError("projection vector too large (depth > 26)");
  ProjectedMasses pm;
  pm.depth = sample.depth;
  pm.m = sample.m;
  pm.survived = sample.survived;
  size_t n = 1;
  for (int k = 0; k < sample.depth; ++k) n *= sample.m;
  pm.pi.assign(n, 0.0);
  pm.counts.assign(n, 0);
  // Ascending (u,v) accumulation order; samples are canonically sorted.
  for (size_t k = 0; k < sample.mass.size(); ++k) {
    pm.pi[sample.u[k]] += sample.mass[k];
    pm.counts[sample.u[k]] += 1;
  }
  return pm;
}

std::vector<double> partition_sums(const ProjectedMasses& pm,
                                   const std::vector<double>& q_grid) {
  std::vector<double> out(q_grid.size(), 0.0);
  for (size_t qi = 0; qi < q_grid.size(); ++qi) {
    double s = 0;
    for (double x : pm.pi)
      if (x > 0) s += std::pow(x, q_grid[qi]);
    out[qi] = s;
  }
  return out;
}

std::vector<double> partition_sums_parallel(const ProjectedMasses& pm,
                                            const std::vector<double>& q_grid,
                                            int jobs) {
  std::vector<double> out(q_grid.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(max_jobs(jobs))
#endif
  for (long qi = 0; qi < (long)q_grid.size(); ++qi) {
    // Fixed ascending accumulation per q point: identical to the serial sums.
    double s = 0;
    for (double x : pm.pi)
      if (x > 0) s += std::pow(x, q_grid[qi]);
    out[qi] = s;
  }
  return out;
}

std::vector<ProjectedMasses> sample_projected_levels(const WeightModel& model,
                                                     const std::vector<int>& depths,
                                                     std::uint64_t seed, int jobs) {
  if (depths.empty()) throw SimulateError("no depths requested");
  std::vector<int> ds = depths;
  std::sort(ds.begin(), ds.end());
  if (ds.front() < 1) throw SimulateError("depth must be >= 1");
  const int nmax = ds.back();
  if (nmax * std::log((double)model.m) > 26 * std::log(2.0))
    throw SimulateError("projection vector too large");

  std::vector<ProjectedMasses> out(ds.size());
  for (size_t k = 0; k < ds.size(); ++k) {
    out[k].depth = ds[k];
    out[k].m = model.m;
    size_t n = 1;
    for (int t = 0; t < ds[k]; ++t) n *= model.m;
    out[k].pi.assign(n, 0.0);
    out[k].counts.assign(n, 0);
  }

  if (model.family == Family::Lognormal) {
    std::vector<std::vector<double>> pis;
    detail::lognormal_projected(model.m, model.beta, ds, seed, jobs, pis);
    for (size_t k = 0; k < ds.size(); ++k) {
      out[k].pi = std::move(pis[k]);
      // Every weight of the batch kernel is exp(...) > 0, so all m^n columns
      // over u are occupied.
      std::int64_t full = 1;
      for (int t = 0; t < ds[k]; ++t) full *= model.m;
      std::fill(out[k].counts.begin(), out[k].counts.end(), full);
      out[k].survived = true;
    }
    return out;
  }

  WeightDrawer drawer(model);
  std::vector<Cell> cur{{rng::root_key(seed), 0, 0, 1.0}}, next;
  bool warned = false;
  size_t level_idx = 0;
  for (int level = 1; level <= nmax; ++level) {
    if (cur.empty()) break;
    expand_level(model, drawer, cur, next);
    cur.swap(next);
    check_budget(cur.size(), &warned);
    while (level_idx < ds.size() && ds[level_idx] == level) {
      auto& pm = out[level_idx];
      for (const Cell& c : cur) {
        pm.pi[c.u] += c.mass;
        pm.counts[c.u] += 1;
      }
      pm.survived = !cur.empty();
      ++level_idx;
    }
  }
  return out;
}

namespace {

struct ReplicaStats {
  std::vector<std::vector<double>> S;     // [depth][tau q]
  std::vector<std::vector<double>> logC;  // [depth][pressure q], natural log
  bool ok = false;
};

ReplicaStats run_replica(const WeightModel& model, const std::vector<int>& depths,
                         const std::vector<double>& tau_grid,
                         const std::vector<double>& pressure_grid,
                         std::uint64_t seed, int replica) {
  ReplicaStats rs;
  for (int attempt = 0; attempt < tol::survival_attempts; ++attempt) {
    auto levels =
        sample_projected_levels(model, depths, rng::replica_key(seed, replica, attempt), 1);
    if (!levels.back().survived) continue;  // condition on survival by resampling
    rs.S.resize(levels.size());
    rs.logC.resize(levels.size());
    for (size_t d = 0; d < levels.size(); ++d) {
      rs.S[d] = partition_sums(levels[d], tau_grid);
      rs.logC[d].resize(pressure_grid.size());
      for (size_t qi = 0; qi < pressure_grid.size(); ++qi) {
        double c = 0;
        for (auto n : levels[d].counts)
          if (n >= 1) c += std::pow((double)n, pressure_grid[qi]);
        rs.logC[d][qi] = std::log(c);
      }
    }
    rs.ok = true;
    return rs;
  }
  return rs;
}

std::vector<ReplicaStats> run_replicas(const WeightModel& model,
                                       const std::vector<int>& depths,
                                       const std::vector<double>& tau_grid,
                                       const std::vector<double>& pressure_grid,
                                       const EmpiricalOptions& opt) {
  std::vector<int> ds = depths;
  std::sort(ds.begin(), ds.end());
  if (ds.size() < 3) throw SimulateError("need >= 3 depths for a slope");
  std::vector<ReplicaStats> stats(opt.replicas);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(max_jobs(opt.jobs))
#endif
  for (int r = 0; r < opt.replicas; ++r)
    stats[r] = run_replica(model, ds, tau_grid, pressure_grid, opt.seed, r);
  for (const auto& rs : stats)
    if (!rs.ok) throw SimulateError("replica extinct after resampling cap");
  return stats;
}

double slope_of(const std::vector<double>& ns, const std::vector<double>& ys,
                SlopeEstimator est) {
  if (est == SlopeEstimator::LeastSquares) return ls_slope(ns, ys);
  return (ys.back() - ys.front()) / (ns.back() - ns.front());
}

void spread_stderr(SpectrumCurve& c, const std::vector<std::vector<double>>& slopes) {
  // slopes[qi][r]: single-replica slope estimates
  c.stderrs.resize(c.grid.size());
  for (size_t qi = 0; qi < c.grid.size(); ++qi) {
    const auto& sl = slopes[qi];
    double mu = std::accumulate(sl.begin(), sl.end(), 0.0) / sl.size();
    double var = 0;
    for (double s : sl) var += (s - mu) * (s - mu);
    c.stderrs[qi] = sl.size() > 1 ? std::sqrt(var / (sl.size() - 1) / sl.size()) : 0.0;
  }
}

}  // namespace

EmpiricalCurves empirical_curves(const WeightModel& model,
                                 const std::vector<int>& depths,
                                 const std::vector<double>& tau_q_grid,
                                 const std::vector<double>& pressure_q_grid,
                                 const EmpiricalOptions& opt) {
  std::vector<int> ds = depths;
  std::sort(ds.begin(), ds.end());
  auto stats = run_replicas(model, ds, tau_q_grid, pressure_q_grid, opt);
  const double lm = std::log((double)model.m);
  std::vector<double> ns(ds.begin(), ds.end());

  EmpiricalCurves out;
  out.tau_hat.model_id = out.pressure_hat.model_id = model.name;
  out.tau_hat.kind = "tau_hat";
  out.pressure_hat.kind = "pressure_hat";
  out.tau_hat.grid = tau_q_grid;
  out.pressure_hat.grid = pressure_q_grid;
  out.tau_hat.values.resize(tau_q_grid.size());
  out.pressure_hat.values.resize(pressure_q_grid.size());

  std::vector<std::vector<double>> tau_slopes(tau_q_grid.size()),
      p_slopes(pressure_q_grid.size());
  std::vector<double> y(ds.size()), yr(ds.size());
  for (size_t qi = 0; qi < tau_q_grid.size(); ++qi) {
    for (size_t d = 0; d < ds.size(); ++d) {
      double mean = 0;
      for (const auto& rs : stats) mean += rs.S[d][qi];
      y[d] = -std::log(mean / stats.size()) / lm;
    }
    out.tau_hat.values[qi] = slope_of(ns, y, opt.estimator);
    for (const auto& rs : stats) {
      for (size_t d = 0; d < ds.size(); ++d) yr[d] = -std::log(rs.S[d][qi]) / lm;
      tau_slopes[qi].push_back(slope_of(ns, yr, opt.estimator));
    }
  }
  for (size_t qi = 0; qi < pressure_q_grid.size(); ++qi) {
    for (size_t d = 0; d < ds.size(); ++d) {
      double mean = 0;
      for (const auto& rs : stats) mean += rs.logC[d][qi];
      y[d] = mean / stats.size();
    }
    out.pressure_hat.values[qi] = slope_of(ns, y, opt.estimator);
    for (const auto& rs : stats) {
      for (size_t d = 0; d < ds.size(); ++d) yr[d] = rs.logC[d][qi];
      p_slopes[qi].push_back(slope_of(ns, yr, opt.estimator));
    }
  }
  spread_stderr(out.tau_hat, tau_slopes);
  spread_stderr(out.pressure_hat, p_slopes);
  return out;
}

SpectrumCurve empirical_tau(const WeightModel& model, const std::vector<int>& depths,
                            const std::vector<double>& q_grid,
                            const EmpiricalOptions& opt) {
  return empirical_curves(model, depths, q_grid, {}, opt).tau_hat;
}

SpectrumCurve branching_pressure(const WeightModel& model, const std::vector<int>& depths,
                                 const std::vector<double>& q_grid,
                                 const EmpiricalOptions& opt) {
  return empirical_curves(model, depths, {}, q_grid, opt).pressure_hat;
}

CoarseSpectrum coarse_spectrum(const ProjectedMasses& pm, int bins) {
  if (!pm.survived) throw SimulateError("coarse_spectrum needs a surviving sample");
  const double lm = std::log((double)pm.m);
  std::vector<double> alphas;
  for (double x : pm.pi)
    if (x > 0) alphas.push_back(std::log(x) / (-pm.depth * lm));
  CoarseSpectrum cs;
  double lo = *std::min_element(alphas.begin(), alphas.end());
  double hi = *std::max_element(alphas.begin(), alphas.end());
  if (hi - lo < 1e-12) hi = lo + 1e-12;
  cs.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) cs.edges[b] = lo + (hi - lo) * b / bins;
  cs.counts.assign(bins, 0);
  for (double a : alphas) {
    int b = std::min(bins - 1, (int)((a - lo) / (hi - lo) * bins));
    cs.counts[b] += 1;
  }
  cs.spectrum.assign(bins, -kInf);
  for (int b = 0; b < bins; ++b)
    if (cs.counts[b] > 0)
      cs.spectrum[b] = std::log((double)cs.counts[b]) / (pm.depth * lm);
  return cs;
}

// ---------------------------------------------------------------------------
// Exact enumeration oracle.

namespace {

struct RowConfig {
  double prob;
  std::vector<double> w;  // one row of W, length m
};

std::vector<std::vector<RowConfig>> row_configs(const WeightModel& md) {
  std::vector<std::vector<RowConfig>> rc(md.m);
  switch (md.family) {
    case Family::Discrete: {
      for (int i = 0; i < md.m; ++i) {
        std::map<std::vector<double>, double> merged;
        for (const auto& a : md.atoms) {
          std::vector<double> row(a.w.begin() + i * md.m, a.w.begin() + (i + 1) * md.m);
          merged[row] += a.prob;
        }
        for (auto& [row, p] : merged) rc[i].push_back({p, row});
      }
      break;
    }
    case Family::Branching: {
      for (int i = 0; i < md.m; ++i) {
        if (!md.active(i)) {
          rc[i].push_back({1.0, std::vector<double>(md.m, 0.0)});
          continue;
        }
        double val = md.marg.p[i] / md.row_mean(i);
        for (int k = 0; k <= md.m; ++k) {
          if (md.offspring[i][k] <= 0) continue;
          std::vector<double> row(md.m, 0.0);
          for (int j = 0; j < k; ++j) row[j] = val;
          rc[i].push_back({md.offspring[i][k], row});
        }
      }
      break;
    }
    case Family::Lognormal:
      throw SimulateError("exact enumeration requires a finite discrete model");
  }
  return rc;
}

using Dist = std::vector<std::pair<double, double>>;  // (value, prob), value-sorted

void merge_dist(Dist& d) {
  std::sort(d.begin(), d.end());
  Dist out;
  for (const auto& [v, p] : d) {
    if (!out.empty() && out.back().first == v) out.back().second += p;
    else out.emplace_back(v, p);
  }
  d.swap(out);
}

// Distribution of the fiber mass of word (i w'), given the fiber distribution
// of w': sum over the row's positive entries of independent draws from `sub`.
Dist fiber_step(const std::vector<RowConfig>& configs, const Dist& sub,
                double* budget) {
  Dist out;
  for (const auto& cfg : configs) {
    std::vector<int> pos;
    for (int j = 0; j < (int)cfg.w.size(); ++j)
      if (cfg.w[j] > 0) pos.push_back(j);
    if (pos.empty()) {
      out.emplace_back(0.0, cfg.prob);
      continue;
    }
    double combos = 1;
    for (size_t t = 0; t < pos.size(); ++t) combos *= sub.size();
    *budget -= combos;
    if (*budget < 0) throw SimulateError("enumeration too large");
    std::vector<size_t> pick(pos.size(), 0);
    while (true) {
      double val = 0, prob = cfg.prob;
      for (size_t t = 0; t < pos.size(); ++t) {
        val += cfg.w[pos[t]] * sub[pick[t]].first;
        prob *= sub[pick[t]].second;
      }
      out.emplace_back(val, prob);
      size_t t = 0;
      while (t < pick.size() && ++pick[t] == sub.size()) pick[t++] = 0;
      if (t == pick.size()) break;
    }
  }
  merge_dist(out);
  return out;
}

}  // namespace

EnumerationResult exact_enumeration(const WeightModel& model, int depth, double q) {
  if (model.family == Family::Lognormal)
    throw SimulateError("exact enumeration requires a finite discrete model");
  if (depth < 1) throw SimulateError("depth must be >= 1");

  auto rc = row_configs(model);
  EnumerationResult res;

  // E_2d by depth recursion over independent subtrees: the per-level factor is
  // the probability-weighted positive-entry moment sum, enumerated per row.
  double e1 = 0;
  for (int i = 0; i < model.m; ++i)
    for (const auto& cfg : rc[i])
      for (double w : cfg.w)
        if (w > 0) e1 += cfg.prob * std::pow(w, q);
  res.e_2d = 1;
  for (int n = 0; n < depth; ++n) res.e_2d *= e1;

  // E_proj via exact fiber distributions, built level by level over suffixes.
  double budget = tol::enum_budget;
  std::vector<Dist> prev{{{1.0, 1.0}}};  // distributions of words of length l-1
  std::vector<Dist> cur;
  size_t words = 1;
  for (int level = 1; level <= depth; ++level) {
    words *= model.m;
    cur.assign(words, {});
    for (size_t idx = 0; idx < words; ++idx) {
      int first = (int)(idx / (words / model.m));
      const Dist& sub = prev[idx % (words / model.m)];
      cur[idx] = fiber_step(rc[first], sub, &budget);
    }
    prev.swap(cur);
  }
  for (const Dist& d : prev)
    for (const auto& [v, p] : d)
      if (v > 0) res.e_proj += p * std::pow(v, q);
  return res;
}

// ---------------------------------------------------------------------------
// Environment martingale.

EnvMartingale env_martingale(const WeightModel& model,
                             const std::vector<double>& env_p_prime, int depth,
                             std::uint64_t env_seed, std::uint64_t seed) {
  if ((int)env_p_prime.size() != model.m)
    throw SimulateError("environment vector must have length m");
  double s = std::accumulate(env_p_prime.begin(), env_p_prime.end(), 0.0);
  if (std::abs(s - 1.0) > tol::identity)
    throw SimulateError("environment vector must sum to 1");
  for (int i = 0; i < model.m; ++i)
    if (env_p_prime[i] > 0 && !model.active(i))
      throw SimulateError("environment letter " + std::to_string(i) +
                          " hits an inactive row");

  EnvMartingale out;
  // environment word
  rng::Stream env_st(rng::mix64(env_seed ^ rng::kEnvSalt));
  std::vector<double> cdf;
  double acc = 0;
  for (double p : env_p_prime) cdf.push_back(acc += p);
  for (int k = 0; k < depth; ++k) {
    double x = env_st.next_unit();
    int i = 0;
    while (i + 1 < model.m && x > cdf[i]) ++i;
    out.environment.push_back(i);
  }

  // criterion sum env_i T_i'(1-)
  for (int i = 0; i < model.m; ++i)
    if (env_p_prime[i] > 0)
      out.criterion += env_p_prime[i] * derivative(model, CurveKind::Ti, 1.0, i);
  out.uniformly_integrable = out.criterion > 0;

  // run the V-row cascade over the column tree
  struct VCell { std::uint64_t key; double value; };
  std::vector<VCell> cur{{rng::root_key(seed), 1.0}}, next;
  std::vector<double> vrow(model.m);
  WeightDrawer drawer(model);
  bool warned = false;
  for (int k = 0; k < depth; ++k) {
    int row = out.environment[k];
    next.clear();
    double total = 0;
    std::vector<double> w(model.m * model.m);
    for (const VCell& c : cur) {
      rng::Stream st(c.key);
      drawer.draw(st, w.data());
      for (int j = 0; j < model.m; ++j) {
        double v = w[row * model.m + j] / model.marg.p[row];
        if (v > 0) {
          next.push_back({rng::child_key(c.key, (std::uint64_t)j), c.value * v});
          total += c.value * v;
        }
      }
    }
    cur.swap(next);
    check_budget(cur.size(), &warned);
    out.trajectory.push_back(total);
    if (cur.empty()) {
      while ((int)out.trajectory.size() < depth) out.trajectory.push_back(0.0);
      break;
    }
  }
  return out;
}

} // namespace cascade
