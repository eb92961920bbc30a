#include "cascade/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cascade/constants.hpp"
#include "cascade/roots.hpp"

namespace cascade {

const char* witness_name(WitnessStatus w) {
  switch (w) {
    case WitnessStatus::Verified:      return "verified";
    case WitnessStatus::NotVerified:   return "not-verified";
    case WitnessStatus::NotApplicable: return "not-applicable";
  }
  return "?";
}

namespace {

LsInterval density_interval(const WeightModel& m) {
  LsInterval out;
  auto cond_T = [&](double s) { return T_of(m, s); };
  auto cond_h = [&](double s) {
    double lm = std::log((double)m.m);
    double h = 0;
    for (int i = 0; i < m.m; ++i)
      if (m.active(i)) h += m.marg.p[i] * std::exp(-lm * T_row(m, i, s));
    return 1.0 - h;  // need > 0
  };
  double probe = 1.0 + 1e-6;
  if (!(cond_T(probe) > 0) || !(cond_h(probe) > 0)) return out;  // empty
  out.empty = false;
  double hi = 2.0;
  auto zT = scan_zeros(cond_T, probe, 2.0);
  if (!zT.empty()) hi = std::min(hi, zT.front());
  auto zh = scan_zeros(cond_h, probe, 2.0);
  if (!zh.empty()) hi = std::min(hi, zh.front());
  out.hi = hi;
  out.hi_closed = hi == 2.0 && cond_T(2.0) > 0 && cond_h(2.0) > 0;
  return out;
}

// Equivalence-witness search over the finite V-value support. Both
// conditions are nonincreasing in c, so feasibility reduces to the limit
// c -> 0+: every row configuration carries a positive entry and E(N_i) > 1
// on every active row. The reported witness is half the smallest positive
// V value (capped below 1).
void witness_search(const WeightModel& m, ClassificationReport& rep) {
  if (m.family == Family::Lognormal) {
    // sup_j V_{i,j} has no a.s. positive lower-bound certificate
    rep.equivalence = WitnessStatus::NotApplicable;
    return;
  }
  double vmin = kInf;
  for (int i = 0; i < m.m; ++i) {
    if (!m.active(i)) continue;
    double mean_count = 0;
    for (const auto& cfg : row_law(m, i)) {
      double mx = 0;
      int cnt = 0;
      for (double v : cfg.v) {
        mx = std::max(mx, v);
        if (v > 0) {
          ++cnt;
          vmin = std::min(vmin, v);
        }
      }
      if (mx <= 0) {  // an all-zero configuration: P(sup > c) < 1 for all c
        rep.equivalence = WitnessStatus::NotVerified;
        return;
      }
      mean_count += cfg.prob * cnt;
    }
    if (!(mean_count > 1)) {
      rep.equivalence = WitnessStatus::NotVerified;
      return;
    }
  }
  rep.equivalence = WitnessStatus::Verified;
  rep.witness_c = std::min(vmin, 1.0) / 2;
}

bool indicator_rows(const WeightModel& m) {
  // V_{i,j} in {0, 1/E(N_i)} a.s. for every active row.
  if (m.family == Family::Lognormal) return false;
  if (m.family == Family::Branching) return true;
  for (int i = 0; i < m.m; ++i) {
    if (!m.active(i)) continue;
    double val = 1.0 / m.row_mean(i);
    for (const auto& cfg : row_law(m, i))
      for (double v : cfg.v)
        if (v > 0 && std::abs(v - val) > tol::atom_prob) return false;
  }
  return true;
}

// Partition search for property (P): classes of equal-p_i rows whose E(N_i)
// multiply to 1, with at least one class holding >= 2 rows of non-unit mean.
bool property_p(const WeightModel& m) {
  if (!indicator_rows(m)) return false;
  if (m.m > 12) throw SpectraError("property-P partition search guarded to m <= 12");

  std::vector<int> rows;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i)) rows.push_back(i);

  // group rows by p_i
  std::map<long long, std::vector<int>> groups;
  for (int i : rows)
    groups[(long long)std::llround(m.marg.p[i] * 1e12)].push_back(i);

  bool any_special = false;
  for (auto& [key, g] : groups) {
    int n = (int)g.size();
    std::vector<double> logs(n);
    std::vector<int> nonunit(n);
    for (int t = 0; t < n; ++t) {
      logs[t] = std::log(m.row_mean(g[t]));
      nonunit[t] = std::abs(m.row_mean(g[t]) - 1.0) > tol::atom_prob;
    }
    // valid classes: subsets with log-product 0; special: >= 2 non-unit members
    int full = (1 << n) - 1;
    std::vector<char> valid(full + 1, 0), special(full + 1, 0);
    for (int mask = 1; mask <= full; ++mask) {
      double s = 0;
      int nu = 0;
      for (int t = 0; t < n; ++t)
        if (mask & (1 << t)) { s += logs[t]; nu += nonunit[t]; }
      if (std::abs(s) <= tol::identity) {
        valid[mask] = 1;
        special[mask] = __builtin_popcount((unsigned)mask) >= 2 && nu >= 2;
      }
    }
    // partition DP over masks, tracking whether a special class was used
    std::vector<char> can(full + 1, 0), can_sp(full + 1, 0);
    can[0] = 1;
    for (int mask = 1; mask <= full; ++mask) {
      int low = mask & (-mask);
      for (int sub = mask; sub; sub = (sub - 1) & mask) {
        if (!(sub & low) || !valid[sub]) continue;
        int rest = mask ^ sub;
        if (can[rest]) {
          can[mask] = 1;
          if (special[sub] || can_sp[rest]) can_sp[mask] = 1;
        }
      }
    }
    if (!can[full]) return false;  // this p-group cannot be partitioned
    if (can_sp[full]) any_special = true;
  }
  return any_special;
}

}  // namespace

DegeneracyFlags degeneracy_flags(const WeightModel& m) {
  DegeneracyFlags f;
  f.all_ti_zero = all_ti_zero(m);
  f.property_p = property_p(m);
  return f;
}

ClassificationReport classify_projection(const WeightModel& m) {
  ClassificationReport rep;
  rep.dims = dims(m);  // throws on degenerate cascades
  double gap = rep.dims.dim_mu - rep.dims.dim_nu;
  rep.at_boundary = std::abs(gap) <= tol::atom_prob;
  rep.absolutely_continuous = gap > 0 && !rep.at_boundary;
  if (rep.absolutely_continuous) rep.density_ls = density_interval(m);
  witness_search(m, rep);
  rep.dgf_unique = derivative(m, CurveKind::Phi, 0.0) <= 0;
  rep.degenerate = degeneracy_flags(m);
  return rep;
}

UiReport ui_criterion(const WeightModel& m, const std::vector<double>& env) {
  if ((int)env.size() != m.m)
    throw SpectraError("environment vector must have length m");
  double s = std::accumulate(env.begin(), env.end(), 0.0);
  if (std::abs(s - 1.0) > tol::identity)
    throw SpectraError("environment vector must sum to 1");
  UiReport rep;
  for (int i = 0; i < m.m; ++i) {
    if (!(env[i] > 0)) continue;
    if (!m.active(i))
      throw SpectraError("environment letter " + std::to_string(i) +
                         " is not supported by the model");
    rep.value += env[i] * derivative(m, CurveKind::Ti, 1.0, i);
  }
  rep.at_boundary = std::abs(rep.value) <= tol::atom_prob;
  rep.uniformly_integrable = rep.value > 0 && !rep.at_boundary;
  return rep;
}

} // namespace cascade
