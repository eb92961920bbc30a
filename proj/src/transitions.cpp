#include "cascade/transitions.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/constants.hpp"
#include "cascade/roots.hpp"

namespace cascade {

CrossingSet crossings(const WeightModel& m, double lo, double hi) {
  CrossingSet out;
  if (all_ti_zero(m)) {
    out.identical_curves = true;
    return out;
  }
  auto diff = [&](double q) { return T_of(m, q) - tau_nu(m, q); };
  auto dgap = [&](double q) {
    return derivative(m, CurveKind::T, q) - derivative(m, CurveKind::TauNu, q);
  };

  std::vector<double> candidates = scan_zeros(diff, lo, hi, tol::scan_points);
  if (lo <= 1.0 && 1.0 <= hi) candidates.push_back(1.0);  // always a meeting point
  // tangential touch points: derivative-gap zeros where the gap itself vanishes
  for (double q : scan_zeros(dgap, lo, hi, tol::scan_points, false))
    if (std::abs(diff(q)) <= tol::identity) candidates.push_back(q);

  std::sort(candidates.begin(), candidates.end());
  for (double q : candidates) {
    if (!out.list.empty() && std::abs(q - out.list.back().q) < 10 * tol::root) continue;
    out.list.push_back({q, std::abs(dgap(q)) > tol::transversal});
  }
  return out;
}

namespace {

Branch label_of(const WeightModel& m, double q) {
  SPoint sp = s_of_q(m, q);
  if (sp.degenerate) return Branch::TauT;
  switch (sp.branch) {
    case SBranch::AtQ:      return Branch::TauT;
    case SBranch::AtOne:    return Branch::TauNu;
    case SBranch::Interior: return Branch::StrictSup;
  }
  return Branch::TauT;
}

// Refines a label change inside (a,b) to bisect_x width. Uses the sign
// function that selects between the two labels when one side is interior,
// generic label bisection otherwise.
double refine_boundary(const WeightModel& m, double a, double b, Branch la, Branch lb) {
  bool interior = la == Branch::StrictSup || lb == Branch::StrictSup;
  if (interior) {
    Branch other = la == Branch::StrictSup ? lb : la;
    if (other == Branch::TauT) {
      // AtQ holds iff g(q,q) <= 0
      auto f = [&](double q) { return g_fn(m, q, q); };
      double fa = f(a), fb = f(b);
      if ((fa < 0) != (fb < 0)) return bisect(f, a, b, fa, fb);
    } else if (other == Branch::TauNu) {
      auto f = [&](double q) { return g_fn(m, q, 1.0); };
      double fa = f(a), fb = f(b);
      if ((fa < 0) != (fb < 0)) return bisect(f, a, b, fa, fb);
    }
  }
  while (b - a > tol::bisect_x) {
    double mid = 0.5 * (a + b);
    if (label_of(m, mid) == la) a = mid;
    else b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

PhaseTransitionReport classify_transitions(const WeightModel& m, double q_max) {
  PhaseTransitionReport rep;
  rep.exponents = critical_exponents(m, q_max);
  const auto& ce = rep.exponents;
  rep.crossings = crossings(m, 0.0, q_max);

  double top = std::min(ce.q_c_tilde, q_max);

  // --- segments over (0, 1]: branch of the variational minimizer ---
  std::vector<Segment> segs;
  {
    const int n = tol::segment_points;
    double prev_q = 1.0 / (1 << 18);
    Branch prev = label_of(m, prev_q);
    double start = 0.0;
    for (int k = 1; k <= n; ++k) {
      double q = (double)k / n;
      Branch l = label_of(m, q);
      if (l != prev) {
        double b = refine_boundary(m, prev_q, q, prev, l);
        segs.push_back({start, b, prev});
        start = b;
        prev = l;
      }
      prev_q = q;
    }
    segs.push_back({start, 1.0, prev});
  }

  // --- segments over (1, min(q_c_tilde, q_max)]: min-selection ---
  if (top > 1.0) {
    std::vector<double> cuts;
    for (const auto& c : rep.crossings.list)
      if (c.q > 1.0 + tol::root && c.q < top - tol::root) cuts.push_back(c.q);
    double a = 1.0;
    for (size_t k = 0; k <= cuts.size(); ++k) {
      double b = k < cuts.size() ? cuts[k] : top;
      double mid = 0.5 * (a + b);
      Branch l = T_of(m, mid) <= tau_nu(m, mid) ? Branch::TauT : Branch::TauNu;
      if (rep.crossings.identical_curves) l = Branch::TauT;
      segs.push_back({a, b, l});
      a = b;
    }
  }

  // merge adjacent equal labels
  for (const auto& s : segs) {
    if (!rep.segments.empty() && rep.segments.back().label == s.label)
      rep.segments.back().hi = s.hi;
    else
      rep.segments.push_back(s);
  }
  // linear-extension tail
  if (ce.linear_extension && ce.q_c < q_max)
    rep.segments.push_back({ce.q_c, q_max, Branch::Linear});

  // --- transitions ---
  // first order: transversal crossings strictly inside (1, q_c_tilde)
  for (const auto& c : rep.crossings.list) {
    if (!c.transversal) continue;
    if (c.q <= 1.0 + tol::root || c.q >= ce.q_c_tilde - tol::root) continue;
    Transition t;
    t.q = c.q;
    t.first_order = true;
    double mt = T_of(m, c.q - 1e-6) <= tau_nu(m, c.q - 1e-6) ? 1 : 0;
    t.left = mt ? Branch::TauT : Branch::TauNu;
    t.right = mt ? Branch::TauNu : Branch::TauT;
    t.d_left = tau_branch_derivative(m, c.q, t.left, ce);
    t.d_right = tau_branch_derivative(m, c.q, t.right, ce);
    rep.transitions.push_back(t);
  }
  // order >= 2: segment boundaries with a label change that are not first-order
  for (size_t k = 0; k + 1 < rep.segments.size(); ++k) {
    double q = rep.segments[k].hi;
    bool isfirst = false;
    for (const auto& t : rep.transitions)
      if (t.first_order && std::abs(t.q - q) < 10 * tol::root) isfirst = true;
    if (isfirst) continue;
    if (q >= ce.q_c_tilde &&
        !(ce.linear_extension && std::abs(q - ce.q_c) < 10 * tol::root))
      continue;
    Transition t;
    t.q = q;
    t.first_order = false;
    t.left = rep.segments[k].label;
    t.right = rep.segments[k + 1].label;
    t.d_left = tau_branch_derivative(m, q, t.left, ce);
    t.d_right = tau_branch_derivative(m, q, t.right, ce);
    rep.transitions.push_back(t);
  }
  std::sort(rep.transitions.begin(), rep.transitions.end(),
            [](const Transition& a, const Transition& b) { return a.q < b.q; });
  return rep;
}

const char* regime_name(LognormalRegime r) {
  switch (r) {
    case LognormalRegime::A: return "A";
    case LognormalRegime::B: return "B";
    case LognormalRegime::C: return "C";
    case LognormalRegime::D: return "D";
  }
  return "?";
}

LognormalRegimeInfo lognormal_regime(int m, double beta) {
  double lm = std::log((double)m);
  if (!(beta > 0) || !(beta < 2 * std::sqrt(lm)))
    throw SpectraError("lognormal regime map needs beta in (0, 2 sqrt(log m))");
  LognormalRegimeInfo info;
  info.q_0 = 2 * lm / (beta * beta);
  info.q_c = 2 * std::sqrt(lm) / beta;
  double c = std::sqrt(2 * lm);
  if (std::abs(beta - c) <= 1e-12) info.regime = LognormalRegime::C;
  else if (beta <= std::sqrt(lm)) info.regime = LognormalRegime::A;
  else if (beta < c) info.regime = LognormalRegime::B;
  else info.regime = LognormalRegime::D;
  return info;
}

} // namespace cascade
