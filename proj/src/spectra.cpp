#include "cascade/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/constants.hpp"
#include "cascade/roots.hpp"

namespace cascade {

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::TauT:      return "tau=T";
    case Branch::TauNu:     return "tau=tau_nu";
    case Branch::StrictSup: return "tau-strict-sup";
    case Branch::Linear:    return "linear-extension";
    case Branch::Undefined: return "undefined";
  }
  return "?";
}

std::vector<double> make_grid(double lo, double hi, int steps) {
  std::vector<double> g(steps);
  for (int k = 0; k < steps; ++k)
    g[k] = lo + (hi - lo) * k / (steps - 1);
  return g;
}

double T_of(const WeightModel& m, double q) {
  double s = moment(m, MomentKind::WFull, q);
  if (!(s > 0) || !std::isfinite(s)) return -kInf;
  return -std::log(s) / std::log((double)m.m);
}

double T_row(const WeightModel& m, int i, double q) {
  double s = moment(m, MomentKind::VRow, q, i);
  if (!(s > 0) || !std::isfinite(s)) return -kInf;
  return -std::log(s) / std::log((double)m.m);
}

double tau_nu(const WeightModel& m, double q) {
  double s = 0;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i)) s += std::pow(m.marg.p[i], q);
  return -std::log(s) / std::log((double)m.m);
}

double phi(const WeightModel& m, double h) {
  // 0^0 = 0 convention: inactive rows contribute nothing.
  double s = 0;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i)) s += std::pow(m.row_mean(i), h);
  return std::log(s) / std::log((double)m.m);
}

double entropy_dim(const WeightModel& m) {
  double s = 0;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i)) s -= m.marg.p[i] * std::log(m.marg.p[i]);
  return s / std::log((double)m.m);
}

double base_curve(const WeightModel& m, CurveKind kind, double x, int row) {
  switch (kind) {
    case CurveKind::T:     return T_of(m, x);
    case CurveKind::Ti:    return T_row(m, row, x);
    case CurveKind::TauNu: return tau_nu(m, x);
    case CurveKind::Phi:   return phi(m, x);
  }
  throw SpectraError("unreachable");
}

double derivative(const WeightModel& m, CurveKind kind, double x, int row) {
  double lm = std::log((double)m.m);
  switch (kind) {
    case CurveKind::T:
      return -moment_dq(m, MomentKind::WFull, x) /
             (lm * moment(m, MomentKind::WFull, x));
    case CurveKind::Ti:
      return -moment_dq(m, MomentKind::VRow, x, row) /
             (lm * moment(m, MomentKind::VRow, x, row));
    case CurveKind::TauNu: {
      double s = 0, ds = 0;
      for (int i = 0; i < m.m; ++i)
        if (m.active(i)) {
          double t = std::pow(m.marg.p[i], x);
          s += t;
          ds += t * std::log(m.marg.p[i]);
        }
      return -ds / (lm * s);
    }
    case CurveKind::Phi: {
      double s = 0, ds = 0;
      for (int i = 0; i < m.m; ++i)
        if (m.active(i)) {
          double a = m.row_mean(i);
          double t = std::pow(a, x);
          s += t;
          ds += t * std::log(a);
        }
      return ds / (lm * s);
    }
  }
  throw SpectraError("unreachable");
}

double Ti_star(const WeightModel& m, int i, double s) {
  return s * derivative(m, CurveKind::Ti, s, i) - T_row(m, i, s);
}

PhiMin phi_min(const WeightModel& m) {
  PhiMin out;
  bool all_unit = true;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i) && std::abs(m.row_mean(i) - 1.0) > tol::atom_prob)
      all_unit = false;
  out.unique = !all_unit;

  double d0 = derivative(m, CurveKind::Phi, 0.0);
  double d1 = derivative(m, CurveKind::Phi, 1.0);
  if (d0 >= 0) out.h_star = 0;
  else if (d1 <= 0) out.h_star = 1;
  else
    out.h_star = bisect([&](double h) { return derivative(m, CurveKind::Phi, h); },
                        0.0, 1.0, d0, d1);
  out.value = phi(m, out.h_star);
  return out;
}

double G_fn(const WeightModel& m, double q, double s) {
  double lm = std::log((double)m.m);
  double acc = 0;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i))
      acc += std::pow(m.marg.p[i], q) * std::exp(-lm * q * T_row(m, i, s) / s);
  return acc;
}

double g_fn(const WeightModel& m, double q, double s) {
  double lm = std::log((double)m.m);
  double acc = 0;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i))
      acc += std::pow(m.marg.p[i], q) * std::exp(-lm * q * T_row(m, i, s) / s) *
             Ti_star(m, i, s);
  return acc;
}

bool all_ti_zero(const WeightModel& m) {
  // T_i == 0 on every active row iff E(N_i) = 1 and V_{i,j} in {0,1} a.s.
  for (int i = 0; i < m.m; ++i) {
    if (!m.active(i)) continue;
    if (std::abs(m.row_mean(i) - 1.0) > tol::atom_prob) return false;
    if (m.family == Family::Lognormal) return false;
    if (m.family == Family::Discrete) {
      for (const auto& a : m.atoms)
        for (int j = 0; j < m.m; ++j) {
          double v = a.w[i * m.m + j] / m.marg.p[i];
          if (v > 0 && std::abs(v - 1.0) > tol::atom_prob) return false;
        }
    }
    // Branching rows always have V in {0, 1/E(N_i)}; E(N_i)=1 suffices.
  }
  return true;
}

SPoint s_of_q(const WeightModel& m, double q) {
  if (!(q > 0) || q > 1) throw SpectraError("s_of_q requires q in (0,1]");
  SPoint out;
  if (all_ti_zero(m)) {
    out.s = 1;
    out.branch = SBranch::AtOne;
    out.degenerate = true;
    return out;
  }
  if (q == 1) {
    out.s = 1;
    out.branch = g_fn(m, 1, 1) <= 0 ? SBranch::AtQ : SBranch::AtOne;
    return out;
  }
  double gq = g_fn(m, q, q);
  if (gq <= 0) {  // g nonincreasing in s, so g < 0 on all of [q,1]
    out.s = q;
    out.branch = SBranch::AtQ;
    return out;
  }
  double g1 = g_fn(m, q, 1);
  if (g1 >= 0) {
    out.s = 1;
    out.branch = SBranch::AtOne;
    return out;
  }
  out.s = bisect([&](double s) { return g_fn(m, q, s); }, q, 1.0, gq, g1);
  out.branch = SBranch::Interior;
  return out;
}

CriticalExponents critical_exponents(const WeightModel& m, double q_max) {
  if (q_max < 2) throw SpectraError("critical_exponents requires q_max >= 2");
  CriticalExponents ce;
  ce.q_max = q_max;

  // q_c: zero of q T'(q) - T(q) on (1, q_max]. The function is nonincreasing
  // and positive at 1, so at most one zero exists.
  auto legendre_gap = [&](double q) {
    return q * derivative(m, CurveKind::T, q) - T_of(m, q);
  };
  auto z = first_zero(legendre_gap, 1.0 + 1e-9, q_max);
  ce.q_c = z ? *z : kInf;

  // q_c_tilde.
  if (std::isinf(ce.q_c)) {
    ce.q_c_tilde = kInf;
  } else if (tau_nu(m, ce.q_c) >= T_of(m, ce.q_c) - tol::identity) {
    ce.q_c_tilde = ce.q_c;
    ce.linear_extension = true;
  } else {
    auto cross = first_zero([&](double q) { return T_of(m, q) - tau_nu(m, q); },
                            ce.q_c, q_max);
    ce.q_c_tilde = cross ? *cross : ce.q_c;  // inf of empty set = q_c
  }

  PhiMin pm = phi_min(m);
  ce.h_star = pm.h_star;
  ce.p_prime.assign(m.m, 0.0);
  double norm = 0;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i)) norm += std::pow(m.row_mean(i), ce.h_star);
  for (int i = 0; i < m.m; ++i)
    if (m.active(i)) ce.p_prime[i] = std::pow(m.row_mean(i), ce.h_star) / norm;

  // tau'(0+): classify by the s(q) branch as q -> 0+.
  SBranch b = SBranch::AtOne;
  for (double q : {1.0 / (1 << 10), 1.0 / (1 << 14), 1.0 / (1 << 18)})
    b = s_of_q(m, q).branch;
  double lm = std::log((double)m.m);
  if (b == SBranch::AtQ) {
    ce.tau_prime_0_case = 1;
    ce.tau_prime_0 = derivative(m, CurveKind::T, 0.0);
  } else if (b == SBranch::AtOne) {
    ce.tau_prime_0_case = 2;
    ce.tau_prime_0 = derivative(m, CurveKind::TauNu, 0.0);
  } else {
    ce.tau_prime_0_case = 3;
    auto psi = [&](double s) {
      double acc = 0;
      for (int i = 0; i < m.m; ++i)
        if (m.active(i)) acc += ce.p_prime[i] * Ti_star(m, i, s);
      return acc;
    };
    double p0 = psi(0), p1 = psi(1);
    if ((p0 < 0) == (p1 < 0) && p0 != 0 && p1 != 0) {
      ce.s0 = std::abs(p0) < std::abs(p1) ? 0.0 : 1.0;
      ce.s0_warning = true;
    } else {
      ce.s0 = bisect(psi, 0.0, 1.0, p0, p1);
    }
    double acc = 0;
    for (int i = 0; i < m.m; ++i)
      if (m.active(i))
        acc += ce.p_prime[i] *
               (std::log(m.marg.p[i]) / lm - derivative(m, CurveKind::Ti, ce.s0, i));
    ce.tau_prime_0 = -acc;
  }
  return ce;
}

TauValue tau(const WeightModel& m, double q, const CriticalExponents& ce) {
  if (q < 0) throw SpectraError("tau is defined for q >= 0 only");
  double lm = std::log((double)m.m);
  TauValue out;
  if (q == 0) {
    out.value = -phi_min(m).value;
    out.branch = ce.tau_prime_0_case == 1   ? Branch::TauT
                 : ce.tau_prime_0_case == 2 ? Branch::TauNu
                                            : Branch::StrictSup;
    return out;
  }
  if (q <= 1) {
    SPoint sp = s_of_q(m, q);
    out.value = -std::log(G_fn(m, q, sp.s)) / lm;
    out.branch = sp.branch == SBranch::AtQ        ? Branch::TauT
                 : sp.branch == SBranch::Interior ? Branch::StrictSup
                                                  : Branch::TauNu;
    if (sp.degenerate) out.branch = Branch::TauT;
    return out;
  }
  if (ce.linear_extension && q > ce.q_c) {
    out.value = q * derivative(m, CurveKind::T, ce.q_c);
    out.branch = Branch::Linear;
    return out;
  }
  double t = T_of(m, q), tn = tau_nu(m, q);
  out.value = std::min(t, tn);
  out.branch = t <= tn ? Branch::TauT : Branch::TauNu;
  if (!std::isinf(ce.q_c_tilde) && q > ce.q_c_tilde && !ce.linear_extension)
    out.branch = Branch::Undefined;  // past the identified window
  return out;
}

double tau_prime_1(const WeightModel& m) {
  return std::min(derivative(m, CurveKind::T, 1.0),
                  derivative(m, CurveKind::TauNu, 1.0));
}

double tau_branch_derivative(const WeightModel& m, double q, Branch b,
                             const CriticalExponents& ce) {
  switch (b) {
    case Branch::TauT:
      return derivative(m, CurveKind::T, q);
    case Branch::TauNu:
    case Branch::Undefined:
      return derivative(m, CurveKind::TauNu, q);
    case Branch::Linear:
      return derivative(m, CurveKind::T, ce.q_c);
    case Branch::StrictSup: {
      // tau'(q) = -dG/dq (q, s(q)) / (log(m) G(q, s(q)))
      double lm = std::log((double)m.m);
      double s = s_of_q(m, q).s;
      double num = 0;
      for (int i = 0; i < m.m; ++i)
        if (m.active(i))
          num += std::pow(m.marg.p[i], q) * std::exp(-lm * q * T_row(m, i, s) / s) *
                 (std::log(m.marg.p[i]) - lm * T_row(m, i, s) / s);
      return -num / (lm * G_fn(m, q, s));
    }
  }
  throw SpectraError("unreachable");
}

SpectrumCurve tau_curve(const WeightModel& m, const CriticalExponents& ce,
                        double q_min, double q_max, int steps) {
  SpectrumCurve c;
  c.model_id = m.name;
  c.kind = "tau";
  c.grid = make_grid(q_min, q_max, steps);
  c.values.resize(steps);
  c.branches.resize(steps);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < steps; ++k) {
    TauValue tv = tau(m, c.grid[k], ce);
    c.values[k] = tv.value;
    c.branches[k] = tv.branch;
  }
  return c;
}

SpectrumCurve base_curve_sampled(const WeightModel& m, CurveKind kind,
                                 double lo, double hi, int steps, int row) {
  SpectrumCurve c;
  c.model_id = m.name;
  c.kind = kind == CurveKind::T       ? "T"
           : kind == CurveKind::Ti    ? "T_i"
           : kind == CurveKind::TauNu ? "tau_nu"
                                      : "phi";
  c.grid = make_grid(lo, hi, steps);
  c.values.resize(steps);
  for (int k = 0; k < steps; ++k) c.values[k] = base_curve(m, kind, c.grid[k], row);
  return c;
}

SpectrumCurve legendre(const SpectrumCurve& curve,
                       const std::vector<double>& alpha_grid) {
  if (curve.grid.empty()) throw SpectraError("legendre: empty grid");
  for (double v : curve.values)
    if (!std::isfinite(v))
      throw SpectraError("legendre: curve has non-finite values on its grid");
  SpectrumCurve out;
  out.model_id = curve.model_id;
  out.kind = curve.kind + "*";
  out.grid = alpha_grid;
  out.values.resize(alpha_grid.size());
  for (size_t a = 0; a < alpha_grid.size(); ++a) {
    double best = kInf;
    for (size_t k = 0; k < curve.grid.size(); ++k)
      best = std::min(best, alpha_grid[a] * curve.grid[k] - curve.values[k]);
    out.values[a] = best;
  }
  return out;
}

DimensionReport dims(const WeightModel& m) {
  DimensionReport r;
  r.dim_mu = derivative(m, CurveKind::T, 1.0);
  if (!(r.dim_mu > 0))
    throw SpectraError("degenerate cascade: T'(1-) <= 0, the limit measure vanishes");
  r.dim_nu = entropy_dim(m);
  r.dim_pi_mu = std::min(r.dim_mu, r.dim_nu);
  r.dim_conditional = std::max(0.0, r.dim_mu - r.dim_nu);
  r.dim_pi_K = phi_min(m).value;
  return r;
}

double pressure(const WeightModel& m, double q) {
  if (q < 0) throw SpectraError("pressure is defined for q >= 0");
  double lm = std::log((double)m.m);
  double logEN = std::log(m.marg.total_mean);
  bool subunit = true;
  for (int i = 0; i < m.m; ++i)
    if (m.active(i) && m.row_mean(i) > 1) subunit = false;
  if (subunit) return logEN;  // fiber counts grow subexponentially

  PhiMin pm = phi_min(m);
  if (q <= pm.h_star) return lm * pm.value;
  if (q <= 1) {
    // inf over s in [q,1] of phi(q/s); the ratio ranges over [q,1], so the
    // minimizer is the clamped phi-minimizer.
    double h = std::clamp(pm.h_star, q, 1.0);
    return lm * phi(m, h);
  }
  return std::max(logEN, lm * phi(m, q));
}

} // namespace cascade
