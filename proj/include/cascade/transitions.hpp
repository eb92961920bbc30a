#pragma once

#include <vector>

#include "cascade/spectra.hpp"

namespace cascade {

struct Crossing {
  double q = 0;
  bool transversal = false;  // |T' - tau_nu'| > 1e-6 at the crossing
};

struct CrossingSet {
  std::vector<Crossing> list;
  bool identical_curves = false;  // T == tau_nu (all T_i identically zero)
};

// All points where T and tau_nu meet on [lo, hi]: sign-change zeros of
// T - tau_nu plus tangential touch points (zeros of the derivative gap where
// the gap itself vanishes). q = 1 is always included when in range.
CrossingSet crossings(const WeightModel& m, double lo, double hi);

struct Transition {
  double q = 0;
  bool first_order = false;  // else order >= 2 ("second-or-higher")
  Branch left = Branch::TauT;
  Branch right = Branch::TauT;
  double d_left = 0;   // one-sided derivatives from the branch formulas
  double d_right = 0;
};

struct Segment {
  double lo = 0, hi = 0;
  Branch label = Branch::TauT;
};

struct PhaseTransitionReport {
  CrossingSet crossings;
  std::vector<Transition> transitions;
  std::vector<Segment> segments;  // partition of [0, min(q_c_tilde, q_max)],
                                  // plus a linear-extension tail when q_c_tilde = q_c < q_max
  CriticalExponents exponents;
};

PhaseTransitionReport classify_transitions(const WeightModel& m, double q_max);

enum class LognormalRegime { A, B, C, D };

struct LognormalRegimeInfo {
  LognormalRegime regime = LognormalRegime::A;
  double q_0 = 0;  // 2 log m / beta^2, the nontrivial meeting point of T and tau_nu
  double q_c = 0;  // 2 sqrt(log m) / beta
};

// Closed-form regime map of the lognormal family; beta must lie in
// (0, 2 sqrt(log m)).
LognormalRegimeInfo lognormal_regime(int m, double beta);

const char* regime_name(LognormalRegime r);

} // namespace cascade
