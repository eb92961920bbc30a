#pragma once

#include <vector>

#include "cascade/spectra.hpp"

namespace cascade {

// Sub-interval of (1,2] where the projection density is in L^s:
// T(s) > 0 and sum_i p_i m^{-T_i(s)} < 1. Left endpoint is always the open 1.
struct LsInterval {
  bool empty = true;
  double hi = 1.0;
  bool hi_closed = false;
};

enum class WitnessStatus { Verified, NotVerified, NotApplicable };

struct DegeneracyFlags {
  bool all_ti_zero = false;  // tau = T = tau_nu
  bool property_p = false;   // tau = tau_nu on R_+
};

struct ClassificationReport {
  bool absolutely_continuous = false;  // dim mu > dim nu
  bool at_boundary = false;            // dim mu == dim nu (classified singular)
  DimensionReport dims;
  LsInterval density_ls;
  WitnessStatus equivalence = WitnessStatus::NotVerified;
  double witness_c = 0;  // only meaningful when Verified
  bool dgf_unique = false;
  DegeneracyFlags degenerate;
};

ClassificationReport classify_projection(const WeightModel& m);

DegeneracyFlags degeneracy_flags(const WeightModel& m);

struct UiReport {
  double value = 0;  // sum env_i T_i'(1-)
  bool uniformly_integrable = false;
  bool at_boundary = false;  // value == 0, reported not-UI
};

UiReport ui_criterion(const WeightModel& m, const std::vector<double>& env);

const char* witness_name(WitnessStatus w);

} // namespace cascade
