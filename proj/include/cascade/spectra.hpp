#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cascade/model.hpp"

namespace cascade {

class SpectraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Branch labels of the projected spectrum tau.
enum class Branch { TauT, TauNu, StrictSup, Linear, Undefined };
const char* branch_name(Branch b);

struct SpectrumCurve {
  std::vector<double> grid;       // strictly increasing (q or alpha)
  std::vector<double> values;     // -inf allowed as explicit sentinel
  std::vector<Branch> branches;   // empty for curves without branch structure
  std::vector<double> stderrs;    // empty unless empirical
  std::string model_id;
  std::string kind;
};

enum class CurveKind { T, Ti, TauNu, Phi };

// Pointwise values of the base curves:
//   T(q)      = -log_m sum E(1_{W>0} W^q)
//   T_i(q)    = -log_m sum_j E(1_{V>0} V_{i,j}^q)   (row must be active)
//   tau_nu(q) = -log_m sum_{p_i>0} p_i^q
//   phi(h)    = log_m sum_{active} E(N_i)^h
double base_curve(const WeightModel& m, CurveKind kind, double x, int row = -1);
// Closed-form derivatives of the same curves.
double derivative(const WeightModel& m, CurveKind kind, double x, int row = -1);

// Shorthands.
double T_of(const WeightModel& m, double q);
double T_row(const WeightModel& m, int i, double q);
double tau_nu(const WeightModel& m, double q);
double phi(const WeightModel& m, double h);
double entropy_dim(const WeightModel& m);  // dim(nu) in base m

// s T_i'(s) - T_i(s), the Legendre value T_i^*(T_i'(s)).
double Ti_star(const WeightModel& m, int i, double s);

// True iff T_i == 0 on every active row (E(N_i)=1 and V in {0,1} a.s.), the
// degenerate case with T = tau_nu = tau.
bool all_ti_zero(const WeightModel& m);

struct PhiMin {
  double h_star = 0;
  double value = 0;
  bool unique = true;
};
// Minimizes the convex phi over [0,1]; unique=false iff E(N_i)=1 on every
// active row (phi constant).
PhiMin phi_min(const WeightModel& m);

// G(q,s) = sum_active p_i^q m^{-q T_i(s)/s} and
// g(q,s) = sum_active p_i^q m^{-q T_i(s)/s} T_i^*(T_i'(s)).
// g is proportional to -dG/ds and nonincreasing in s.
double G_fn(const WeightModel& m, double q, double s);
double g_fn(const WeightModel& m, double q, double s);

enum class SBranch { AtQ, Interior, AtOne };
struct SPoint {
  double s = 1;
  SBranch branch = SBranch::AtOne;
  bool degenerate = false;  // all T_i identically zero
};
// Minimizer of G(q,.) over [q,1] for q in (0,1].
SPoint s_of_q(const WeightModel& m, double q);

struct CriticalExponents {
  double q_c = kInf;        // zero of q T'(q) - T(q) past 1, +inf sentinel if none
  double q_c_tilde = kInf;  // per the two-case definition, >= q_c
  // true iff q_c_tilde collapsed onto q_c because tau_nu(q_c) >= T(q_c); only
  // then does the linear extension q T'(q_c-) apply past q_c. When the
  // collapse comes from the empty-infimum convention the curves never meet
  // again and tau keeps following min(tau_nu, T).
  bool linear_extension = false;
  double h_star = 0;
  std::vector<double> p_prime;   // E(N_i)^{h*} normalized over active rows
  double tau_prime_0 = 0;
  int tau_prime_0_case = 1;      // 1, 2 or 3
  double s0 = std::numeric_limits<double>::quiet_NaN();  // case 3 only
  bool s0_warning = false;       // no sign change in the case-3 search
  double q_max = 0;              // scan window used for q_c / q_c_tilde
};
CriticalExponents critical_exponents(const WeightModel& m, double q_max);

struct TauValue {
  double value = 0;
  Branch branch = Branch::TauT;
};
// The three-branch projected spectrum, with the linear extension past q_c
// when q_c_tilde == q_c < inf, and an `Undefined` label past q_c_tilde when
// q_c_tilde > q_c.
TauValue tau(const WeightModel& m, double q, const CriticalExponents& ce);

// tau'(1) = min(T'(1), tau_nu'(1)).
double tau_prime_1(const WeightModel& m);

// One-sided derivative of tau taken along the given branch at q.
double tau_branch_derivative(const WeightModel& m, double q, Branch b,
                             const CriticalExponents& ce);

SpectrumCurve tau_curve(const WeightModel& m, const CriticalExponents& ce,
                        double q_min, double q_max, int steps);
SpectrumCurve base_curve_sampled(const WeightModel& m, CurveKind kind,
                                 double lo, double hi, int steps, int row = -1);

// Grid Legendre transform f*(alpha) = min over grid q of (alpha q - f(q)).
// An outer approximation of the true transform; exact up to grid resolution.
SpectrumCurve legendre(const SpectrumCurve& curve,
                       const std::vector<double>& alpha_grid);

struct DimensionReport {
  double dim_mu = 0;           // T'(1)
  double dim_nu = 0;           // entropy of p in base m
  double dim_pi_mu = 0;        // min of the two
  double dim_conditional = 0;  // max(0, dim_mu - dim_nu)
  double dim_pi_K = 0;         // min over [0,1] of phi
};
DimensionReport dims(const WeightModel& m);

// Fiber-count pressure P(q), natural-log units.
double pressure(const WeightModel& m, double q);

std::vector<double> make_grid(double lo, double hi, int steps);

} // namespace cascade
