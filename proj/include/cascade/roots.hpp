#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cascade/constants.hpp"

namespace cascade {

// Bisection on a bracketing interval [a,b] with f(a)*f(b) <= 0.
// Returns the midpoint of the final interval of width <= xtol.
inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double fa, double fb, double xtol = tol::bisect_x) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  while (b - a > xtol) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if (fm == 0.0) return m;
    if ((fa < 0) == (fm < 0)) { a = m; fa = fm; } else { b = m; fb = fm; }
  }
  return 0.5 * (a + b);
}

inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double xtol = tol::bisect_x) {
  return bisect(f, a, b, f(a), f(b), xtol);
}

// All sign-change zeros of f on [a,b], located by an n-point scan followed by
// bisection. If no sign change is found the scan is refined once (x4) before
// giving up; callers that require a root treat an empty result as "no zero".
inline std::vector<double> scan_zeros(const std::function<double(double)>& f,
                                      double a, double b,
                                      int n = tol::scan_points,
                                      bool refine = true) {
  std::vector<double> out;
  if (!(b > a)) return out;
  auto pass = [&](int points) {
    out.clear();
    double prev_x = a, prev_f = f(a);
    for (int k = 1; k <= points; ++k) {
      double x = a + (b - a) * k / points;
      double fx = f(x);
      if (prev_f == 0.0) out.push_back(prev_x);
      else if (fx != 0.0 && (prev_f < 0) != (fx < 0))
        out.push_back(bisect(f, prev_x, x, prev_f, fx));
      prev_x = x; prev_f = fx;
    }
    if (prev_f == 0.0) out.push_back(prev_x);
  };
  pass(n);
  if (out.empty() && refine) pass(n * tol::scan_refine);
  return out;
}

// First zero of f past `a`, if any.
inline std::optional<double> first_zero(const std::function<double(double)>& f,
                                        double a, double b,
                                        int n = tol::scan_points) {
  auto zs = scan_zeros(f, a, b, n);
  if (zs.empty()) return std::nullopt;
  return zs.front();
}

} // namespace cascade
