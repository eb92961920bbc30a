#pragma once

// Tolerance hierarchy used across the library. Identities are checked
// tighter than roots, roots tighter than curvature tests.
namespace cascade::tol {

inline constexpr double identity    = 1e-9;   // algebraic identities, normalizations
inline constexpr double root        = 1e-8;   // reported accuracy of located roots
inline constexpr double concavity   = 1e-7;   // midpoint concavity slack
inline constexpr double bisect_x    = 1e-10;  // bisection stopping width
inline constexpr double atom_prob   = 1e-12;  // atom probabilities sum to 1
inline constexpr double transversal = 1e-6;   // derivative gap for a transversal crossing

inline constexpr int scan_points    = 256;    // sign-scan grid for root bracketing
inline constexpr int segment_points = 512;    // branch-label scan for segment boundaries
inline constexpr int scan_refine    = 4;      // one automatic refinement factor

inline constexpr long live_node_warn  = 10'000'000;  // sparse cascade size warning
inline constexpr long live_node_limit = 200'000'000; // hard sampling cap
inline constexpr int  survival_attempts = 10'000;    // resampling cap when conditioning
inline constexpr double enum_budget   = 1e7;         // enumeration oracle size guard

} // namespace cascade::tol
