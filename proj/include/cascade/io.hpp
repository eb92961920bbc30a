#pragma once

#include <string>
#include <vector>

#include "cascade/criteria.hpp"
#include "cascade/simulate.hpp"
#include "cascade/spectra.hpp"
#include "cascade/transitions.hpp"

namespace cascade::io {

// Model-description document (JSON):
//   { "m": 2, "family": "discrete",  "atoms": [{"p": .., "w": [[..],[..]]}] }
//   { "m": 2, "family": "lognormal", "beta": 1.0 }
//   { "m": 2, "family": "branching", "p": [..], "offspring": [[..m+1..], ..] }
// Optional "name". All probabilities as decimal literals.
WeightModel load_model(const std::string& path);
WeightModel parse_model(const std::string& json_text, const std::string& fallback_name);
std::string model_json(const WeightModel& m);

// Curves: header "q,value,branch[,stderr]"; Legendre outputs: "alpha,value".
// Infinite values are written as "inf"/"-inf".
void write_curve_csv(const SpectrumCurve& curve, const std::string& path);

// Sample export "u,v,mass" (paths as base-m digit strings) and projection
// export "u,pi_mass,count".
void write_sample_csv(const CascadeSample& s, const std::string& path);
void write_projected_csv(const ProjectedMasses& p, const std::string& path);

std::string exponents_json(const CriticalExponents& ce);
std::string dims_json(const DimensionReport& d);
std::string transition_report_json(const PhaseTransitionReport& rep);
std::string classification_json(const ClassificationReport& rep);

std::string fmt(double v);  // shortest round-trip-ish decimal, inf-aware

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace cascade::io
