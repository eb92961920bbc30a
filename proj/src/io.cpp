#include "cascade/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cascade::io {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // trim to the shortest representation that round-trips
  for (int prec = 1; prec <= 16; ++prec) {
    char t[32];
    std::snprintf(t, sizeof t, "%.*g", prec, v);
    if (std::strtod(t, nullptr) == v) return t;
  }
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path);
  out << text;
}

WeightModel parse_model(const std::string& text, const std::string& fallback_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model parse error: ") + e.what());
  }
  WeightModel md;
  try {
    md.m = j.at("m").get<int>();
    md.name = j.value("name", fallback_name);
    std::string fam = j.at("family").get<std::string>();
    if (fam == "discrete") {
      md.family = Family::Discrete;
      for (const auto& ja : j.at("atoms")) {
        Atom a;
        a.prob = ja.at("p").get<double>();
        for (const auto& row : ja.at("w"))
          for (const auto& w : row) a.w.push_back(w.get<double>());
        md.atoms.push_back(a);
      }
    } else if (fam == "lognormal") {
      md.family = Family::Lognormal;
      md.beta = j.at("beta").get<double>();
    } else if (fam == "branching") {
      md.family = Family::Branching;
      md.row_p = j.at("p").get<std::vector<double>>();
      md.offspring = j.at("offspring").get<std::vector<std::vector<double>>>();
    } else {
      throw ModelError("unknown family '" + fam + "'");
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("model parse error: ") + e.what());
  }
  md.finalize();
  return md;
}

WeightModel load_model(const std::string& path) {
  auto stem = [&] {
    size_t a = path.find_last_of("/\\");
    std::string base = a == std::string::npos ? path : path.substr(a + 1);
    size_t d = base.find_last_of('.');
    return d == std::string::npos ? base : base.substr(0, d);
  }();
  return parse_model(read_text(path), stem);
}

std::string model_json(const WeightModel& m) {
  json j;
  j["m"] = m.m;
  j["name"] = m.name;
  switch (m.family) {
    case Family::Discrete: {
      j["family"] = "discrete";
      json atoms = json::array();
      for (const auto& a : m.atoms) {
        json rows = json::array();
        for (int i = 0; i < m.m; ++i)
          rows.push_back(std::vector<double>(a.w.begin() + i * m.m,
                                             a.w.begin() + (i + 1) * m.m));
        atoms.push_back({{"p", a.prob}, {"w", rows}});
      }
      j["atoms"] = atoms;
      break;
    }
    case Family::Lognormal:
      j["family"] = "lognormal";
      j["beta"] = m.beta;
      break;
    case Family::Branching:
      j["family"] = "branching";
      j["p"] = m.row_p;
      j["offspring"] = m.offspring;
      break;
  }
  return j.dump(2);
}

namespace {

std::string path_string(std::uint64_t idx, int m, int depth) {
  std::string s(depth, '0');
  for (int k = depth - 1; k >= 0; --k) {
    s[k] = (char)('0' + (int)(idx % m));
    idx /= m;
  }
  return s;
}

}  // namespace

void write_curve_csv(const SpectrumCurve& curve, const std::string& path) {
  std::ostringstream os;
  bool legendre_kind = !curve.kind.empty() && curve.kind.back() == '*';
  bool with_se = !curve.stderrs.empty();
  if (legendre_kind) os << "alpha,value\n";
  else if (with_se) os << "q,value,branch,stderr\n";
  else os << "q,value,branch\n";
  for (size_t k = 0; k < curve.grid.size(); ++k) {
    os << fmt(curve.grid[k]) << ',' << fmt(curve.values[k]);
    if (!legendre_kind) {
      os << ',' << (k < curve.branches.size() ? branch_name(curve.branches[k]) : "");
      if (with_se) os << ',' << fmt(curve.stderrs[k]);
    }
    os << '\n';
  }
  write_text(path, os.str());
}

void write_sample_csv(const CascadeSample& s, const std::string& path) {
  std::ostringstream os;
  os << "u,v,mass\n";
  for (size_t k = 0; k < s.mass.size(); ++k)
    os << path_string(s.u[k], s.m, s.depth) << ','
       << path_string(s.v[k], s.m, s.depth) << ',' << fmt(s.mass[k]) << '\n';
  write_text(path, os.str());
}

void write_projected_csv(const ProjectedMasses& p, const std::string& path) {
  std::ostringstream os;
  os << "u,pi_mass,count\n";
  for (size_t u = 0; u < p.pi.size(); ++u)
    os << path_string(u, p.m, p.depth) << ',' << fmt(p.pi[u]) << ',' << p.counts[u]
       << '\n';
  write_text(path, os.str());
}

namespace {

json inf_aware(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json(nullptr);
  return json(v);
}

}  // namespace

std::string exponents_json(const CriticalExponents& ce) {
  json j;
  j["q_c"] = inf_aware(ce.q_c);
  j["q_c_tilde"] = inf_aware(ce.q_c_tilde);
  j["linear_extension"] = ce.linear_extension;
  j["h_star"] = ce.h_star;
  j["p_prime"] = ce.p_prime;
  j["tau_prime_0"] = ce.tau_prime_0;
  j["tau_prime_0_case"] = ce.tau_prime_0_case == 1   ? "i"
                          : ce.tau_prime_0_case == 2 ? "ii"
                                                     : "iii";
  j["s0"] = inf_aware(ce.s0);
  j["s0_warning"] = ce.s0_warning;
  j["q_max"] = ce.q_max;
  return j.dump(2);
}

std::string dims_json(const DimensionReport& d) {
  json j;
  j["dim_mu"] = d.dim_mu;
  j["dim_nu"] = d.dim_nu;
  j["dim_pi_mu"] = d.dim_pi_mu;
  j["dim_conditional"] = d.dim_conditional;
  j["dim_pi_K"] = d.dim_pi_K;
  return j.dump(2);
}

std::string transition_report_json(const PhaseTransitionReport& rep) {
  json j;
  j["identical_curves"] = rep.crossings.identical_curves;
  j["crossings"] = json::array();
  for (const auto& c : rep.crossings.list)
    j["crossings"].push_back({{"q", c.q}, {"transversal", c.transversal}});
  j["transitions"] = json::array();
  for (const auto& t : rep.transitions)
    j["transitions"].push_back({{"q", t.q},
                                {"order", t.first_order ? "first" : "second-or-higher"},
                                {"left_branch", branch_name(t.left)},
                                {"right_branch", branch_name(t.right)},
                                {"d_left", t.d_left},
                                {"d_right", t.d_right}});
  j["segments"] = json::array();
  for (const auto& s : rep.segments)
    j["segments"].push_back(
        {{"lo", s.lo}, {"hi", s.hi}, {"branch", branch_name(s.label)}});
  j["exponents"] = json::parse(exponents_json(rep.exponents));
  return j.dump(2);
}

std::string classification_json(const ClassificationReport& rep) {
  json j;
  j["regime"] = rep.absolutely_continuous ? "AC" : "singular";
  j["at_boundary"] = rep.at_boundary;
  j["dims"] = json::parse(dims_json(rep.dims));
  if (rep.density_ls.empty) {
    j["density_Ls"] = json(nullptr);
  } else {
    j["density_Ls"] = {{"lo", 1.0},
                       {"lo_open", true},
                       {"hi", rep.density_ls.hi},
                       {"hi_closed", rep.density_ls.hi_closed}};
  }
  j["equivalence"] = witness_name(rep.equivalence);
  if (rep.equivalence == WitnessStatus::Verified) j["witness_c"] = rep.witness_c;
  j["dgf_unique"] = rep.dgf_unique;
  j["degenerate_flags"] = {{"all_Ti_zero", rep.degenerate.all_ti_zero},
                           {"property_P", rep.degenerate.property_p}};
  return j.dump(2);
}

} // namespace cascade::io
