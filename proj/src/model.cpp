#include "cascade/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "cascade/constants.hpp"

namespace cascade {

namespace {

double binom_coeff(int n, int k) {
  double c = 1;
  for (int t = 0; t < k; ++t) c = c * (n - t) / (t + 1);
  return c;
}

}  // namespace

int WeightModel::active_count() const {
  int n = 0;
  for (bool a : marg.active) n += a;
  return n;
}

void WeightModel::finalize() {
  if (m < 2) throw ModelError("base m must be >= 2, got " + std::to_string(m));
  marg.p.assign(m, 0.0);
  marg.active.assign(m, false);
  marg.row_mean.assign(m, 0.0);
  marg.total_mean = 0;

  switch (family) {
    case Family::Discrete: {
      if (atoms.empty()) throw ModelError("discrete model has an empty atom list");
      double psum = 0;
      for (const auto& a : atoms) {
        if (a.prob <= 0 || a.prob > 1)
          throw ModelError("atom probability outside (0,1]");
        if ((int)a.w.size() != m * m)
          throw ModelError("atom matrix is not m x m");
        for (double w : a.w)
          if (w < 0 || !std::isfinite(w)) throw ModelError("negative or non-finite weight");
        psum += a.prob;
      }
      if (std::abs(psum - 1.0) > tol::atom_prob) {
        std::ostringstream os;
        os << "atom probabilities sum to " << psum << " (|dev| = "
           << std::abs(psum - 1.0) << " > 1e-12)";
        throw ModelError(os.str());
      }
      for (const auto& a : atoms)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            double w = a.w[i * m + j];
            marg.p[i] += a.prob * w;
            if (w > 0) marg.row_mean[i] += a.prob;
          }
      break;
    }
    case Family::Lognormal: {
      if (beta < 0 || !std::isfinite(beta))
        throw ModelError("lognormal beta must be a nonnegative real");
      for (int i = 0; i < m; ++i) {
        marg.p[i] = 1.0 / m;
        marg.row_mean[i] = m;  // every entry is a.s. positive
      }
      break;
    }
    case Family::Branching: {
      if ((int)row_p.size() != m) throw ModelError("branching p vector is not length m");
      if ((int)offspring.size() != m) throw ModelError("branching needs one offspring pmf per row");
      double ps = 0;
      for (int i = 0; i < m; ++i) {
        if (row_p[i] < 0) throw ModelError("negative row probability");
        ps += row_p[i];
        const auto& pmf = offspring[i];
        if ((int)pmf.size() != m + 1)
          throw ModelError("offspring pmf of row " + std::to_string(i) + " is not on {0..m}");
        double s = 0, mean = 0;
        for (int k = 0; k <= m; ++k) {
          if (pmf[k] < 0) throw ModelError("negative offspring probability");
          s += pmf[k];
          mean += k * pmf[k];
        }
        if (std::abs(s - 1.0) > tol::atom_prob)
          throw ModelError("offspring pmf of row " + std::to_string(i) + " does not sum to 1");
        marg.p[i] = row_p[i];
        marg.row_mean[i] = mean;
        if (row_p[i] > 0 && mean <= 0)
          throw ModelError("row " + std::to_string(i) + " has p_i > 0 but E(N_i) = 0");
      }
      if (std::abs(ps - 1.0) > tol::identity)
        throw ModelError("branching p vector does not sum to 1");
      break;
    }
  }

  for (int i = 0; i < m; ++i) {
    marg.active[i] = marg.p[i] > 0;
    if (marg.active[i]) marg.total_mean += marg.row_mean[i];
    else marg.row_mean[i] = 0;
  }

  double norm = std::accumulate(marg.p.begin(), marg.p.end(), 0.0);
  if (std::abs(norm - 1.0) > tol::identity) {
    std::ostringstream os;
    os << "normalization violated: E sum W = " << norm << " (|dev| = "
       << std::abs(norm - 1.0) << " > 1e-9)";
    throw ModelError(os.str());
  }
  if (prob_count_le_one(*this) >= 1.0 - tol::atom_prob)
    throw ModelError("degenerate model: P(N in {0,1}) = 1");
}

WeightModel make_lebesgue(int m) {
  WeightModel md;
  md.m = m;
  md.family = Family::Discrete;
  md.name = "lebesgue";
  Atom a;
  a.prob = 1.0;
  a.w.assign(m * m, 1.0 / (m * m));
  md.atoms.push_back(a);
  md.finalize();
  return md;
}

WeightModel make_lognormal(int m, double beta) {
  WeightModel md;
  md.m = m;
  md.family = Family::Lognormal;
  md.beta = beta;
  md.name = "lognormal(beta=" + std::to_string(beta) + ")";
  md.finalize();
  return md;
}

WeightModel make_branching(const std::vector<double>& p,
                           const std::vector<std::vector<double>>& offspring) {
  WeightModel md;
  md.m = (int)p.size();
  md.family = Family::Branching;
  md.row_p = p;
  md.offspring = offspring;
  md.name = "branching";
  md.finalize();
  return md;
}

WeightModel make_branching_binomial(const std::vector<double>& p,
                                    const std::vector<double>& means) {
  int m = (int)p.size();
  std::vector<std::vector<double>> off(m);
  for (int i = 0; i < m; ++i) {
    double theta = means[i] / m;
    off[i].resize(m + 1);
    for (int k = 0; k <= m; ++k)
      off[i][k] = binom_coeff(m, k) * std::pow(theta, k) * std::pow(1 - theta, m - k);
  }
  return make_branching(p, off);
}

double moment(const WeightModel& md, MomentKind kind, double q, int row) {
  const auto& mg = md.marg;
  if (kind == MomentKind::VRow) {
    if (row < 0 || row >= md.m) throw ModelError("V-row index out of range");
    if (!mg.active[row])
      throw ModelError("V-row moment requested for inactive row " + std::to_string(row));
  }
  switch (md.family) {
    case Family::Discrete: {
      double s = 0;
      if (kind == MomentKind::WFull) {
        for (const auto& a : md.atoms)
          for (double w : a.w)
            if (w > 0) s += a.prob * std::pow(w, q);
      } else {
        for (const auto& a : md.atoms)
          for (int j = 0; j < md.m; ++j) {
            double v = a.w[row * md.m + j] / mg.p[row];
            if (v > 0) s += a.prob * std::pow(v, q);
          }
      }
      return s;
    }
    case Family::Lognormal: {
      // E(W^q) = m^{-2q} exp(beta^2 q(q-1)/2) per entry; V = mW/p_i scales by m^q.
      double g = std::exp(0.5 * md.beta * md.beta * q * (q - 1));
      if (kind == MomentKind::WFull)
        return md.m * md.m * std::pow((double)md.m, -2 * q) * g;
      return md.m * std::pow((double)md.m, -q) * g;
    }
    case Family::Branching: {
      if (kind == MomentKind::WFull) {
        double s = 0;
        for (int i = 0; i < md.m; ++i)
          if (mg.active[i])
            s += std::pow(mg.p[i], q) * std::pow(mg.row_mean[i], 1 - q);
        return s;
      }
      return std::pow(mg.row_mean[row], 1 - q);
    }
  }
  throw ModelError("unreachable");
}

double moment_dq(const WeightModel& md, MomentKind kind, double q, int row) {
  const auto& mg = md.marg;
  if (kind == MomentKind::VRow && (row < 0 || row >= md.m || !mg.active[row]))
    throw ModelError("V-row derivative requested for inactive row");
  switch (md.family) {
    case Family::Discrete: {
      double s = 0;
      if (kind == MomentKind::WFull) {
        for (const auto& a : md.atoms)
          for (double w : a.w)
            if (w > 0) s += a.prob * std::pow(w, q) * std::log(w);
      } else {
        for (const auto& a : md.atoms)
          for (int j = 0; j < md.m; ++j) {
            double v = a.w[row * md.m + j] / mg.p[row];
            if (v > 0) s += a.prob * std::pow(v, q) * std::log(v);
          }
      }
      return s;
    }
    case Family::Lognormal: {
      double lm = std::log((double)md.m);
      double b2 = md.beta * md.beta;
      if (kind == MomentKind::WFull)
        return moment(md, kind, q) * (-2 * lm + 0.5 * b2 * (2 * q - 1));
      return moment(md, kind, q, row) * (-lm + 0.5 * b2 * (2 * q - 1));
    }
    case Family::Branching: {
      if (kind == MomentKind::WFull) {
        double s = 0;
        for (int i = 0; i < md.m; ++i)
          if (mg.active[i])
            s += std::pow(mg.p[i], q) * std::pow(mg.row_mean[i], 1 - q) *
                 (std::log(mg.p[i]) - std::log(mg.row_mean[i]));
        return s;
      }
      return -std::log(mg.row_mean[row]) * std::pow(mg.row_mean[row], 1 - q);
    }
  }
  throw ModelError("unreachable");
}

WeightModel tilt(const WeightModel& md, double q) {
  if (q < 0) throw ModelError("tilt requires q >= 0");
  double s = moment(md, MomentKind::WFull, q);
  if (!(s > 0) || !std::isfinite(s))
    throw ModelError("tilt: T(q) is not finite (moment sum diverges or vanishes)");
  // m^{T(q)} = 1/s
  double scale = 1.0 / s;

  WeightModel out;
  out.m = md.m;
  out.name = md.name + "|tilt(" + std::to_string(q) + ")";
  switch (md.family) {
    case Family::Discrete: {
      out.family = Family::Discrete;
      out.atoms = md.atoms;
      for (auto& a : out.atoms)
        for (double& w : a.w) w = w > 0 ? scale * std::pow(w, q) : 0.0;
      break;
    }
    case Family::Lognormal: {
      out.family = Family::Lognormal;
      out.beta = q * md.beta;
      break;
    }
    case Family::Branching: {
      out.family = Family::Branching;
      out.offspring = md.offspring;
      out.row_p.assign(md.m, 0.0);
      for (int i = 0; i < md.m; ++i)
        if (md.marg.active[i])
          out.row_p[i] = scale * std::pow(md.marg.p[i], q) *
                         std::pow(md.marg.row_mean[i], 1 - q);
      break;
    }
  }
  out.finalize();
  return out;
}

double prob_count_le_one(const WeightModel& md) {
  switch (md.family) {
    case Family::Discrete: {
      double s = 0;
      for (const auto& a : md.atoms) {
        int n = 0;
        for (double w : a.w) n += w > 0;
        if (n <= 1) s += a.prob;
      }
      return s;
    }
    case Family::Lognormal:
      return 0.0;
    case Family::Branching: {
      // N = sum over active rows of N_i, rows independent.
      double p_all0 = 1, p_exactly1 = 0;
      for (int i = 0; i < md.m; ++i) {
        if (!(md.row_p[i] > 0)) continue;
        p_exactly1 = p_exactly1 * md.offspring[i][0] + p_all0 * md.offspring[i][1];
        p_all0 *= md.offspring[i][0];
      }
      return p_all0 + p_exactly1;
    }
  }
  throw ModelError("unreachable");
}

std::vector<RowLaw> row_law(const WeightModel& md, int row) {
  if (row < 0 || row >= md.m) throw ModelError("row index out of range");
  if (!md.marg.active[row]) throw ModelError("row_law of inactive row");
  std::vector<RowLaw> out;
  switch (md.family) {
    case Family::Discrete: {
      std::map<std::vector<double>, double> merged;
      for (const auto& a : md.atoms) {
        std::vector<double> v(md.m);
        for (int j = 0; j < md.m; ++j) v[j] = a.w[row * md.m + j] / md.marg.p[row];
        merged[v] += a.prob;
      }
      for (auto& [v, p] : merged) out.push_back({p, v});
      return out;
    }
    case Family::Branching: {
      double val = 1.0 / md.marg.row_mean[row];
      for (int k = 0; k <= md.m; ++k) {
        if (md.offspring[row][k] <= 0) continue;
        RowLaw rl;
        rl.prob = md.offspring[row][k];
        rl.v.assign(md.m, 0.0);
        for (int j = 0; j < k; ++j) rl.v[j] = val;
        out.push_back(rl);
      }
      return out;
    }
    case Family::Lognormal:
      throw ModelError("row_law is only defined for finite families");
  }
  throw ModelError("unreachable");
}

const MarginalData& marginals(const WeightModel& model) { return model.marg; }

} // namespace cascade
