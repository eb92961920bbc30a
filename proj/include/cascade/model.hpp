#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

// Weight-model families for the random m x m matrix W:
//   Discrete   — finite list of (probability, matrix) atoms, the joint law of W.
//   Lognormal  — i.i.d. entries m^{-2} exp(beta*G - beta^2/2), G standard normal.
//   Branching  — rows W_{i,j} = p_i * 1_{j <= N_i-1} / E(N_i) with N_i the
//                per-row offspring count on {0..m}.
enum class Family { Discrete, Lognormal, Branching };

struct Atom {
  double prob = 0;
  std::vector<double> w;  // row-major m x m, nonnegative
};

struct MarginalData {
  std::vector<double> p;        // p_i = E sum_j W_{i,j}
  std::vector<bool> active;     // p_i > 0
  std::vector<double> row_mean; // E(N_i), N_i = #{j : W_{i,j} > 0}
  double total_mean = 0;        // E(N)
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightModel {
  int m = 2;
  Family family = Family::Discrete;
  std::string name;

  std::vector<Atom> atoms;                      // Discrete
  double beta = 0;                              // Lognormal
  std::vector<double> row_p;                    // Branching: p vector
  std::vector<std::vector<double>> offspring;   // Branching: pmf of N_i on {0..m}

  MarginalData marg;  // cached by finalize()

  // Validates invariants and caches marginals. Throws ModelError.
  void finalize();

  double row_mean(int i) const { return marg.row_mean[i]; }
  bool active(int i) const { return marg.active[i]; }
  int active_count() const;
};

// Constructors for the common test models.
WeightModel make_lebesgue(int m);
WeightModel make_lognormal(int m, double beta);
WeightModel make_branching(const std::vector<double>& p,
                           const std::vector<std::vector<double>>& offspring);
// Branching rows with binomial offspring N_i ~ B(m, mean_i/m).
WeightModel make_branching_binomial(const std::vector<double>& p,
                                    const std::vector<double>& means);

enum class MomentKind { WFull, VRow };

// sum_{i,j} E(1_{W>0} W^q)  (WFull)  or  sum_j E(1_{V>0} V_{i,j}^q)  (VRow i).
// Exact for Discrete/Branching; Gaussian closed form for Lognormal.
double moment(const WeightModel& model, MomentKind kind, double q, int row = -1);

// d/dq of the corresponding moment sum (sum of E(1 W^q log W) terms).
double moment_dq(const WeightModel& model, MomentKind kind, double q, int row = -1);

// Tilted model W_q = m^{T(q)} 1_{W>0} W^q, q >= 0. Closed under each family:
// Discrete -> Discrete, Branching -> Branching (tilted p), Lognormal -> Lognormal(q*beta).
WeightModel tilt(const WeightModel& model, double q);

// P(N <= 1) where N counts the positive entries of W.
double prob_count_le_one(const WeightModel& model);

// Marginal law of one V-row (V_{i,j} = W_{i,j}/p_i) for the finite families;
// throws for Lognormal. Atoms with identical rows are merged.
struct RowLaw {
  double prob = 0;
  std::vector<double> v;  // length m
};
std::vector<RowLaw> row_law(const WeightModel& model, int row);

const MarginalData& marginals(const WeightModel& model);

} // namespace cascade
