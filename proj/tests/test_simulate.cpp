#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascade/model.hpp"
#include "cascade/rng.hpp"
#include "cascade/simulate.hpp"

using namespace cascade;

namespace {

const double kLn2 = std::log(2.0);

WeightModel ex42() { return make_branching_binomial({0.8, 0.2}, {0.6, 1.8}); }

// hand-enumerable oracle model: p = (1/2, 1/2), N_0 uniform on {1,2}, N_1 = 1
WeightModel oracle_model() {
  return make_branching({0.5, 0.5}, {{0.0, 0.5, 0.5}, {0.0, 1.0, 0.0}});
}

}  // namespace

TEST_CASE("the Lebesgue cascade realizes deterministic masses") {
  auto s = sample_cascade(make_lebesgue(2), 3, 42);
  CHECK(s.survived);
  REQUIRE(s.mass.size() == 64);
  for (double x : s.mass) CHECK(x == doctest::Approx(std::pow(0.25, 3)).epsilon(1e-15));
}

TEST_CASE("samples are deterministic in (model, depth, seed)") {
  auto md = ex42();
  auto a = sample_cascade(md, 8, 7);
  auto b = sample_cascade(md, 8, 7);
  CHECK(a.mass == b.mass);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  auto c = sample_cascade(md, 8, 8);
  CHECK(a.mass != c.mass);
}

TEST_CASE("masses factor into path weight products") {
  auto md = ex42();
  const int depth = 6;
  auto s = sample_cascade(md, depth, 123);
  REQUIRE(s.survived);
  size_t step = std::max<size_t>(1, s.mass.size() / 100);
  for (size_t k = 0; k < s.mass.size(); k += step) {
    double prod = 1;
    std::uint64_t key = rng::root_key(123);
    for (int l = 0; l < depth; ++l) {
      int iu = (int)((s.u[k] >> (depth - 1 - l)) & 1);
      int iv = (int)((s.v[k] >> (depth - 1 - l)) & 1);
      auto w = draw_weight_matrix(md, key);
      prod *= w[iu * md.m + iv];
      key = rng::child_key(key, (std::uint64_t)(iu * md.m + iv));
    }
    CHECK(s.mass[k] == doctest::Approx(prod).epsilon(1e-12));
  }
}

TEST_CASE("subcritical cascades go extinct") {
  auto md = make_branching_binomial({0.5, 0.5}, {0.4, 0.5});  // E(N) = 0.9
  int extinct = 0;
  for (int r = 0; r < 20; ++r)
    if (!sample_cascade(md, 20, 1000 + r).survived) ++extinct;
  CHECK(extinct >= 19);  // survival to depth 20 is vanishingly rare
}

TEST_CASE("projection conserves mass and counts positives") {
  auto s = sample_cascade(make_lebesgue(2), 2, 5);
  auto pm = project(s);
  REQUIRE(pm.pi.size() == 4);
  for (double x : pm.pi) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
  for (auto n : pm.counts) CHECK(n == 4);
  double total = std::accumulate(s.mass.begin(), s.mass.end(), 0.0);
  double ptotal = std::accumulate(pm.pi.begin(), pm.pi.end(), 0.0);
  CHECK(total == doctest::Approx(ptotal).epsilon(1e-14));
}

TEST_CASE("depth-1 projected masses follow the branching row law") {
  auto md = ex42();
  auto s = sample_cascade(md, 1, 31);
  auto pm = project(s);
  auto w = draw_weight_matrix(md, rng::root_key(31));
  for (int i = 0; i < 2; ++i) {
    int n = 0;
    double sum = 0;
    for (int j = 0; j < 2; ++j) {
      if (w[i * 2 + j] > 0) ++n;
      sum += w[i * 2 + j];
    }
    CHECK(pm.counts[i] == n);
    CHECK(pm.pi[i] == doctest::Approx(sum).epsilon(1e-15));
    // pi mass = p_i N_i / E(N_i) for the realized N_i
    CHECK(pm.pi[i] ==
          doctest::Approx(md.marg.p[i] * n / md.row_mean(i)).epsilon(1e-12));
  }
}

TEST_CASE("partition sums of the Lebesgue cascade are exact") {
  for (int n : {2, 4, 6}) {
    auto pm = project(sample_cascade(make_lebesgue(2), n, 9));
    auto grid = make_grid(0.0, 3.0, 13);
    auto sums = partition_sums(pm, grid);
    for (size_t k = 0; k < grid.size(); ++k)
      CHECK(sums[k] == doctest::Approx(std::pow(2.0, n * (1 - grid[k]))).epsilon(1e-10));
  }
}

TEST_CASE("S_n(1) is the total mass") {
  auto pm = project(sample_cascade(ex42(), 9, 17));
  double y = std::accumulate(pm.pi.begin(), pm.pi.end(), 0.0);
  CHECK(partition_sums(pm, {1.0})[0] == doctest::Approx(y).epsilon(1e-12));
}

TEST_CASE("per-sample subadditivity of partition sums") {
  // S_n(q) <= S_n(q')^{q/q'} for q >= q' > 0, deterministically on every sample
  auto mds = std::vector<WeightModel>{ex42(), make_lognormal(2, 1.0),
                                      make_branching_binomial({0.3, 0.7}, {0.25, 2.0})};
  for (const auto& md : mds)
    for (int r = 0; r < 5; ++r) {
      auto levels = sample_projected_levels(md, {7}, 900 + r, 1);
      if (!levels[0].survived) continue;
      auto s = partition_sums(levels[0], {0.5, 1.0, 1.5, 2.0, 3.0});
      std::vector<double> qs = {0.5, 1.0, 1.5, 2.0, 3.0};
      for (size_t a = 0; a < qs.size(); ++a)
        for (size_t b = 0; b < a; ++b)
          CHECK(s[a] <= std::pow(s[b], qs[a] / qs[b]) * (1 + 1e-12));
    }
}

TEST_CASE("streaming levels agree with materialized samples") {
  auto md = ex42();
  auto levels = sample_projected_levels(md, {3, 5}, 77, 1);
  for (const auto& pm : levels) {
    auto direct = project(sample_cascade(md, pm.depth, 77));
    CHECK(pm.pi == direct.pi);
    CHECK(pm.counts == direct.counts);
  }
}

TEST_CASE("empirical tau of the Lebesgue cascade is exactly q - 1") {
  EmpiricalOptions opt;
  opt.replicas = 3;
  opt.seed = 5;
  auto c = empirical_tau(make_lebesgue(2), {4, 5, 6, 7}, {0.5, 1.5, 2.0}, opt);
  CHECK(c.values[0] == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(c.values[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(c.values[2] == doctest::Approx(1.0).epsilon(1e-10));
  for (double se : c.stderrs) CHECK(se == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("branching pressure of the Lebesgue cascade is (1+q) log 2") {
  EmpiricalOptions opt;
  opt.replicas = 2;
  opt.seed = 5;
  auto c = branching_pressure(make_lebesgue(2), {4, 5, 6}, {0.0, 1.0, 2.0}, opt);
  for (size_t k = 0; k < c.grid.size(); ++k)
    CHECK(c.values[k] == doctest::Approx((1 + c.grid[k]) * kLn2).epsilon(1e-10));
}

TEST_CASE("subunit fiber counts grow subexponentially") {
  // all E(N_i) <= 1: max_u log N(u) / n stays near 0 on surviving fibers
  auto md = make_branching({0.5, 0.5}, {{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}});
  auto levels = sample_projected_levels(md, {12}, 3, 1);
  REQUIRE(levels[0].survived);
  std::int64_t maxc = 0;
  for (auto n : levels[0].counts) maxc = std::max(maxc, n);
  CHECK(std::log((double)maxc) / 12.0 < 0.1);
}

TEST_CASE("coarse spectrum of the Lebesgue cascade occupies one bin at alpha = 1") {
  auto pm = project(sample_cascade(make_lebesgue(2), 6, 3));
  auto cs = coarse_spectrum(pm, 8);
  int occupied = 0;
  for (long c : cs.counts) occupied += c > 0;
  CHECK(occupied == 1);
  CHECK(cs.edges.front() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("deterministic full rows give exact binomial type-class counts") {
  // N_i = 2 a.s. makes every projected mass nu(u) exactly, so the alpha
  // histogram counts the type classes: C(n, k) words with k letters of the
  // rarer row.
  auto md = make_branching({0.8, 0.2}, {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}});
  const int n = 12;
  auto levels = sample_projected_levels(md, {n}, 3, 1);
  REQUIRE(levels[0].survived);
  // alpha(u) is monotone in the letter count; use exactly n+1 bins
  auto cs = coarse_spectrum(levels[0], n + 1);
  REQUIRE(cs.counts.size() == (size_t)(n + 1));
  double binom = 1;
  for (int k = 0; k <= n; ++k) {
    CHECK((double)cs.counts[k] == binom);  // C(12, k)
    binom = binom * (n - k) / (k + 1);
  }
}

TEST_CASE("coarse spectrum mass concentrates on the derivative range") {
  // The occupied histogram reaches far beyond tau'(0+) at finite depth
  // (exponentially rare near-dead fibers), so the support check is read in
  // mass: >= 95% of the projected mass sits inside the analytic exponent
  // window, in >= 95% of replicas.
  auto md = ex42();
  auto ce = critical_exponents(md, 4.0);
  double lo = derivative(md, CurveKind::T, ce.q_c) - 0.2;  // tau'(q~_c-)
  double hi = ce.tau_prime_0 + 0.2;
  const double lm = std::log(2.0);
  int ok = 0, total = 0;
  for (int r = 0; r < 20; ++r) {
    auto levels = sample_projected_levels(md, {14}, 4000 + r, 1);
    if (!levels[0].survived) continue;
    ++total;
    double inside = 0, all = 0;
    for (double x : levels[0].pi) {
      if (!(x > 0)) continue;
      double alpha = std::log(x) / (-14 * lm);
      all += x;
      if (alpha >= lo && alpha <= hi) inside += x;
    }
    ok += inside >= 0.95 * all;
  }
  CHECK(total >= 15);
  CHECK((double)ok / total >= 0.95);
}

TEST_CASE("exact enumeration reproduces the hand-computed projection moment") {
  auto res = exact_enumeration(oracle_model(), 1, 2.0);
  CHECK(res.e_proj == doctest::Approx(19.0 / 36.0).epsilon(1e-14));
  // and the 2-D identity at the same time
  CHECK(res.e_2d ==
        doctest::Approx(std::pow(2.0, -T_of(oracle_model(), 2.0))).epsilon(1e-14));
}

TEST_CASE("the 2-D identity holds at every small depth") {
  auto md = oracle_model();
  for (int n : {1, 2, 3})
    for (double q : {0.5, 1.0, 1.5, 2.0, 3.0}) {
      auto res = exact_enumeration(md, n, q);
      CHECK(res.e_2d ==
            doctest::Approx(std::pow(2.0, -n * T_of(md, q))).epsilon(1e-12));
    }
}

TEST_CASE("projection moments respect the two-sided bounds") {
  auto md = oracle_model();
  auto ce = critical_exponents(md, 4.0);
  for (int n : {1, 2, 3}) {
    for (double q : {1.5, 2.0, 3.0}) {
      auto res = exact_enumeration(md, n, q);
      double lower = std::max(std::pow(2.0, -n * tau_nu(md, q)),
                              std::pow(2.0, -n * T_of(md, q)));
      CHECK(res.e_proj >= lower - 1e-12);
    }
    for (double q : {0.3, 0.7, 1.0}) {
      auto res = exact_enumeration(md, n, q);
      CHECK(res.e_proj <= std::pow(2.0, -n * tau(md, q, ce).value) + 1e-12);
    }
  }
}

TEST_CASE("enumeration agrees with Monte Carlo at small depth") {
  auto md = oracle_model();
  const int reps = 4000;
  for (double q : {0.5, 2.0}) {
    double expect = exact_enumeration(md, 2, q).e_proj;
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
      auto pm = project(sample_cascade(md, 2, 50000 + r));
      vals.push_back(partition_sums(pm, {q})[0]);
    }
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / reps;
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double se = std::sqrt(var / (reps - 1) / reps);
    CHECK(std::abs(mean - expect) <= 3 * se + 1e-12);
  }
}

TEST_CASE("enumeration rejects lognormal models and oversized requests") {
  CHECK_THROWS_AS(exact_enumeration(make_lognormal(2, 1.0), 1, 2.0), SimulateError);
  auto md = make_branching_binomial({0.25, 0.25, 0.25, 0.25},
                                    {2.0, 2.5, 3.0, 3.5});
  CHECK_THROWS_AS(exact_enumeration(md, 3, 1.7), SimulateError);  // budget guard
}

TEST_CASE("deterministic full rows keep the environment martingale at 1") {
  auto md = make_lebesgue(2);
  auto em = env_martingale(md, {0.5, 0.5}, 8, 11, 12);
  for (double x : em.trajectory) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(em.criterion == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(em.uniformly_integrable);
}

TEST_CASE("the UI criterion value matches the closed form on branching rows") {
  auto md = ex42();
  auto em = env_martingale(md, {0.5, 0.5}, 4, 1, 2);
  double expect = 0.5 * std::log2(0.6) + 0.5 * std::log2(1.8);
  CHECK(em.criterion == doctest::Approx(expect).epsilon(1e-12));
  CHECK(em.uniformly_integrable);  // 0.5*log2(1.08) > 0
}

TEST_CASE("subcritical environment martingales trend to zero") {
  // the branching example dies outright; check its verdict only
  auto em0 = env_martingale(ex42(), {0.8, 0.2}, 6, 1, 2);
  CHECK_FALSE(em0.uniformly_integrable);
  CHECK(em0.criterion == doctest::Approx(-0.4199733).epsilon(1e-6));

  // positive-weight subcritical model: the median decays instead of dying
  auto md = make_lognormal(2, 1.3);  // sum p_i T_i'(1) = 1 - 1.69/(2 ln 2) < 0
  std::vector<double> early, late;
  for (int r = 0; r < 200; ++r) {
    auto em = env_martingale(md, {0.5, 0.5}, 12, 300 + r, 600 + r);
    CHECK_FALSE(em.uniformly_integrable);
    early.push_back(em.trajectory[2]);
    late.push_back(em.trajectory[11]);
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  CHECK(median(late) < median(early));
}

TEST_CASE("environments outside the active rows are rejected") {
  auto md = make_branching_binomial({1.0, 0.0}, {1.5, 1.0});
  CHECK_THROWS_AS(env_martingale(md, {0.5, 0.5}, 4, 1, 2), SimulateError);
}

TEST_CASE("lognormal kernel moments match the closed form at depth 1") {
  // E[S_1(2)] = 2 E[(W00+W01)^2] = 2(2 E W^2 + 2 (E W)^2), W entries iid
  auto md = make_lognormal(2, 1.0);
  const int reps = 20000;
  double mean = 0, m2 = 0;
  for (int r = 0; r < reps; ++r) {
    auto levels = sample_projected_levels(md, {1}, 7000 + r, 1);
    double s = levels[0].pi[0] * levels[0].pi[0] + levels[0].pi[1] * levels[0].pi[1];
    mean += s;
    m2 += s * s;
  }
  mean /= reps;
  m2 /= reps;
  double se = std::sqrt((m2 - mean * mean) / reps);
  double ew2 = std::exp(1.0) / 16.0;  // E W^2 = m^-4 e^{beta^2}
  double expect = 2 * (2 * ew2 + 2.0 / 16.0);
  CHECK(std::abs(mean - expect) <= 3 * se);
}

TEST_CASE("lognormal kernel conserves mass in expectation across depths") {
  auto md = make_lognormal(2, 1.0);
  const int reps = 2000;
  for (int depth : {6, 10}) {
    double mean = 0, m2 = 0;
    for (int r = 0; r < reps; ++r) {
      auto levels = sample_projected_levels(md, {depth}, 9000 + r, 1);
      double y =
          std::accumulate(levels[0].pi.begin(), levels[0].pi.end(), 0.0);
      mean += y;
      m2 += y * y;
    }
    mean /= reps;
    m2 /= reps;
    double se = std::sqrt((m2 - mean * mean) / reps);
    CHECK(std::abs(mean - 1.0) <= 4 * se + 1e-3);
  }
}

TEST_CASE("projection requests beyond the vector budget fail") {
  CHECK_THROWS_AS(sample_projected_levels(make_lebesgue(2), {30}, 1, 1),
                  SimulateError);
}
