#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cascade/io.hpp"
#include "cascade/model.hpp"
#include "cascade/spectra.hpp"

using namespace cascade;

namespace {

WeightModel ex42() { return make_branching_binomial({0.8, 0.2}, {0.6, 1.8}); }

std::vector<WeightModel> reference_models() {
  return {make_lebesgue(2), make_lognormal(2, 1.0), ex42(),
          make_branching_binomial({0.3, 0.7}, {0.25, 2.0})};
}

}  // namespace

TEST_CASE("branching document loads with the expected marginals") {
  auto md = io::parse_model(R"({
    "m": 2, "family": "branching",
    "p": [0.8, 0.2],
    "offspring": [[0.49, 0.42, 0.09], [0.01, 0.18, 0.81]]
  })", "ex42");
  CHECK(md.family == Family::Branching);
  CHECK(md.marg.p[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(md.marg.p[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(md.row_mean(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(md.row_mean(1) == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(md.marg.total_mean == doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("single-atom uniform matrix is the Lebesgue cascade") {
  auto md = io::parse_model(R"({
    "m": 2, "family": "discrete",
    "atoms": [{"p": 1.0, "w": [[0.25, 0.25], [0.25, 0.25]]}]
  })", "lebesgue");
  CHECK(md.marg.p[0] == doctest::Approx(0.5));
  CHECK(md.row_mean(0) == 2);
  CHECK(md.row_mean(1) == 2);
  CHECK(md.marg.total_mean == 4);
}

TEST_CASE("normalization violations are rejected with the deviation reported") {
  auto bad = R"({
    "m": 2, "family": "discrete",
    "atoms": [{"p": 1.0, "w": [[0.225, 0.225], [0.225, 0.225]]}]
  })";
  CHECK_THROWS_WITH_AS(io::parse_model(bad, "x"),
                       doctest::Contains("E sum W = 0.9"), ModelError);
}

TEST_CASE("empty atom lists and bad probabilities are rejected") {
  CHECK_THROWS_AS(io::parse_model(R"({"m":2,"family":"discrete","atoms":[]})", "x"),
                  ModelError);
  CHECK_THROWS_AS(io::parse_model(
                      R"({"m":2,"family":"branching","p":[0.5,0.5],
                          "offspring":[[1,0,0],[0.2,0.8,0]]})",
                      "x"),
                  ModelError);  // p_0 > 0 but E(N_0) = 0
}

TEST_CASE("a.s. single-branch models violate the standing assumption") {
  auto bad = R"({
    "m": 2, "family": "discrete",
    "atoms": [{"p": 1.0, "w": [[1.0, 0.0], [0.0, 0.0]]}]
  })";
  CHECK_THROWS_WITH_AS(io::parse_model(bad, "x"), doctest::Contains("N in {0,1}"),
                       ModelError);
}

TEST_CASE("lognormal marginals are uniform") {
  auto md = make_lognormal(2, 1.0);
  CHECK(md.marg.p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(md.marg.p[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(md.row_mean(0) == 2);
  CHECK(md.marg.total_mean == 4);
}

TEST_CASE("moments normalize at q = 1") {
  for (const auto& md : reference_models()) {
    CHECK(moment(md, MomentKind::WFull, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < md.m; ++i)
      if (md.active(i))
        CHECK(moment(md, MomentKind::VRow, 1.0, i) ==
              doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("second moment of the two-transition example matches its closed form") {
  auto md = ex42();
  double expected = 0.8 * 0.8 / 0.6 + 0.2 * 0.2 / 1.8;
  CHECK(moment(md, MomentKind::WFull, 2.0) == doctest::Approx(expected).epsilon(1e-14));
  double t2 = -std::log2(expected);
  CHECK(T_of(md, 2.0) == doctest::Approx(t2).epsilon(1e-12));
}

TEST_CASE("V-row moment requests on inactive rows are errors") {
  auto md = make_branching_binomial({1.0, 0.0}, {1.5, 1.0});
  CHECK_THROWS_AS(moment(md, MomentKind::VRow, 2.0, 1), ModelError);
}

TEST_CASE("the psi identity ties T to the row structure") {
  for (const auto& md : reference_models()) {
    double lm = std::log((double)md.m);
    for (double q : make_grid(0.0, 4.0, 64)) {
      double lhs = std::exp(-lm * T_of(md, q));
      double rhs = 0;
      for (int i = 0; i < md.m; ++i)
        if (md.active(i))
          rhs += std::pow(md.marg.p[i], q) * std::exp(-lm * T_row(md, i, q));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("tilting by q = 1 is the identity in law") {
  for (const auto& md : reference_models()) {
    auto t1 = tilt(md, 1.0);
    for (double q : make_grid(0.0, 3.0, 16))
      CHECK(moment(t1, MomentKind::WFull, q) ==
            doctest::Approx(moment(md, MomentKind::WFull, q)).epsilon(1e-10));
  }
}

TEST_CASE("the Lebesgue cascade is a tilt fixed point") {
  auto md = make_lebesgue(2);
  for (double q : {0.0, 0.5, 2.0, 3.0}) {
    auto tq = tilt(md, q);
    for (double x : make_grid(0.0, 3.0, 12))
      CHECK(moment(tq, MomentKind::WFull, x) ==
            doctest::Approx(moment(md, MomentKind::WFull, x)).epsilon(1e-12));
  }
}

TEST_CASE("tilted models are normalized by construction") {
  for (const auto& md : reference_models())
    for (double q : {0.0, 0.5, 1.5, 2.0}) {
      auto tq = tilt(md, q);
      CHECK(moment(tq, MomentKind::WFull, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("lognormal tilt shifts the drift parameter") {
  auto md = make_lognormal(2, 0.9);
  auto t = tilt(md, 2.0);
  CHECK(t.family == Family::Lognormal);
  CHECK(t.beta == doctest::Approx(1.8).epsilon(1e-14));
}

TEST_CASE("double tilt composes like a single tilt") {
  auto md = ex42();
  auto a = tilt(tilt(md, 1.0), 1.7);
  auto b = tilt(md, 1.7);
  for (double q : make_grid(0.0, 3.0, 16))
    CHECK(moment(a, MomentKind::WFull, q) ==
          doctest::Approx(moment(b, MomentKind::WFull, q)).epsilon(1e-10));
}

TEST_CASE("row laws project the atom table") {
  auto md = ex42();
  auto laws = row_law(md, 1);
  double mean = 0;
  for (const auto& l : laws) {
    int n = 0;
    for (double v : l.v) n += v > 0;
    mean += l.prob * n;
  }
  CHECK(mean == doctest::Approx(1.8).epsilon(1e-12));
}

TEST_CASE("model JSON round-trips") {
  auto md = ex42();
  auto copy = io::parse_model(io::model_json(md), md.name);
  for (double q : make_grid(0.0, 3.0, 12))
    CHECK(moment(copy, MomentKind::WFull, q) ==
          doctest::Approx(moment(md, MomentKind::WFull, q)).epsilon(1e-12));
}
