#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cascade/model.hpp"
#include "cascade/simulate.hpp"

using namespace cascade;

// The OpenMP kernels must reproduce the serial reference bit for bit: the
// per-node counter streams make subtree order irrelevant, and reductions run
// in a fixed order.

TEST_CASE("parallel cascade sampling equals the serial reference") {
  for (auto md : {make_branching_binomial({0.8, 0.2}, {0.6, 1.8}),
                  make_lognormal(2, 1.0), make_lebesgue(2)}) {
    for (int depth : {1, 3, 7}) {
      auto ser = sample_cascade(md, depth, 99);
      auto par = sample_cascade_parallel(md, depth, 99);
      CHECK(ser.survived == par.survived);
      CHECK(ser.u == par.u);
      CHECK(ser.v == par.v);
      CHECK(ser.mass == par.mass);
      auto par1 = sample_cascade_parallel(md, depth, 99, 1);
      CHECK(ser.mass == par1.mass);
    }
  }
}

TEST_CASE("parallel partition sums equal the serial reference") {
  auto pm = project(sample_cascade(make_branching_binomial({0.8, 0.2}, {0.6, 1.8}),
                                   10, 5));
  auto grid = make_grid(0.0, 4.0, 257);
  CHECK(partition_sums(pm, grid) == partition_sums_parallel(pm, grid));
  CHECK(partition_sums(pm, grid) == partition_sums_parallel(pm, grid, 1));
}

TEST_CASE("the lognormal batch kernel is thread-count invariant") {
  auto md = make_lognormal(2, 1.0);
  for (int depth : {5, 9, 12}) {
    auto one = sample_projected_levels(md, {depth - 2, depth}, 31, 1);
    auto many = sample_projected_levels(md, {depth - 2, depth}, 31, 0);
    auto two = sample_projected_levels(md, {depth - 2, depth}, 31, 2);
    for (size_t k = 0; k < one.size(); ++k) {
      CHECK(one[k].pi == many[k].pi);
      CHECK(one[k].pi == two[k].pi);
    }
  }
}

TEST_CASE("replica fan-out is jobs-invariant") {
  auto md = make_branching_binomial({0.8, 0.2}, {0.6, 1.8});
  EmpiricalOptions a;
  a.replicas = 8;
  a.seed = 3;
  a.jobs = 1;
  EmpiricalOptions b = a;
  b.jobs = 2;
  auto ca = empirical_tau(md, {4, 5, 6, 7}, {0.5, 2.0}, a);
  auto cb = empirical_tau(md, {4, 5, 6, 7}, {0.5, 2.0}, b);
  CHECK(ca.values == cb.values);
  CHECK(ca.stderrs == cb.stderrs);
}
