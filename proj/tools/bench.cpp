// Times the serial reference kernels against their OpenMP counterparts and
// checks they produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "cascade/simulate.hpp"

using namespace cascade;
using clock_type = std::chrono::steady_clock;

static double seconds(clock_type::time_point a, clock_type::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <class F>
static double timed(F&& f) {
  auto t0 = clock_type::now();
  f();
  return seconds(t0, clock_type::now());
}

int main(int argc, char** argv) {
  int depth = argc > 1 ? std::atoi(argv[1]) : 12;
  std::uint64_t seed = 20240915;

  auto branching = make_branching_binomial({0.8, 0.2}, {0.6, 1.8});
  branching.name = "fig3";

  CascadeSample ser, par;
  double t_ser = timed([&] { ser = sample_cascade(branching, depth, seed); });
  double t_par = timed([&] { par = sample_cascade_parallel(branching, depth, seed); });
  bool same = ser.mass == par.mass && ser.u == par.u && ser.v == par.v;
  std::printf("cascade sampling  depth %-2d  serial %.3fs  parallel %.3fs  %s\n", depth,
              t_ser, t_par, same ? "identical" : "MISMATCH");

  auto pm = project(ser);
  auto grid = make_grid(0.0, 4.0, 4096);
  std::vector<double> s1, s2;
  double p_ser = timed([&] { s1 = partition_sums(pm, grid); });
  double p_par = timed([&] { s2 = partition_sums_parallel(pm, grid); });
  std::printf("partition sums    %zu pts   serial %.3fs  parallel %.3fs  %s\n",
              grid.size(), p_ser, p_par, s1 == s2 ? "identical" : "MISMATCH");

  auto logn = make_lognormal(2, 1.0);
  std::vector<int> depths = {depth};
  std::vector<ProjectedMasses> l1, l2;
  double l_ser = timed([&] { l1 = sample_projected_levels(logn, depths, seed, 1); });
  double l_par = timed([&] { l2 = sample_projected_levels(logn, depths, seed, 0); });
  bool lsame = l1[0].pi == l2[0].pi;
  std::printf("lognormal kernel  depth %-2d  1 thread %.3fs  all threads %.3fs  %s\n",
              depth, l_ser, l_par, lsame ? "identical" : "MISMATCH");
  double weights = 0;
  for (int k = 1; k <= depth; ++k) weights += std::pow(4.0, k);
  std::printf("                  %.1f ns/weight serial\n", l_ser / weights * 1e9);
  return same && lsame && s1 == s2 ? 0 : 1;
}
