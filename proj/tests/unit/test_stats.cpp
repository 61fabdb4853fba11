#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/random/normal_distribution.hpp>

#include "infavg/experiments.hpp"
#include "infavg/stats.hpp"
#include "support.hpp"

using namespace infavg;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0.0) {
  CounterRng rng(seed);
  boost::random::normal_distribution<double> nd(mu, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("moments of constant, Gaussian and symmetric samples") {
  const std::vector<double> c(1000, 2.5);
  const auto mc = empirical_moments(c, 4);
  CHECK(mc.moments[0] == 2.5);
  for (int k = 1; k < 4; ++k) CHECK(mc.moments[k] == 0.0);

  const auto g = empirical_moments(normals(1000000, 1), 4);
  CHECK(g.moments[1] >= 0.99);
  CHECK(g.moments[1] <= 1.01);
  CHECK(g.moments[3] >= 2.9);
  CHECK(g.moments[3] <= 3.1);

  auto sym = normals(50000, 2);
  const std::size_t n = sym.size();
  for (std::size_t i = 0; i < n; ++i) sym.push_back(-sym[i]);
  const auto s = empirical_moments(sym, 5);
  CHECK(std::fabs(s.moments[0]) <= 3.0 * s.se[0] + 1e-15);
  CHECK(std::fabs(s.moments[2]) <= 3.0 * s.se[2] + 1e-15);
  CHECK(std::fabs(s.moments[4]) <= 3.0 * s.se[4] + 1e-15);
}

TEST_CASE("KS distance") {
  const auto a = normals(10000, 3);
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(a, [](double x) { return normal_cdf(x); }) < 0.02);
  const auto b = normals(10000, 4, 1.0);
  CHECK(ks_distance(a, b) > 0.3);
  CHECK(ks_distance(a, b) == ks_distance(b, a));
  auto shuffled = b;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(ks_distance(a, shuffled) == ks_distance(a, b));
  CHECK(ks_distance(a, b) <= 1.0);
  const std::vector<double> few(10, 0.0);
  CHECK_THROWS_AS(ks_distance(few, a), ContractViolation);
}

TEST_CASE("log-log regression") {
  std::vector<std::pair<double, double>> power, flat;
  for (double x : {1e-5, 1e-4, 1e-3, 1e-2}) {
    power.push_back({x, std::pow(x, 0.25)});
    flat.push_back({x, 3.0});
  }
  CHECK(scaling_regression(power, 200).slope == doctest::Approx(0.25).epsilon(1e-8));
  const auto f = scaling_regression(flat, 200);
  CHECK(std::fabs(f.slope) < 1e-12);
  CHECK(f.slope_ci.lo <= 0.0);
  CHECK(f.slope_ci.hi >= 0.0);
}

TEST_CASE("fourth moments of vtilde increments scale linearly in t - s") {
  const auto field = build_toy_field(test::toy_spec());
  std::vector<std::pair<double, double>> pairs;
  const double eps = 1e-3;
  const auto w = averaged_for_birkhoff(test::vec1(1.0), field.drift(), eps, 1.0, 4);
  std::vector<TrajectoryGrid> paths(4000);
  for_each_task(paths.size(), Exec::Parallel, [&](std::size_t i) {
    CounterRng rng = task_stream(50, 1, i);
    const ZPoint<BitStreamPoint> start{BitStreamPoint(rng.split()), 0};
    paths[i] = birkhoff_sums(ShiftToy{}, field, start, eps, 1.0, w).vtilde;
  });
  for (double t : {0.125, 0.25, 0.5, 1.0}) {
    double m4 = 0.0;
    for (const auto& p : paths) m4 += std::pow(p.state(p.index_of(t))(0), 4);
    pairs.push_back({t, m4 / paths.size()});
  }
  const double slope = scaling_regression(pairs, 200).slope;
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.2);
}

TEST_CASE("bootstrap intervals") {
  const std::vector<double> c(200, 1.5);
  const auto mean_fn = [](std::span<const double> s) { return mean(s); };
  const auto z = bootstrap_ci(c, mean_fn, 500, 0.95, 1);
  CHECK(z.lo == 1.5);
  CHECK(z.hi == 1.5);

  const auto ci = bootstrap_ci(normals(10000, 5), mean_fn, 1000, 0.95, 2);
  CHECK(ci.hi - ci.lo == doctest::Approx(2.0 * 1.96 / 100.0).epsilon(0.2));

  int covered = 0;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto iv = bootstrap_ci(normals(100, 1000 + r), mean_fn, 1000, 0.95, r);
    covered += iv.lo <= 0.0 && 0.0 <= iv.hi;
  }
  CHECK(covered >= 465);
  CHECK(covered <= 485);
}

}
