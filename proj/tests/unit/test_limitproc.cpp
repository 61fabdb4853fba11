#include <doctest.h>

#include <cmath>

#include "infavg/experiments.hpp"
#include "infavg/limitproc.hpp"
#include "infavg/stats.hpp"
#include "support.hpp"

using namespace infavg;
using test::vec1;

namespace {

TimeChangedPath driver(std::uint64_t i, double sigma, double dt, int dim = 1) {
  CounterRng rng = task_stream(40, 1, i);
  const auto lt = local_time_occupation(simulate_bm(sigma, 1.0, dt, rng), 2.0 * std::sqrt(sigma * dt));
  return time_changed_bm(lt, dim, rng);
}

LimitCoefficients constant_a(double a, const Drift& drift, double dt) {
  return limit_coefficients(drift, [a](const Vector&) { return Matrix(Matrix::Constant(1, 1, a)); }, vec1(1.0), 1.0, dt);
}

}  // namespace

TEST_SUITE("limitproc") {

TEST_CASE("Brownian paths") {
  CounterRng rng(1);
  for (double v : simulate_bm(0.0, 1.0, 1e-2, rng).values) CHECK(v == 0.0);

  std::vector<double> end(100000);
  for (std::size_t i = 0; i < end.size(); ++i) {
    CounterRng r = task_stream(41, 1, i);
    end[i] = simulate_bm(2.0, 1.0, 0.05, r).values.back();
  }
  const double var = variance(end);
  CHECK(std::fabs(var - 2.0) < 3.0 * 2.0 * std::sqrt(2.0 / end.size()));

  double qv = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    CounterRng r = task_stream(41, 2, i);
    const auto p = simulate_bm(2.0, 1.0, 1e-4, r);
    for (std::size_t k = 1; k < p.values.size(); ++k) qv += std::pow(p.values[k] - p.values[k - 1], 2);
  }
  CHECK(qv / 20.0 == doctest::Approx(2.0).epsilon(0.02));
  CHECK_THROWS_AS(grid_steps(1.0, 0.3), GridMismatch);
}

TEST_CASE("local time vanishes away from 0 and never decreases") {
  BrownianPath pinned{1e-3, 1.0, std::vector<double>(1001, 1.0)};
  for (double v : local_time_occupation(pinned, 0.05).values) CHECK(v == 0.0);
  CounterRng rng(2);
  const auto lt = local_time_occupation(simulate_bm(1.0, 1.0, 1e-3, rng), 2.0 * std::sqrt(1e-3));
  for (std::size_t k = 1; k < lt.values.size(); ++k) CHECK(lt.values[k] >= lt.values[k - 1]);
  CHECK(local_time_occupation(simulate_bm(1.0, 1.0, 1e-3, rng), 1e-3).below_resolution);
}

TEST_CASE("time change is flat where the local time is") {
  LocalTimePath flat{1e-2, 0.1, std::vector<double>(101, 0.3), false};
  CounterRng rng(3);
  for (double v : time_changed_bm(flat, 2, rng).values) CHECK(v == 0.0);
  flat.values[50] = 0.1;
  CHECK_THROWS_AS(time_changed_bm(flat, 1, rng), ContractViolation);
}

TEST_CASE("increments over disjoint intervals are uncorrelated") {
  const std::size_t n = 20000;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = driver(i, 1.0, 1e-3);
    const double mid = b.at(500)(0);
    x[i] = mid;
    y[i] = b.at(1000)(0) - mid;
  }
  const double mx = mean(x), my = mean(y);
  double c = 0.0, cc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (x[i] - mx) * (y[i] - my);
    c += t;
    cc += t * t;
  }
  c /= n;
  const double se = std::sqrt((cc / n - c * c) / n);
  CHECK(std::fabs(c) < 3.0 * se);
}

TEST_CASE("stochastic integral degenerations") {
  const auto b = driver(0, 1.0, 1e-3, 2);
  const auto same = ito_sqrt_a_integral({Matrix::Identity(2, 2)}, b);
  for (std::size_t k = 0; k < same.size(); ++k) CHECK(same.state(k) == b.at(k));
  const auto none = ito_sqrt_a_integral({Matrix::Zero(2, 2)}, b);
  CHECK(none.sup_norm() == 0.0);
}

TEST_CASE("constant a: the integral and the rescaled clock share a law") {
  const double c = 2.5;
  const std::size_t n = 10000;
  std::vector<double> integral(n), clock(n);
  for (std::size_t i = 0; i < n; ++i) {
    integral[i] = ito_sqrt_a_integral({Matrix::Constant(1, 1, std::sqrt(c))}, driver(i, 1.0, 1e-3)).back()(0);
    CounterRng rng = task_stream(42, 1, i);
    const auto lt = local_time_occupation(simulate_bm(1.0, 1.0, 1e-3, rng), 2.0 * std::sqrt(1e-3));
    const auto b = time_changed_bm(lt, 1, rng, c);
    clock[i] = b.at(b.steps())(0);
  }
  CHECK(ks_distance(integral, clock) < 0.02);
}

TEST_CASE("limit process degenerations") {
  const auto b = driver(1, 1.0, 1e-3);
  const auto still = constant_a(2.0, Drift::zero(1), 1e-3);
  const auto y = limit_y(still, b);
  const auto m = ito_sqrt_a_integral({Matrix::Constant(1, 1, std::sqrt(2.0))}, b);
  for (std::size_t k = 0; k < y.euler.size(); ++k) {
    CHECK(y.euler.state(k)(0) == doctest::Approx(m.state(k)(0)).epsilon(1e-12));
    CHECK(y.closed.state(k)(0) == doctest::Approx(m.state(k)(0)).epsilon(1e-12));
  }
  const auto quiet = limit_y(constant_a(0.0, Drift::linear(Matrix::Constant(1, 1, -1.0)), 1e-3), b);
  CHECK(quiet.euler.sup_norm() == 0.0);
  CHECK(quiet.closed.sup_norm() == 0.0);
}

TEST_CASE("both constructions of y agree to first order in dt") {
  const Drift drift = Drift::neg_sin(1, 1.0);
  std::vector<std::pair<double, double>> pairs;
  for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
    const auto coef = limit_coefficients(
        drift, [](const Vector& x) { return Matrix(Matrix::Constant(1, 1, 1.0 + 0.5 * std::sin(x(0)))); }, vec1(1.0),
        1.0, dt);
    std::vector<double> gaps(100);
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const auto y = limit_y(coef, driver(500 + i, 1.0, dt));
      for (std::size_t k = 0; k < y.euler.size(); ++k)
        gaps[i] = std::max(gaps[i], (y.euler.state(k) - y.closed.state(k)).norm());
    }
    std::sort(gaps.begin(), gaps.end());
    pairs.push_back({dt, 0.5 * (gaps[49] + gaps[50])});
  }
  const auto fit = scaling_regression(pairs, 200);
  CHECK(fit.slope > 0.8);
  CHECK(fit.slope < 1.2);
}

}
