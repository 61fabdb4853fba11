#include <doctest.h>

#include <bit>
#include <cmath>

#include "infavg/greenkubo.hpp"
#include "infavg/shift_toy.hpp"
#include "infavg/stats.hpp"
#include "support.hpp"

using namespace infavg;

TEST_SUITE("shift_toy") {

TEST_CASE("shift drops the leading bit") {
  auto p = BitStreamPoint::from_prefix(0b101ULL << 61, 0, CounterRng(1));
  p.shift();
  CHECK(p.prefix(2) == 0b01);
  CHECK(toy_step(BitStreamPoint::from_prefix(0b101ULL << 61, 0, CounterRng(1))).prefix(2) == 0b01);
}

TEST_CASE("shift doubles the value mod 1") {
  CounterRng rng(17);
  for (int i = 0; i < 1000; ++i) {
    BitStreamPoint p(rng.split());
    const long double v = p.value();
    const long double w = toy_step(p).value();
    long double expect = 2.0L * v;
    if (expect >= 1.0L) expect -= 1.0L;
    CHECK(std::fabs(static_cast<double>(w - expect)) <= std::ldexp(1.0, -63));
  }
}

TEST_CASE("value is uniform after 20 steps") {
  std::vector<double> v(100000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CounterRng rng = task_stream(2, 3, i);
    BitStreamPoint p(rng);
    for (int k = 0; k < 20; ++k) p.shift();
    v[i] = static_cast<double>(p.value());
    REQUIRE(v[i] >= 0.0);
    REQUIRE(v[i] < 1.0);
  }
  CHECK(ks_distance(v, [](double x) { return std::clamp(x, 0.0, 1.0); }) < 0.02);
}

TEST_CASE("phi reads the leading bit and is centered") {
  CHECK(toy_phi(BitStreamPoint::from_prefix(0, 0, CounterRng(1))) == 1);
  CHECK(toy_phi(BitStreamPoint::from_prefix(1ULL << 63, 0, CounterRng(1))) == -1);
  double s = 0.0;
  const int n = 1000000;
  CounterRng rng(23);
  for (int i = 0; i < n; ++i) s += static_cast<double>(toy_phi(BitStreamPoint(rng.split())));
  CHECK(std::fabs(s / n) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("exact cylinder expectations") {
  const auto phi = toy_phi_observable();
  const CylinderObservable one{[](std::uint64_t) { return 1.0; }, 0};
  CHECK(exact_cylinder_expectation(phi, phi, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(exact_cylinder_expectation(phi, phi, 1)) < 1e-15);
  for (int l = 0; l < 6; ++l) CHECK(std::fabs(exact_cylinder_expectation(one, phi, l)) < 1e-15);
  CHECK_THROWS_AS(cylinder_mean([](std::uint64_t) { return 1.0; }, 31), DepthOverflow);
}

TEST_CASE("Sigma by enumeration") {
  CHECK(std::fabs(toy_sigma() - 1.0) < 1e-12);
  const CylinderObservable zero{[](std::uint64_t) { return 0.0; }, 1};
  CHECK(toy_sigma(zero, 20) == 0.0);
}

TEST_CASE("Sigma of phi + phi o T: enumeration against Monte Carlo") {
  const CylinderObservable pair{[](std::uint64_t h) { return (h >> 63 ? -1.0 : 1.0) + ((h >> 62) & 1 ? -1.0 : 1.0); }, 2};
  const double exact = toy_sigma(pair, 20);
  CHECK(exact == doctest::Approx(4.0).epsilon(1e-12));
  SigmaOptions o;
  o.n_samples = 100000;
  o.window = 16;
  o.seed = 31;
  const auto mc = estimate_sigma(test::PairToy{}, o);
  CHECK(mc.value == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("exact Green-Kubo terms for phi at level 0") {
  const auto phi = toy_phi_observable();
  const auto psi = LevelWeights::delta(0);
  CHECK(toy_exact_term_correlation(phi, psi, 0) == doctest::Approx(1.0));
  CHECK(toy_exact_term_correlation(phi, psi, 1) == 0.0);
  CHECK(std::fabs(toy_exact_term_correlation(phi, psi, 2)) < 1e-15);
  CHECK(toy_exact_green_kubo(phi, psi, 20) == doctest::Approx(1.0));
}

TEST_CASE("enumeration is identical serial and parallel") {
  const auto f = centered_bits_observable(4);
  const auto fn = [&](std::uint64_t h) { return f.fn(h) * f.fn(h << 3) + std::popcount(h >> 40); };
  CHECK(cylinder_mean(fn, 24, Exec::Serial) == cylinder_mean(fn, 24, Exec::Parallel));
}

}
