#include <doctest.h>

#include <cmath>
#include <limits>

#include "infavg/billiard.hpp"
#include "infavg/shift_toy.hpp"
#include "infavg/zext.hpp"
#include "support.hpp"

using namespace infavg;

namespace {

struct Runaway {
  using Point = int;
  std::int64_t advance(Point&) const { return std::numeric_limits<std::int64_t>::max() / 2 + 1; }
  std::int64_t phi(const Point&) const { return 0; }
  Point sample_invariant(CounterRng&) const { return 0; }
  std::int64_t phi_bound() const { return 0; }
};

BitStreamPoint bits(std::uint64_t word, int n) { return BitStreamPoint::from_prefix(word << (64 - n), 0, CounterRng(1)); }

}  // namespace

TEST_SUITE("zext") {

TEST_CASE("skew step adds phi to the level") {
  const ShiftToy toy;
  const auto p = step_z(toy, ZPoint<BitStreamPoint>{bits(0b0110, 4), 5});
  CHECK(p.level == 6);
  CHECK(p.base.prefix(3) == 0b110);
}

TEST_CASE("birkhoff sums: empty sum and the bit stream 0,1,0") {
  const ShiftToy toy;
  CHECK(birkhoff_phi(toy, bits(0b010, 3), 0) == 0);
  CHECK(birkhoff_phi(toy, bits(0b010, 3), 3) == 1);
  CHECK_THROWS_AS(birkhoff_phi(toy, bits(0, 1), -1), ContractViolation);
}

TEST_CASE("cocycle identity on random orbits") {
  const ShiftToy toy;
  CounterRng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto w = toy.sample_invariant(rng);
    const std::int64_t n = static_cast<std::int64_t>(rng() % 200), m = static_cast<std::int64_t>(rng() % 200);
    auto shifted = w;
    for (std::int64_t k = 0; k < n; ++k) toy.advance(shifted);
    CHECK(birkhoff_phi(toy, w, n + m) == birkhoff_phi(toy, w, n) + birkhoff_phi(toy, shifted, m));
  }
}

TEST_CASE("orbit levels are prefix sums of phi") {
  const ShiftToy toy;
  CounterRng rng(3);
  const auto w = toy.sample_invariant(rng);
  CHECK(orbit(toy, w, 0).size() == 1);
  CHECK(orbit(toy, w, 0).front().level == 0);
  const auto o = orbit(toy, w, 300);
  REQUIRE(o.size() == 301);
  for (std::size_t k = 0; k < o.size(); ++k) CHECK(o[k].level == birkhoff_phi(toy, w, static_cast<std::int64_t>(k)));
}

TEST_CASE("toy levels form a fair +-1 walk") {
  const ShiftToy toy;
  const int n = 100, orbits = 10000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < orbits; ++i) {
    CounterRng rng = task_stream(5, 1, static_cast<std::uint64_t>(i));
    const auto o = orbit(toy, toy.sample_invariant(rng), n);
    for (std::size_t k = 1; k < o.size(); ++k) REQUIRE(std::abs(o[k].level - o[k - 1].level) == 1);
    s1 += static_cast<double>(o.back().level);
    s2 += static_cast<double>(o.back().level * o.back().level);
  }
  CHECK(std::fabs(s1 / orbits) < 3.0 * std::sqrt(double(n) / orbits));
  CHECK(s2 / orbits == doctest::Approx(n).epsilon(0.05));
}

TEST_CASE("vanishing cocycle keeps the level constant") {
  const test::FrozenLevels sys;
  for (const auto& p : orbit(sys, std::int64_t{7}, 50)) CHECK(p.level == 0);
}

TEST_CASE("level overflow is reported") {
  const Runaway sys;
  ZPoint<int> p{0, 0};
  step_z_inplace(sys, p);
  CHECK_THROWS_AS(step_z_inplace(sys, p), Error);
}

TEST_CASE("phi is bounded and centered under the invariant measure") {
  const ShiftToy toy;
  const BilliardSystem billiard(default_billiard());
  const int n = 20000;
  double toy_sum = 0.0, bil_sum = 0.0, bil_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng = task_stream(9, 2, static_cast<std::uint64_t>(i));
    const auto t = toy.phi(toy.sample_invariant(rng));
    REQUIRE(std::abs(t) <= toy.phi_bound());
    toy_sum += static_cast<double>(t);
    auto c = billiard.sample_invariant(rng);
    const auto f = static_cast<double>(billiard.advance(c));
    REQUIRE(std::fabs(f) <= static_cast<double>(billiard.phi_bound()));
    bil_sum += f;
    bil_sq += f * f;
  }
  CHECK(std::fabs(toy_sum / n) < 3.0 / std::sqrt(double(n)));
  const double sd = std::sqrt(bil_sq / n);
  CHECK(std::fabs(bil_sum / n) < 3.0 * sd / std::sqrt(double(n)));
}

}
