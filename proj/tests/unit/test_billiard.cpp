#include <doctest.h>

#include <cmath>
#include <numbers>

#include "infavg/billiard.hpp"
#include "infavg/experiments.hpp"
#include "infavg/stats.hpp"

using namespace infavg;

namespace {

double angle_between(Vec2 a, Vec2 b) { return std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0)); }

Vec2 unit(double a) { return {std::cos(a), std::sin(a)}; }

BilliardConfig single_disk(double r) {
  BilliardConfig c;
  c.disks = {{{0.5, 0.5}, r}};
  return c;
}

}  // namespace

TEST_SUITE("billiard") {

TEST_CASE("reflection examples") {
  const Vec2 a = reflect({-1.0, 0.0}, {1.0, 0.0});
  CHECK(a.x == doctest::Approx(1.0));
  CHECK(a.y == doctest::Approx(0.0));
  const double h = std::sqrt(0.5);
  const Vec2 b = reflect({h, -h}, {0.0, 1.0});
  CHECK(b.x == doctest::Approx(h));
  CHECK(b.y == doctest::Approx(h));
  CHECK_THROWS_AS(reflect({2.0, 0.0}, {1.0, 0.0}), ContractViolation);
}

TEST_CASE("law of reflection on random pairs") {
  CounterRng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 n = unit(2.0 * std::numbers::pi * rng.uniform());
    Vec2 v = unit(2.0 * std::numbers::pi * rng.uniform());
    if (dot(v, n) > 0.0) v = -v;
    const Vec2 out = reflect(v, n);
    CHECK(std::fabs(norm(out) - 1.0) < 1e-12);
    CHECK(dot(out, n) == doctest::Approx(-dot(v, n)).epsilon(1e-12));
    CHECK(std::fabs(angle_between(out, n) - (std::numbers::pi - angle_between(v, n))) < 1e-7);
  }
}

TEST_CASE("vertical flight wraps the torus back to the same disk") {
  CollisionState s;
  s.normal = {0.0, 1.0};
  s.direction = {0.0, 1.0};
  const auto r = next_collision(s, single_disk(0.3));
  CHECK(r.length == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.next.disk_id == 0);
  CHECK(r.next.normal.y == doctest::Approx(-1.0));
  CHECK(r.cell_displacement == 0);
}

TEST_CASE("radial hit has length L - r") {
  CollisionState s;
  s.normal = {1.0, 0.0};
  s.direction = {1.0, 0.0};
  const auto r = next_collision(s, default_billiard());
  CHECK(r.length == doctest::Approx(0.6 - 0.4).epsilon(1e-12));
  CHECK(r.cell_displacement == 1);
}

TEST_CASE("flight inside one cell has phi = 0") {
  const double h = std::sqrt(0.5);
  CollisionState s;
  s.normal = {h, h};
  s.direction = {h, h};
  const auto [next, phi] = billiard_step(s, default_billiard());
  CHECK(next.disk_id == 1);
  CHECK(phi == 0);
}

TEST_CASE("open corridor flight raises a horizon violation") {
  CollisionState s;
  s.normal = {0.0, 1.0};
  s.direction = {std::cos(1e-3), std::sin(1e-3)};
  CHECK_THROWS_AS(next_collision(s, single_disk(0.2)), HorizonViolation);
}

TEST_CASE("default geometry: bounded flights, centered phi") {
  const BilliardSystem sys(default_billiard());
  const auto audit = billiard_audit(sys, 1000, 1000, 77, Exec::Parallel);
  CHECK(audit.collisions >= 990000);
  CHECK(audit.max_flight <= 2.5);
  CHECK(audit.horizon_violations == 0);
  CHECK(audit.speed_drift < 1e-12);
  CHECK(std::fabs(audit.phi_mean) < 3.0 * audit.phi_std / std::sqrt(double(audit.collisions)));
}

TEST_CASE("mirror initial conditions give opposite phi sequences") {
  // Disk 1 sits at x = 1/2, so the mirror sends its cell-0 copy to cell −1:
  // φ' = −φ − 1{next is disk 1} + 1{current is disk 1}.
  const BilliardSystem sys(default_billiard());
  int compared = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    CounterRng rng = task_stream(8, 8, i);
    CollisionState a = sys.sample_invariant(rng);
    CollisionState b = a;
    b.normal = -a.normal;
    b.direction = -a.direction;
    try {
      for (int k = 0; k < 20; ++k) {
        const std::int64_t was_half = a.disk_id == 1;
        const auto fa = sys.advance(a);
        const auto fb = sys.advance(b);
        REQUIRE(a.disk_id == b.disk_id);
        REQUIRE(fb == -fa - static_cast<std::int64_t>(a.disk_id == 1) + was_half);
        ++compared;
      }
    } catch (const GrazingCollision&) {
    }
  }
  CHECK(compared > 3900);
}

TEST_CASE("invariant sampler marginals") {
  const BilliardConfig cfg = default_billiard();
  std::vector<double> theta(100000);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    CounterRng rng = task_stream(12, 1, i);
    theta[i] = sample_invariant(cfg, rng).outgoing_angle();
  }
  CHECK(ks_distance(theta, [](double t) { return (1.0 + std::sin(std::clamp(t, -1.5707963267948966, 1.5707963267948966))) / 2.0; }) < 0.01);

  BilliardConfig twins;
  twins.disks = {{{0.0, 0.0}, 0.3}, {{0.5, 0.5}, 0.3}};
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng = task_stream(12, 2, static_cast<std::uint64_t>(i));
    first += sample_invariant(twins, rng).disk_id == 0;
  }
  CHECK(std::fabs(first - n / 2.0) < 3.0 * std::sqrt(n * 0.25));
}

TEST_CASE("the collision map preserves the sampling law") {
  const BilliardSystem sys(default_billiard());
  const auto rep = billiard_invariance(sys, 100000, 10, 13, Exec::Parallel);
  CHECK(rep.ks_disk < 0.02);
  CHECK(rep.ks_boundary_angle < 0.02);
  CHECK(rep.ks_outgoing_angle < 0.02);
}

TEST_CASE("retreat inverts advance") {
  const BilliardSystem sys(default_billiard());
  for (std::uint64_t i = 0; i < 500; ++i) {
    CounterRng rng = task_stream(14, 1, i);
    const CollisionState s = sys.sample_invariant(rng);
    CollisionState p = s;
    try {
      const auto f = sys.advance(p);
      CHECK(sys.retreat(p) == f);
    } catch (const GrazingCollision&) {
      continue;
    }
    CHECK(p.disk_id == s.disk_id);
    CHECK(norm(p.normal - s.normal) < 1e-9);
    CHECK(norm(p.direction - s.direction) < 1e-9);
  }
}

TEST_CASE("short orbits retrace under time reversal") {
  const BilliardSystem sys(default_billiard());
  const auto rep = billiard_retrace(sys, 200, 5, 1e-8, 15, Exec::Serial);
  CHECK(rep.orbits_within_tol >= 190);
  CHECK(rep.id_mismatches == 0);
}

TEST_CASE("corridor validator") {
  CHECK(open_corridors(default_billiard()).empty());
  const auto open = validate_finite_horizon(single_disk(0.2), 1000, 20, 1);
  CHECK_FALSE(open.ok);
  bool horizontal = false;
  for (const auto& g : open.blocked_slopes_failed) horizontal = horizontal || (g.dx == 1 && g.dy == 0);
  CHECK(horizontal);
}

TEST_CASE("removing a disk never shortens the longest flight") {
  const BilliardConfig full = default_billiard();
  const auto base = validate_finite_horizon(full, 2000, 200, 3);
  REQUIRE(base.ok);
  for (std::size_t drop = 0; drop < full.disks.size(); ++drop) {
    BilliardConfig fewer = full;
    fewer.disks.erase(fewer.disks.begin() + static_cast<std::ptrdiff_t>(drop));
    CHECK(validate_finite_horizon(fewer, 2000, 200, 3).max_flight >= base.max_flight);
  }
}

TEST_CASE("geometry validation") {
  CHECK_NOTHROW(validate_geometry(default_billiard()));
  BilliardConfig overlap;
  overlap.disks = {{{0.0, 0.0}, 0.45}, {{0.5, 0.5}, 0.3}};
  CHECK_THROWS_AS(validate_geometry(overlap), GeometryError);
  BilliardConfig empty_radius;
  empty_radius.disks = {{{0.0, 0.0}, 0.0}};
  CHECK_THROWS_AS(validate_geometry(empty_radius), GeometryError);
  BilliardConfig lopsided;
  lopsided.disks = {{{0.25, 0.1}, 0.1}};
  CHECK_THROWS_AS(validate_geometry(lopsided), GeometryError);
  lopsided.symmetry_required = false;
  CHECK_NOTHROW(validate_geometry(lopsided));
}

}
