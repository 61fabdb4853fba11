#include "infavg/billiard.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "infavg/errors.hpp"

namespace infavg {

BilliardConfig default_billiard() {
  BilliardConfig cfg;
  cfg.disks = {{{0.0, 0.0}, 0.4}, {{0.5, 0.5}, 0.3}};
  cfg.horizon_cap = 3.0;
  cfg.symmetry_required = true;
  return cfg;
}

namespace {

constexpr double kDisjointMargin = 1e-6;

double wrap_unit(double v) {
  v -= std::floor(v);
  return v >= 1.0 ? 0.0 : v;
}

bool same_mod_one(double a, double b, double tol) {
  double d = std::fabs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d) <= tol;
}

}  // namespace

void validate_geometry(const BilliardConfig& cfg) {
  if (cfg.disks.empty()) throw GeometryError("billiard needs at least one disk");
  if (!(cfg.horizon_cap > 0.0)) throw GeometryError("horizon_cap must be positive");
  for (const auto& d : cfg.disks) {
    if (!(d.radius > 0.0)) throw GeometryError("disk radius must be positive");
    if (d.radius >= 0.5) throw GeometryError("disk radius must be below 0.5 to avoid self-overlap");
    if (d.center.x < 0.0 || d.center.x >= 1.0 || d.center.y < 0.0 || d.center.y >= 1.0)
      throw GeometryError("disk centers must lie in [0,1)^2");
  }
  const auto n = cfg.disks.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto& a = cfg.disks[i];
      const auto& b = cfg.disks[j];
      for (int ox = -2; ox <= 2; ++ox) {
        for (int oy = -2; oy <= 2; ++oy) {
          if (i == j && ox == 0 && oy == 0) continue;
          const Vec2 c = b.center + Vec2{double(ox), double(oy)};
          const double gap = norm(c - a.center) - a.radius - b.radius;
          if (gap < kDisjointMargin) {
            std::ostringstream msg;
            msg << "disks " << i << " and " << j << " (image " << ox << "," << oy
                << ") overlap or touch: gap " << gap;
            throw GeometryError(msg.str());
          }
        }
      }
    }
  }
  if (cfg.symmetry_required) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& d = cfg.disks[i];
      const bool mirrored = std::any_of(cfg.disks.begin(), cfg.disks.end(), [&](const Disk& e) {
        return std::fabs(e.radius - d.radius) <= 1e-12 &&
               same_mod_one(e.center.x, -d.center.x, 1e-12) &&
               same_mod_one(e.center.y, -d.center.y, 1e-12);
      });
      if (!mirrored) {
        std::ostringstream msg;
        msg << "disk " << i << " has no mirror image under (x,y) -> (-x,-y) mod 1";
        throw GeometryError(msg.str());
      }
    }
  }
}

double CollisionState::boundary_angle() const {
  double a = std::atan2(normal.y, normal.x);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a >= 2.0 * std::numbers::pi ? 0.0 : a;
}

Vec2 reflect(Vec2 v, Vec2 n) {
  if (std::fabs(norm(v) - 1.0) > 1e-9 || std::fabs(norm(n) - 1.0) > 1e-9)
    throw ContractViolation("reflect: inputs must be unit vectors");
  const double vn = dot(v, n);
  return v - (2.0 * vn) * n;
}

FreeFlightResult next_collision(const CollisionState& s, const BilliardConfig& cfg) {
  const Disk& here = cfg.disks.at(s.disk_id);
  const Vec2 p = here.center + here.radius * s.normal;
  const Vec2 v = s.direction;
  const double cap = cfg.horizon_cap;

  double best_t = std::numeric_limits<double>::infinity();
  std::size_t best_disk = 0;
  std::int64_t best_ox = 0;
  std::int64_t best_oy = 0;

  for (std::size_t j = 0; j < cfg.disks.size(); ++j) {
    const Disk& d = cfg.disks[j];
    const double reach = cap + d.radius;
    // Images whose centres lie within cap + r of the start point.
    const auto ox_lo = static_cast<std::int64_t>(std::floor(p.x - reach - d.center.x));
    const auto ox_hi = static_cast<std::int64_t>(std::ceil(p.x + reach - d.center.x));
    const auto oy_lo = static_cast<std::int64_t>(std::floor(p.y - reach - d.center.y));
    const auto oy_hi = static_cast<std::int64_t>(std::ceil(p.y + reach - d.center.y));
    for (std::int64_t ox = ox_lo; ox <= ox_hi; ++ox) {
      for (std::int64_t oy = oy_lo; oy <= oy_hi; ++oy) {
        if (j == s.disk_id && ox == 0 && oy == 0) continue;
        const Vec2 c = d.center + Vec2{double(ox), double(oy)};
        const Vec2 m = p - c;
        const double b = dot(m, v);
        if (b >= 0.0) continue;
        const double q = dot(m, m) - d.radius * d.radius;
        const double disc = b * b - q;
        if (disc <= 0.0) continue;
        // Smaller root of t² + 2bt + q, in the cancellation-free form.
        const double t = q / (-b + std::sqrt(disc));
        if (t < best_t) {
          best_t = t;
          best_disk = j;
          best_ox = ox;
          best_oy = oy;
        }
      }
    }
  }

  if (!(best_t <= cap)) {
    std::ostringstream msg;
    msg << "no collision within horizon cap " << cap;
    throw HorizonViolation(msg.str());
  }

  const Disk& hit = cfg.disks[best_disk];
  const Vec2 c = hit.center + Vec2{double(best_ox), double(best_oy)};
  const Vec2 radial = (p + best_t * v) - c;
  const Vec2 nn = (1.0 / norm(radial)) * radial;
  if (-dot(v, nn) < kGrazingTolerance) throw GrazingCollision("grazing impact");

  FreeFlightResult out;
  out.length = best_t;
  out.cell_displacement = best_ox;
  out.next.disk_id = best_disk;
  out.next.image_offset = {best_ox, best_oy};
  out.next.normal = nn;
  out.next.direction = reflect(v, nn);
  out.next.global_x_cell = detail::checked_add(s.global_x_cell, best_ox);
  return out;
}

std::pair<CollisionState, std::int64_t> billiard_step(const CollisionState& s,
                                                      const BilliardConfig& cfg) {
  FreeFlightResult r = next_collision(s, cfg);
  return {r.next, r.cell_displacement};
}

CollisionState sample_invariant(const BilliardConfig& cfg, CounterRng& rng) {
  double total = 0.0;
  for (const auto& d : cfg.disks) total += d.radius;
  double pick = rng.uniform() * total;
  std::size_t id = 0;
  while (id + 1 < cfg.disks.size() && pick >= cfg.disks[id].radius) {
    pick -= cfg.disks[id].radius;
    ++id;
  }
  const double alpha = 2.0 * std::numbers::pi * rng.uniform();
  const double theta = std::asin(2.0 * rng.uniform() - 1.0);
  CollisionState s;
  s.disk_id = id;
  s.normal = {std::cos(alpha), std::sin(alpha)};
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  s.direction = {s.normal.x * c - s.normal.y * sn, s.normal.x * sn + s.normal.y * c};
  return s;
}

CollisionState time_reverse(const CollisionState& s) {
  CollisionState r = s;
  r.direction = -reflect(s.direction, s.normal);
  return r;
}

std::vector<CorridorGap> open_corridors(const BilliardConfig& cfg, int q_max) {
  std::vector<CorridorGap> gaps;
  for (std::int64_t dx = 0; dx <= q_max; ++dx) {
    for (std::int64_t dy = -q_max; dy <= q_max; ++dy) {
      if (dx == 0 && dy != 1) continue;
      if (std::gcd(dx, dy < 0 ? -dy : dy) != 1) continue;
      const double len = std::hypot(double(dx), double(dy));
      const Vec2 nu{-double(dy) / len, double(dx) / len};
      // Offsets ν·x of lattice translates form (1/len)·Z.
      const double period = 1.0 / len;
      std::vector<std::pair<double, double>> cover;
      bool full = false;
      for (const auto& d : cfg.disks) {
        if (2.0 * d.radius >= period) {
          full = true;
          break;
        }
        double lo = dot(nu, d.center) - d.radius;
        lo -= std::floor(lo / period) * period;
        cover.emplace_back(lo, lo + 2.0 * d.radius);
      }
      if (full) continue;
      std::sort(cover.begin(), cover.end());
      // Largest uncovered arc on the circle of circumference `period`.
      double widest = 0.0;
      double reach = cover.front().second;
      for (std::size_t k = 1; k < cover.size(); ++k) {
        widest = std::max(widest, cover[k].first - reach);
        reach = std::max(reach, cover[k].second);
      }
      widest = std::max(widest, cover.front().first + period - reach);
      if (widest > 1e-12) gaps.push_back({dx, dy, widest});
    }
  }
  return gaps;
}

HorizonReport validate_finite_horizon(const BilliardConfig& cfg, std::int64_t n_samples,
                                      std::int64_t n_steps, std::uint64_t seed, int q_max) {
  HorizonReport rep;
  rep.q_max = q_max;
  rep.blocked_slopes_failed = open_corridors(cfg, q_max);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    CounterRng rng = task_stream(seed, 0x4B0B, static_cast<std::uint64_t>(i));
    CollisionState s = sample_invariant(cfg, rng);
    for (std::int64_t k = 0; k < n_steps; ++k) {
      try {
        FreeFlightResult r = next_collision(s, cfg);
        rep.max_flight = std::max(rep.max_flight, r.length);
        s = r.next;
        ++rep.steps;
      } catch (const GrazingCollision&) {
        ++rep.grazing_discarded;
        s = sample_invariant(cfg, rng);
      } catch (const HorizonViolation&) {
        ++rep.horizon_violations;
        rep.max_flight = std::numeric_limits<double>::infinity();
        s = sample_invariant(cfg, rng);
      }
    }
  }
  rep.ok = rep.blocked_slopes_failed.empty() && rep.horizon_violations == 0;
  return rep;
}

std::string HorizonReport::summary() const {
  std::ostringstream out;
  out << (ok ? "finite horizon certified" : "finite horizon NOT certified") << ": max_flight="
      << max_flight << " over " << steps << " steps, " << blocked_slopes_failed.size()
      << " open corridor(s) with q<=" << q_max;
  for (const auto& g : blocked_slopes_failed)
    out << "; (" << g.dx << "," << g.dy << ") width " << g.width;
  return out.str();
}

BilliardSystem::BilliardSystem(BilliardConfig cfg) : cfg_(std::move(cfg)) { validate_geometry(cfg_); }

std::int64_t BilliardSystem::advance(Point& p) const {
  FreeFlightResult r = next_collision(p, cfg_);
  p = r.next;
  return r.cell_displacement;
}

std::int64_t BilliardSystem::retreat(Point& p) const {
  FreeFlightResult r = next_collision(time_reverse(p), cfg_);
  p = time_reverse(r.next);
  return -r.cell_displacement;
}

std::int64_t BilliardSystem::phi(const Point& p) const {
  return next_collision(p, cfg_).cell_displacement;
}

}  // namespace infavg
