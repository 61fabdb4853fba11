#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "infavg/rng.hpp"
#include "infavg/zext.hpp"

namespace infavg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Disk {
  Vec2 center;  ///< in the fundamental cell [0,1)²
  double radius = 0.0;
};

/// Scatterers repeated with period 1 in x (the unfolded direction) and
/// period 1 in y (torus).
struct BilliardConfig {
  std::vector<Disk> disks;
  double horizon_cap = 3.0;
  bool symmetry_required = true;
};

/// Disks at (0,0) r=0.4 and (0.5,0.5) r=0.3.
BilliardConfig default_billiard();

/// Disjointness of all periodic images (margin 1e-6), radii positive, and,
/// if requested, invariance under (x,y) ↦ (−x,−y) mod 1.
/// Throws GeometryError.
void validate_geometry(const BilliardConfig& cfg);

/// Post-collision state. The impact point is center + radius · normal, in the
/// frame of the image hit last.
struct CollisionState {
  std::size_t disk_id = 0;
  std::array<std::int64_t, 2> image_offset{0, 0};  ///< cell offset of the last flight
  Vec2 normal{1.0, 0.0};                           ///< outward unit normal at impact
  Vec2 direction{1.0, 0.0};                        ///< outgoing unit velocity
  std::int64_t global_x_cell = 0;

  /// Polar angle of the impact point on its circle, in [0, 2π).
  double boundary_angle() const;
  /// Angle of the outgoing velocity to the normal, in (−π/2, π/2).
  double outgoing_angle() const { return std::atan2(cross(normal, direction), dot(normal, direction)); }
};

struct FreeFlightResult {
  double length = 0.0;
  CollisionState next;
  std::int64_t cell_displacement = 0;
};

inline constexpr double kGrazingTolerance = 1e-10;

/// v − 2⟨v,n⟩n. Throws ContractViolation for inputs off the unit circle by more than 1e-9.
Vec2 reflect(Vec2 v, Vec2 n);

/// Earliest hit over all periodic images within reach of the horizon cap.
/// Ties go to the shorter flight, then the lower disk id.
/// Throws HorizonViolation, GrazingCollision.
FreeFlightResult next_collision(const CollisionState& s, const BilliardConfig& cfg);

/// One collision-map step; returns the new state and φ, the x-cell displacement.
std::pair<CollisionState, std::int64_t> billiard_step(const CollisionState& s,
                                                      const BilliardConfig& cfg);

/// Draw from μ̄ ∝ cos θ dr dθ: disk ∝ circumference, uniform boundary angle,
/// θ = arcsin(2U − 1).
CollisionState sample_invariant(const BilliardConfig& cfg, CounterRng& rng);

/// The involution (q, v) ↦ (q, −reflect(v, n)). Conjugates the collision
/// map to its inverse: T̄⁻¹ = R ∘ T̄ ∘ R.
CollisionState time_reverse(const CollisionState& s);

struct CorridorGap {
  std::int64_t dx = 0;  ///< direction (dx, dy), primitive
  std::int64_t dy = 0;
  double width = 0.0;   ///< width of the widest open strip
};

struct HorizonReport {
  bool ok = true;
  double max_flight = 0.0;             ///< Monte Carlo maximum over accepted steps
  std::int64_t steps = 0;
  std::int64_t grazing_discarded = 0;
  std::int64_t horizon_violations = 0;
  int q_max = 20;
  std::vector<CorridorGap> blocked_slopes_failed;  ///< open corridors found
  std::string summary() const;
};

/// Open corridors for every primitive direction with max(|dx|,|dy|) ≤ q_max,
/// found by covering the circle of line offsets with the disks' shadows.
std::vector<CorridorGap> open_corridors(const BilliardConfig& cfg, int q_max = 20);

/// Statistical max free flight plus the corridor sweep. Never throws on a
/// failed geometry; the report carries the failure.
HorizonReport validate_finite_horizon(const BilliardConfig& cfg, std::int64_t n_samples,
                                      std::int64_t n_steps, std::uint64_t seed, int q_max = 20);

/// The Z-periodic Lorentz gas as a base system with φ = x-cell displacement.
class BilliardSystem {
 public:
  using Point = CollisionState;

  explicit BilliardSystem(BilliardConfig cfg);

  const BilliardConfig& config() const { return cfg_; }
  std::int64_t advance(Point& p) const;
  std::int64_t retreat(Point& p) const;
  std::int64_t phi(const Point& p) const;
  Point sample_invariant(CounterRng& rng) const { return infavg::sample_invariant(cfg_, rng); }
  std::int64_t phi_bound() const { return static_cast<std::int64_t>(std::ceil(cfg_.horizon_cap)); }

 private:
  BilliardConfig cfg_;
};

static_assert(InvertibleBaseSystem<BilliardSystem>);

}  // namespace infavg
