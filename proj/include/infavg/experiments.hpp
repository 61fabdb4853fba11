#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "infavg/billiard.hpp"
#include "infavg/ensemble.hpp"
#include "infavg/greenkubo.hpp"
#include "infavg/limitproc.hpp"
#include "infavg/shift_toy.hpp"
#include "infavg/slowfast.hpp"

namespace infavg {

struct OrbitOptions {
  double eps = 1e-2;
  double t_end = 1.0;
  int substeps = 4;
  std::int64_t n = 1000;
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
  std::uint64_t stream = kStreamToyOrbits;
};

/// Orbit i starts at (ω̄_i, 0), ω̄_i drawn from stream (seed, stream, i), so
/// every ε in a sweep sees the same initial points.
template <BaseSystem S>
ZPoint<typename S::Point> ensemble_start(const S& sys, CounterRng& rng) {
  return {sys.sample_invariant(rng), 0};
}

/// ε^{-3/4} e_T per orbit.
template <BaseSystem S>
std::vector<Vector> error_ensemble(const S& sys, const DrivenVectorField<typename S::Point>& field,
                                   const Vector& x0, const OrbitOptions& o) {
  const TrajectoryGrid w = averaged_on_segments(x0, field.drift(), o.eps, o.t_end, o.substeps,
                                                std::numeric_limits<int>::max());
  const Vector w_end = w.back();
  const double scale = std::pow(o.eps, -0.75);
  std::vector<Vector> out(static_cast<std::size_t>(o.n));
  PerturbedOptions po{o.substeps, std::numeric_limits<int>::max()};
  for_each_task(out.size(), o.exec, [&](std::size_t i) {
    CounterRng rng = task_stream(o.seed, o.stream, i);
    out[i] = retry_grazing([&]() {
      auto omega = ensemble_start(sys, rng);
      const TrajectoryGrid x = solve_perturbed(sys, field, x0, omega, o.eps, o.t_end, po);
      return Vector(scale * (x.back() - w_end));
    });
  });
  return out;
}

struct BirkhoffOutcome {
  Vector v_end;
  Vector vtilde_end;
  double gap_sup = 0.0;  ///< sup_t ‖v_t − ṽ_t‖ over the grid kε
};

template <BaseSystem S>
std::vector<BirkhoffOutcome> birkhoff_ensemble(const S& sys, const DrivenVectorField<typename S::Point>& field,
                                               const Vector& x0, const OrbitOptions& o) {
  const TrajectoryGrid w = averaged_for_birkhoff(x0, field.drift(), o.eps, o.t_end, o.substeps);
  std::vector<BirkhoffOutcome> out(static_cast<std::size_t>(o.n));
  for_each_task(out.size(), o.exec, [&](std::size_t i) {
    CounterRng rng = task_stream(o.seed, o.stream, i);
    out[i] = retry_grazing([&]() {
      auto omega = ensemble_start(sys, rng);
      const BirkhoffSums sums = birkhoff_sums(sys, field, omega, o.eps, o.t_end, w);
      BirkhoffOutcome r;
      r.v_end = sums.v.back();
      r.vtilde_end = sums.vtilde.back();
      for (std::size_t k = 0; k < sums.v.size(); ++k)
        r.gap_sup = std::max(r.gap_sup, (sums.v.state(k) - sums.vtilde.state(k)).norm());
      return r;
    });
  });
  return out;
}

template <BaseSystem S>
std::vector<double> shift_sensitivity_ensemble(const S& sys, const DrivenVectorField<typename S::Point>& field,
                                               const Vector& x0, const OrbitOptions& o) {
  std::vector<double> out(static_cast<std::size_t>(o.n));
  for_each_task(out.size(), o.exec, [&](std::size_t i) {
    CounterRng rng = task_stream(o.seed, o.stream, i);
    out[i] = retry_grazing([&]() {
      auto omega = ensemble_start(sys, rng);
      return zwei_shift_sensitivity(sys, field, x0, omega, o.eps, o.t_end, o.substeps);
    });
  });
  return out;
}

struct LocalTimeSample {
  double local_time = 0.0;  ///< L'_T(0)
  double time_changed = 0.0;  ///< B_{c L'_T}
};

/// Per path: B' of variance Σ, its occupation local time with bandwidth δ,
/// and B_{c L'} at T (d = 1).
std::vector<LocalTimeSample> local_time_ensemble(double sigma, double t_end, double dt, double delta,
                                                 std::int64_t n, std::uint64_t seed, Exec exec,
                                                 double clock_scale = 1.0,
                                                 std::uint64_t stream = kStreamBrownian);

/// y_T (Euler–Maruyama) per path.
std::vector<Vector> limit_ensemble(const LimitCoefficients& coef, double sigma, double t_end, std::int64_t n,
                                   std::uint64_t seed, Exec exec, std::uint64_t stream = kStreamLimitY);

struct BilliardAudit {
  std::int64_t collisions = 0;
  std::int64_t grazing_discarded = 0;
  std::int64_t horizon_violations = 0;
  double speed_drift = 0.0;          ///< max |‖v‖ − 1|
  double reflection_residual = 0.0;  ///< max over normal and tangential components
  double max_flight = 0.0;
  double phi_mean = 0.0;
  double phi_std = 0.0;
  std::int64_t phi_bound_violations = 0;
};

BilliardAudit billiard_audit(const BilliardSystem& sys, std::int64_t n_orbits, std::int64_t n_steps,
                             std::uint64_t seed, Exec exec);

struct RetraceReport {
  std::int64_t orbits = 0;
  std::int64_t steps = 0;
  std::int64_t orbits_within_tol = 0;  ///< all steps within tolerance and ids matching
  std::int64_t id_mismatches = 0;
  double tolerance = 1e-8;
  double worst_error = 0.0;
  double median_horizon = 0.0;  ///< steps retraced before the error first exceeds the tolerance
  double lyapunov = 0.0;        ///< per collision, Benettin estimate
};

RetraceReport billiard_retrace(const BilliardSystem& sys, std::int64_t n_orbits, std::int64_t n_steps,
                               double tolerance, std::uint64_t seed, Exec exec);

struct InvarianceReport {
  double ks_disk = 0.0;
  double ks_boundary_angle = 0.0;
  double ks_outgoing_angle = 0.0;
  std::int64_t samples = 0;
  std::int64_t grazing_discarded = 0;
};

InvarianceReport billiard_invariance(const BilliardSystem& sys, std::int64_t n_samples, int n_steps,
                                     std::uint64_t seed, Exec exec);

/// Exact Green–Kubo term matrices for a toy field (every term must be a
/// toy h of kind phi/bits/one; supply the cylinder observables).
GreenKuboModel toy_exact_model(const std::vector<CylinderObservable>& h, const std::vector<LevelWeights>& psi,
                               int l_max, Exec exec = Exec::Serial);

// ---------------------------------------------------------------------------
// Acceptance suite

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  nlohmann::json metrics = nlohmann::json::object();
};

struct AcceptanceOptions {
  std::uint64_t seed = 20261018;
  Exec exec = Exec::Parallel;
};

inline constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id, const AcceptanceOptions& opts);
std::string format_line(const CriterionResult& r);
nlohmann::json to_json(const CriterionResult& r);

/// Cheap cross-checks reported next to the criteria: both Green–Kubo series
/// on the billiard, Σ plateau, local-time refinement, y constructions.
nlohmann::json run_diagnostics(const AcceptanceOptions& opts);

}  // namespace infavg
