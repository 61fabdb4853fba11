#pragma once

#include <cstdint>
#include <vector>

#include "infavg/field.hpp"
#include "infavg/rng.hpp"
#include "infavg/slowfast.hpp"

namespace infavg {

/// B'_{k dt}, k = 0..n, with B'_0 = 0 and increments N(0, Σ dt).
struct BrownianPath {
  double dt = 0.0;
  double sigma = 0.0;
  std::vector<double> values;
};

/// Occupation-density local time at 0,
///   L'_t(0) ≈ (2δ)⁻¹ Σ_{k dt < t} dt · 1{|B'_{k dt}| ≤ δ},
/// so that L'_t(0) has the law of √(t/Σ)|N(0,1)|.
struct LocalTimePath {
  double dt = 0.0;
  double delta = 0.0;
  std::vector<double> values;
  bool below_resolution = false;  ///< δ < √(Σ dt)
};

/// B_{c L'_t} on the same grid, d components, row-major (n+1) × d.
struct TimeChangedPath {
  double dt = 0.0;
  int dim = 1;
  std::vector<double> values;

  std::size_t steps() const { return values.size() / static_cast<std::size_t>(dim) - 1; }
  Eigen::Map<const Vector> at(std::size_t k) const {
    return Eigen::Map<const Vector>(values.data() + k * dim, dim);
  }
};

/// Number of steps of size dt in [0, T]; GridMismatch unless T/dt is an integer.
std::size_t grid_steps(double t_end, double dt);

BrownianPath simulate_bm(double sigma, double t_end, double dt, CounterRng& rng);

LocalTimePath local_time_occupation(const BrownianPath& path, double delta);

/// ΔB_{cL'} ~ N(0, c ΔL' I_d), drawn only where ΔL' > 0; flat elsewhere.
TimeChangedPath time_changed_bm(const LocalTimePath& local_time, int dim, CounterRng& rng,
                                double clock_scale = 1.0);

/// Σ_k √a_k ΔB_k with left-point (Itô) coefficients. `sqrt_a` holds one
/// matrix per step, or a single matrix used for every step.
TrajectoryGrid ito_sqrt_a_integral(const std::vector<Matrix>& sqrt_a, const TimeChangedPath& b);

/// Everything along w that the limit process needs, per step k.
struct LimitCoefficients {
  double dt = 0.0;
  int dim = 1;
  TrajectoryGrid w;
  std::vector<Matrix> sqrt_a;  ///< √a(w_{k dt})
  std::vector<Matrix> jac;     ///< DF̄(w_{k dt})
  std::vector<Matrix> step_exp;  ///< exp(DF̄(w_{k dt}) dt)
};

/// Solves the averaged equation on the dt grid and tabulates √a, DF̄ and
/// the one-step propagators. `a_of_x` returns the Green–Kubo matrix at x.
LimitCoefficients limit_coefficients(const Drift& drift, const std::function<Matrix(const Vector&)>& a_of_x,
                                     const Vector& x0, double t_end, double dt);

struct LimitPath {
  TrajectoryGrid euler;   ///< y by Euler–Maruyama on dy = √a dB_{L'} + DF̄ y dt
  TrajectoryGrid closed;  ///< y = M + ∫ Φ(t,s) DF̄ M_s ds with M = ∫√a dB_{L'}
};

/// Both constructions of y driven by the same increments of B_{L'}.
LimitPath limit_y(const LimitCoefficients& coef, const TimeChangedPath& b);

/// y_T only (Euler–Maruyama), without storing the path.
Vector limit_y_endpoint(const LimitCoefficients& coef, const TimeChangedPath& b);

/// One full draw: B' → L' → B_{L'} → y. δ = 2√(Σ dt) unless given.
struct LimitDraw {
  double local_time = 0.0;  ///< L'_T(0)
  Vector b_end;             ///< B_{L'_T}
  Vector y_end;             ///< y_T (Euler–Maruyama)
};
LimitDraw draw_limit(const LimitCoefficients& coef, double sigma, double t_end, CounterRng& rng,
                     double delta = -1.0);

}  // namespace infavg
