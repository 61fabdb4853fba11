#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "infavg/errors.hpp"
#include "infavg/field.hpp"
#include "infavg/zext.hpp"

namespace infavg {

/// Time-stamped path of a d-dimensional state, row-major.
class TrajectoryGrid {
 public:
  TrajectoryGrid() = default;
  explicit TrajectoryGrid(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& data() const { return states_; }

  Eigen::Map<const Vector> state(std::size_t k) const {
    return Eigen::Map<const Vector>(states_.data() + k * dim_, dim_);
  }
  double time(std::size_t k) const { return times_[k]; }
  Eigen::Map<const Vector> back() const { return state(size() - 1); }

  void reserve(std::size_t n) {
    times_.reserve(n);
    states_.reserve(n * static_cast<std::size_t>(dim_));
  }

  /// Appends (t, x). Times must increase strictly and states be finite.
  void push(double t, const ConstVecRef& x) {
    if (!times_.empty() && !(t > times_.back()))
      throw ContractViolation("trajectory times must increase strictly");
    if (!x.allFinite()) throw NonFiniteState("non-finite state at t = " + std::to_string(t));
    times_.push_back(t);
    states_.insert(states_.end(), x.data(), x.data() + dim_);
  }

  /// Index of the grid time equal to t within a relative 1e-9; GridMismatch otherwise.
  std::size_t index_of(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::fabs(t));
    auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
    if (it == times_.end() || std::fabs(*it - t) > tol)
      throw GridMismatch("time " + std::to_string(t) + " is not on the trajectory grid");
    return static_cast<std::size_t>(it - times_.begin());
  }

  /// Largest Euclidean norm over the path.
  double sup_norm() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s = std::max(s, state(k).norm());
    return s;
  }

 private:
  int dim_ = 1;
  std::vector<double> times_;
  std::vector<double> states_;
};

/// Slow-time segmentation [kε, (k+1)ε) of [0, T]; a shorter last segment
/// if T/ε is not an integer.
struct SegmentPlan {
  double eps = 0.0;
  double t_end = 0.0;
  std::int64_t full = 0;   ///< number of full segments
  double remainder = 0.0;  ///< length of the trailing partial segment (0 if none)

  SegmentPlan(double eps_, double t_end_);
  std::int64_t count() const { return full + (remainder > 0.0 ? 1 : 0); }
  double start(std::int64_t k) const { return static_cast<double>(k) * eps; }
  double end(std::int64_t k) const { return k + 1 >= count() ? t_end : static_cast<double>(k + 1) * eps; }
  double length(std::int64_t k) const { return k < full ? eps : remainder; }
};

/// Classical RK4 scratch space for one trajectory.
struct Rk4Workspace {
  explicit Rk4Workspace(int dim)
      : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), rhs_scratch(dim), rhs_extra(dim) {}
  Vector k1, k2, k3, k4, tmp, rhs_scratch, rhs_extra;
};

/// n RK4 steps of size h for x' = rhs(x, out).
template <class Rhs>
void rk4_steps(VecRef x, double h, int n, Rhs&& rhs, Rk4Workspace& ws) {
  for (int i = 0; i < n; ++i) {
    rhs(x, ws.k1);
    ws.tmp = x + (0.5 * h) * ws.k1;
    rhs(ws.tmp, ws.k2);
    ws.tmp = x + (0.5 * h) * ws.k2;
    rhs(ws.tmp, ws.k3);
    ws.tmp = x + h * ws.k3;
    rhs(ws.tmp, ws.k4);
    x += (h / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
  }
}

/// RK4 on w' = F̄(w) with step dt, recorded every `record_stride` steps and at T.
/// Throws NonFiniteState.
TrajectoryGrid solve_averaged(const Vector& x0, const Drift& drift, double t_end, double dt,
                              int record_stride = 1);

/// The averaged solution on exactly the segmentation and RK4 steps that
/// solve_perturbed uses for the same (eps, T, substeps), so that F ≡ 0 gives
/// identical arithmetic. Recorded at segment boundaries.
TrajectoryGrid averaged_on_segments(const Vector& x0, const Drift& drift, double eps, double t_end,
                                    int substeps, int record_stride = 1);

/// The averaged solution at half-segment resolution, as needed by the
/// Simpson rule in perturbed_birkhoff_v.
TrajectoryGrid averaged_for_birkhoff(const Vector& x0, const Drift& drift, double eps, double t_end,
                                     int substeps);

struct PerturbedOptions {
  int substeps = 4;
  int record_stride = 1;  ///< record every this many segments (and at T)
};

/// x' = F(x, T^k ω) + F̄(x) on [kε, (k+1)ε), the driver frozen on each
/// segment and advanced by one step of the Z-extension in between.
template <BaseSystem S>
TrajectoryGrid solve_perturbed(const S& sys, const DrivenVectorField<typename S::Point>& field,
                               const Vector& x0, ZPoint<typename S::Point> omega, double eps,
                               double t_end, PerturbedOptions opt = {}) {
  if (!(eps > 0.0)) throw ContractViolation("solve_perturbed: eps must be positive");
  if (opt.substeps < 1) throw ContractViolation("solve_perturbed: substeps must be >= 1");
  if (x0.size() != field.dim()) throw ContractViolation("solve_perturbed: x0 dimension mismatch");
  const SegmentPlan plan(eps, t_end);
  const int dim = field.dim();
  const Drift& drift = field.drift();
  Rk4Workspace ws(dim);
  std::vector<double> coeff;
  bool active = false;
  auto rhs = [&](const ConstVecRef& x, VecRef out) {
    drift.f(x, out);
    if (active) {
      field.centered_from_coefficients(x, coeff, ws.rhs_extra, ws.rhs_scratch);
      out += ws.rhs_extra;
    }
  };

  TrajectoryGrid grid(dim);
  grid.reserve(static_cast<std::size_t>(plan.count() / std::max(1, opt.record_stride) + 2));
  Vector x = x0;
  grid.push(0.0, x);
  const std::int64_t n = plan.count();
  for (std::int64_t k = 0; k < n; ++k) {
    active = field.coefficients(omega.base, omega.level, coeff);
    rk4_steps(x, plan.length(k) / opt.substeps, opt.substeps, rhs, ws);
    if (!x.allFinite()) throw NonFiniteState("perturbed solution left the finite range");
    if (k + 1 < n) step_z_inplace(sys, omega);
    if ((k + 1) % opt.record_stride == 0 || k + 1 == n) grid.push(plan.end(k), x);
  }
  return grid;
}

/// e = x^ε − w, pointwise. Throws GridMismatch.
TrajectoryGrid error_process(const TrajectoryGrid& perturbed, const TrajectoryGrid& averaged);

struct BirkhoffSums {
  TrajectoryGrid v;       ///< ε^{1/4} ∫_0^{t/ε} F(w_{εs}, T^{⌊s⌋}ω) ds
  TrajectoryGrid vtilde;  ///< ε^{1/4} Σ_{k=1}^{⌊t/ε⌋} F(w_{εk}, T^k ω)
};

namespace detail {
inline std::int64_t integer_segments(double eps, double t_end) {
  const SegmentPlan plan(eps, t_end);
  if (plan.remainder > 0.0)
    throw GridMismatch("perturbed Birkhoff sums need T/eps to be an integer");
  return plan.full;
}
}  // namespace detail

/// Both perturbed Birkhoff sums along one orbit, on the grid t_k = kε.
/// `w` must carry the points kε/2 (see averaged_for_birkhoff).
template <BaseSystem S>
BirkhoffSums birkhoff_sums(const S& sys, const DrivenVectorField<typename S::Point>& field,
                           ZPoint<typename S::Point> omega, double eps, double t_end,
                           const TrajectoryGrid& w) {
  if (!(eps > 0.0)) throw ContractViolation("birkhoff_sums: eps must be positive");
  const std::int64_t n = detail::integer_segments(eps, t_end);
  const int dim = field.dim();
  const double scale = std::pow(eps, 0.25);
  std::vector<double> coeff;
  Vector f0(dim), fm(dim), f1(dim), scratch(dim);
  Vector v = Vector::Zero(dim);
  Vector vt = Vector::Zero(dim);
  BirkhoffSums out{TrajectoryGrid(dim), TrajectoryGrid(dim)};
  out.v.reserve(static_cast<std::size_t>(n) + 1);
  out.vtilde.reserve(static_cast<std::size_t>(n) + 1);
  out.v.push(0.0, v);
  out.vtilde.push(0.0, vt);
  // Locate w_0 once; the w grid is uniform with spacing ε/2.
  const std::size_t base_index = w.index_of(0.0);
  if (w.size() < base_index + 2 * static_cast<std::size_t>(n) + 1)
    throw GridMismatch("averaged path does not cover [0, T] at spacing eps/2");
  auto w_at = [&](std::int64_t half_steps) {
    const std::size_t idx = base_index + static_cast<std::size_t>(half_steps);
    const double expected = 0.5 * eps * static_cast<double>(half_steps);
    if (std::fabs(w.time(idx) - expected) > 1e-9 * std::max(1.0, expected))
      throw GridMismatch("averaged path is not on the eps/2 grid");
    return w.state(idx);
  };
  for (std::int64_t k = 0; k < n; ++k) {
    // v over the unit fast interval [k, k+1): driver T^k ω, Simpson in s.
    if (field.coefficients(omega.base, omega.level, coeff)) {
      field.centered_from_coefficients(w_at(2 * k), coeff, f0, scratch);
      field.centered_from_coefficients(w_at(2 * k + 1), coeff, fm, scratch);
      field.centered_from_coefficients(w_at(2 * k + 2), coeff, f1, scratch);
      v += (scale / 6.0) * (f0 + 4.0 * fm + f1);
    }
    step_z_inplace(sys, omega);
    // ṽ picks up F(w_{ε(k+1)}, T^{k+1} ω).
    if (field.coefficients(omega.base, omega.level, coeff)) {
      field.centered_from_coefficients(w_at(2 * k + 2), coeff, f1, scratch);
      vt += scale * f1;
    }
    const double t = k + 1 == n ? t_end : static_cast<double>(k + 1) * eps;
    out.v.push(t, v);
    out.vtilde.push(t, vt);
  }
  return out;
}

template <BaseSystem S>
TrajectoryGrid perturbed_birkhoff_v(const S& sys, const DrivenVectorField<typename S::Point>& field,
                                    ZPoint<typename S::Point> omega, double eps, double t_end,
                                    const TrajectoryGrid& w) {
  return birkhoff_sums(sys, field, std::move(omega), eps, t_end, w).v;
}

template <BaseSystem S>
TrajectoryGrid discrete_vtilde(const S& sys, const DrivenVectorField<typename S::Point>& field,
                               ZPoint<typename S::Point> omega, double eps, double t_end,
                               const TrajectoryGrid& w) {
  return birkhoff_sums(sys, field, std::move(omega), eps, t_end, w).vtilde;
}

/// ε^{1/4} (T·C_F + ‖F‖∞), with C_F the slow-time Lipschitz constant of
/// s ↦ F(w_s, ω): Lip_x(F) · max_s ‖F̄(w_s)‖ along `w`.
template <class Point>
double birkhoff_gap_bound(const DrivenVectorField<Point>& field, const TrajectoryGrid& w,
                          double eps, double t_end) {
  double drift_sup = 0.0;
  Vector out(field.dim());
  for (std::size_t k = 0; k < w.size(); ++k) {
    field.drift().f(w.state(k), out);
    drift_sup = std::max(drift_sup, out.norm());
  }
  const double c_f = field.lipschitz_bound() * drift_sup;
  return std::pow(eps, 0.25) * (t_end * c_f + field.sup_bound());
}

/// sup_t ε^{-3/4} ‖e_t(x, ω) − e_t(x, Tω)‖, sampled at every RK4 sub-step.
template <BaseSystem S>
double zwei_shift_sensitivity(const S& sys, const DrivenVectorField<typename S::Point>& field,
                              const Vector& x0, ZPoint<typename S::Point> omega, double eps,
                              double t_end, int substeps = 4) {
  if (!(eps > 0.0)) throw ContractViolation("zwei_shift_sensitivity: eps must be positive");
  if (substeps < 1) throw ContractViolation("zwei_shift_sensitivity: substeps must be >= 1");
  const SegmentPlan plan(eps, t_end);
  const int dim = field.dim();
  const Drift& drift = field.drift();
  ZPoint<typename S::Point> shifted = step_z(sys, omega);
  Rk4Workspace ws_a(dim), ws_b(dim);
  std::vector<double> ca, cb;
  bool active_a = false, active_b = false;
  auto rhs_a = [&](const ConstVecRef& x, VecRef out) {
    drift.f(x, out);
    if (active_a) {
      field.centered_from_coefficients(x, ca, ws_a.rhs_extra, ws_a.rhs_scratch);
      out += ws_a.rhs_extra;
    }
  };
  auto rhs_b = [&](const ConstVecRef& x, VecRef out) {
    drift.f(x, out);
    if (active_b) {
      field.centered_from_coefficients(x, cb, ws_b.rhs_extra, ws_b.rhs_scratch);
      out += ws_b.rhs_extra;
    }
  };
  Vector xa = x0, xb = x0;
  double sup = 0.0;
  const std::int64_t n = plan.count();
  for (std::int64_t k = 0; k < n; ++k) {
    active_a = field.coefficients(omega.base, omega.level, ca);
    active_b = field.coefficients(shifted.base, shifted.level, cb);
    const double h = plan.length(k) / substeps;
    for (int i = 0; i < substeps; ++i) {
      rk4_steps(xa, h, 1, rhs_a, ws_a);
      rk4_steps(xb, h, 1, rhs_b, ws_b);
      sup = std::max(sup, (xa - xb).norm());
    }
    if (!xa.allFinite() || !xb.allFinite()) throw NonFiniteState("shift sensitivity diverged");
    if (k + 1 < n) {
      step_z_inplace(sys, omega);
      step_z_inplace(sys, shifted);
    }
  }
  return sup * std::pow(eps, -0.75);
}

}  // namespace infavg
